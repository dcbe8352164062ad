"""Six-qubit resource state and the adaptive measurement protocol that
deterministically prepares arbitrary three-qubit targets on parties 1-3.

Qubits 6, 5, 4 are measured in that order in the bases
{sigma_z^k Z(-theta)|+>}: theta_6 = alpha_6, theta_4 = alpha_4, and
theta_5 = +/- alpha_5 with the sign conditioned on the qubit-6 outcome. The
leftover Pauli frame (sigma_z^{k4+k5} x sigma_z^{k5} sigma_y^{k6} x
sigma_z^{k4+k6}) is inverted explicitly, so every branch delivers the exact
target state rather than a Pauli-equivalent one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DensityMatrix,
    ProductOperator,
    PureState,
    apply_on,
    apply_product,
    cz_gate,
    fidelity,
    hadamard,
    pauli,
    phase_string_gate,
    plus_state,
    projective_measure,
    t2_gate,
    t3_gate,
    z_rot,
)

REP_FIDELITY_TOL = 1e-10
PROB_SUM_ATOL = 1e-12

CZ_LAYER = ((2, 3), (1, 2), (3, 4), (3, 5), (1, 5), (4, 5), (5, 6), (4, 6))


def build_phi3() -> PureState:
    """The six-qubit stabilizer resource state."""
    state = plus_state(6)
    for pair in CZ_LAYER:
        state = apply_on(state, cz_gate(), pair)
    state = apply_on(state, hadamard(), [1])
    state = apply_on(state, z_rot(-math.pi / 4), [4])
    state = apply_on(state, z_rot(-math.pi / 4), [5])
    state = apply_on(state, z_rot(-math.pi / 4), [6])
    state = apply_on(state, z_rot(math.pi / 2), [2])
    state = apply_on(state, hadamard(), [3])
    state = apply_on(state, z_rot(math.pi / 4), [3])
    return state


@dataclass(frozen=True)
class RepTargetParams:
    """Phase-gate angles selecting the prepared three-qubit state."""

    alpha4: float
    alpha5: float
    alpha6: float


def target_state(params: RepTargetParams) -> PureState:
    """Z_13(a4) Z_12(a5) (1 x T_2 x T_3) Z_23(a6) |+++>, normalized."""
    state = plus_state(3)
    state = apply_on(state, phase_string_gate(params.alpha6, 2), [2, 3])
    state = apply_on(state, t2_gate(), [2])
    state = apply_on(state, t3_gate(), [3])
    state = apply_on(state, phase_string_gate(params.alpha5, 2), [1, 2])
    state = apply_on(state, phase_string_gate(params.alpha4, 2), [1, 3])
    return state


_PLUS = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0)


def measurement_basis(theta: float) -> tuple[np.ndarray, np.ndarray]:
    """{sigma_z^k Z(-theta)|+>} for k = 0, 1."""
    b0 = z_rot(-theta) @ _PLUS
    return b0, pauli("z") @ b0


@dataclass(frozen=True)
class RepOutcome:
    k4: int
    k5: int
    k6: int
    branch_probability: float
    raw_state: PureState
    correction: ProductOperator
    corrected_state: PureState


def _pauli_power(letter: str, k: int) -> np.ndarray:
    return pauli(letter) if k % 2 else np.eye(2, dtype=complex)


def simulate_rep(
    params: RepTargetParams,
    outcomes: tuple[int, int, int] | None = None,
    rng: np.random.Generator | None = None,
    adapt_sign: bool = True,
) -> RepOutcome:
    """Measure qubits 6, 5, 4 of the resource state and undo the Pauli frame.

    ``outcomes`` forces the branch as (k6, k5, k4). ``adapt_sign=False``
    disables the outcome-conditioned sign of theta_5; it exists only as a
    negative control, since without it determinism fails for alpha5 != 0 mod pi.
    """
    gen = rng if rng is not None else np.random.default_rng(0)
    forced = (None, None, None) if outcomes is None else tuple(outcomes)
    state = build_phi3()

    res6 = projective_measure(
        state, 6, measurement_basis(params.alpha6), forced_outcome=forced[0], rng=gen
    )
    k6 = res6.outcome
    theta5 = params.alpha5 if (k6 == 0 or not adapt_sign) else -params.alpha5
    res5 = projective_measure(
        res6.post_state, 5, measurement_basis(theta5), forced_outcome=forced[1], rng=gen
    )
    k5 = res5.outcome
    res4 = projective_measure(
        res5.post_state, 4, measurement_basis(params.alpha4), forced_outcome=forced[2], rng=gen
    )
    k4 = res4.outcome

    frame1 = _pauli_power("z", k4 + k5)
    frame2 = _pauli_power("z", k5) @ _pauli_power("y", k6)
    frame3 = _pauli_power("z", k4 + k6)
    correction = ProductOperator(
        tuple(m.conj().T for m in (frame1, frame2, frame3))
    )
    corrected, _ = apply_product(correction, res4.post_state)
    prob = res6.probability * res5.probability * res4.probability
    return RepOutcome(k4, k5, k6, prob, res4.post_state, correction, corrected)


@dataclass(frozen=True)
class RepBranchRecord:
    k6: int
    k5: int
    k4: int
    probability: float
    corrected_fidelity: float


@dataclass(frozen=True)
class RepReport:
    params: RepTargetParams
    branches: tuple[RepBranchRecord, ...]
    probability_total: float
    min_fidelity: float
    all_pass: bool


def verify_rep_determinism(
    params: RepTargetParams, tol: float = REP_FIDELITY_TOL
) -> RepReport:
    """Force all eight outcome paths and check each hits the target state."""
    target = target_state(params)
    records = []
    total = 0.0
    worst = 1.0
    for k6 in (0, 1):
        for k5 in (0, 1):
            for k4 in (0, 1):
                out = simulate_rep(params, outcomes=(k6, k5, k4))
                f = fidelity(out.corrected_state, target)
                records.append(RepBranchRecord(k6, k5, k4, out.branch_probability, f))
                total += out.branch_probability
                worst = min(worst, f)
    all_pass = worst >= 1.0 - tol and abs(total - 1.0) <= PROB_SUM_ATOL
    return RepReport(params, tuple(records), total, worst, all_pass)


@dataclass(frozen=True)
class MixedPrepResult:
    entry_index: int
    outcome: RepOutcome
    final_state: PureState
    density: DensityMatrix


def prepare_mixed3(entries, rng: np.random.Generator) -> MixedPrepResult:
    """Sample an ensemble entry, run the protocol, and report the exact density.

    ``entries`` holds (weight, RepTargetParams, post_lu) triples; ``post_lu``
    is an optional ProductOperator of unitaries applied after preparation. The
    returned density is the exact mixture sum_i p_i |psi_i><psi_i| over the
    declared targets, independent of the sampled branch.
    """
    entries = list(entries)
    if not entries:
        raise ValueError("empty ensemble")
    weights = np.array([float(w) for w, _, _ in entries])
    if weights.min() < 0 or abs(weights.sum() - 1.0) > 1e-12:
        raise ValueError("weights must be nonnegative and sum to 1")

    finals = []
    for _, params, post_lu in entries:
        psi = target_state(params)
        if post_lu is not None:
            psi, _ = apply_product(post_lu, psi)
        finals.append(psi)
    rho = np.zeros((8, 8), dtype=complex)
    for w, psi in zip(weights, finals):
        rho += w * np.outer(psi.amplitudes, psi.amplitudes.conj())
    density = DensityMatrix(8, rho)

    idx = int(rng.choice(len(entries), p=weights))
    _, params, post_lu = entries[idx]
    outcome = simulate_rep(params, rng=rng)
    final = outcome.corrected_state
    if post_lu is not None:
        final, _ = apply_product(post_lu, final)
    return MixedPrepResult(idx, outcome, final, density)
