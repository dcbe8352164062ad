"""Separable-map conversion engine.

Decides whether a state g|Psi> converts deterministically to h|Psi> under
separable operations by solving the weight equation

    sum_k p_k S_k^dag H S_k = r G,      H = h^dag h,  G = g^dag g,

over the symmetries S_k of |Psi>, builds the POVM M_k = sqrt(p_k/r) h S_k g^-1
realizing the conversion, and packages one-round protocols in which a single
party measures and the others apply outcome-conditioned unitaries.

A passing verification certifies SEP convertibility. SEP strictly contains
deterministic LOCC, so a negative verdict rules LOCC out, while a positive one
is LOCC-certified only when an explicit one-round protocol is attached (as the
synthesized four-qubit protocols are).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    PAULI,
    ProductOperator,
    PureState,
    apply_product,
    fidelity,
    lu_equivalent,
    psd_sqrt,
)
from .fourqubit import (
    FactorTag,
    GabcdParams,
    classify_factor,
    is_reachable,
    seed_state,
    symmetry_group,
)
from .nnls import nnls

SEP_RESIDUAL_TOL = 1e-9
POVM_COMPLETENESS_TOL = 1e-9
KRAUS_COMPLETENESS_TOL = 1e-10
BRANCH_SKIP_PROB = 1e-14
WEIGHT_ATOL = 1e-12


# -- one-round LOCC protocols --------------------------------------------------

@dataclass(frozen=True)
class LoccProtocol:
    """One measuring party; everyone applies an outcome-conditioned unitary.

    ``kraus_ops`` act on ``acting_party`` (1-based); ``corrections[k]`` holds one
    unitary per party (identity allowed) applied after outcome k. ``dims`` are
    the per-party local dimensions, so bipartite qudit protocols and n-qubit
    protocols share the same container.
    """

    acting_party: int
    kraus_ops: tuple
    corrections: tuple
    dims: tuple

    def __post_init__(self):
        d = self.dims[self.acting_party - 1]
        kraus = tuple(np.asarray(k, dtype=complex) for k in self.kraus_ops)
        acc = sum(k.conj().T @ k for k in kraus)
        if np.max(np.abs(acc - np.eye(d))) > KRAUS_COMPLETENESS_TOL:
            raise ValueError("Kraus operators do not resolve the identity")
        corr = []
        for cs in self.corrections:
            if len(cs) != len(self.dims):
                raise ValueError("corrections must list one unitary per party")
            row = []
            for dim, u in zip(self.dims, cs):
                u = np.asarray(u, dtype=complex)
                if np.max(np.abs(u.conj().T @ u - np.eye(dim))) > 1e-9:
                    raise ValueError("corrections must be unitary")
                row.append(u)
            corr.append(tuple(row))
        object.__setattr__(self, "kraus_ops", kraus)
        object.__setattr__(self, "corrections", tuple(corr))

    @property
    def num_outcomes(self) -> int:
        return len(self.kraus_ops)


@dataclass(frozen=True)
class ProtocolBranch:
    outcome: int
    probability: float
    vector: np.ndarray


def _apply_local(vec: np.ndarray, dims, op: np.ndarray, party: int) -> np.ndarray:
    t = vec.reshape(dims)
    t = np.moveaxis(np.tensordot(op, t, axes=([1], [party - 1])), 0, party - 1)
    return t.reshape(-1)


def execute_protocol(protocol: LoccProtocol, vec: np.ndarray) -> list[ProtocolBranch]:
    """Run every branch on a normalized flat input vector."""
    vec = np.asarray(vec, dtype=complex).reshape(-1)
    if vec.size != int(np.prod(protocol.dims)):
        raise ValueError("input vector does not match protocol dimensions")
    branches = []
    for k, kraus in enumerate(protocol.kraus_ops):
        out = _apply_local(vec, protocol.dims, kraus, protocol.acting_party)
        prob = float(np.vdot(out, out).real)
        if prob > 0.0:
            out = out / math.sqrt(prob)
        for party, u in enumerate(protocol.corrections[k], start=1):
            out = _apply_local(out, protocol.dims, u, party)
        branches.append(ProtocolBranch(k, prob, out))
    return branches


# -- the weight equation -------------------------------------------------------

@dataclass(frozen=True)
class SepInstance:
    """A candidate solution of the weight equation."""

    G: ProductOperator
    H: ProductOperator
    r: float
    symmetries: tuple
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.size != len(self.symmetries):
            raise ValueError("one weight per symmetry required")
        if w.min() < -WEIGHT_ATOL:
            raise ValueError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > WEIGHT_ATOL:
            raise ValueError("weights must sum to 1")
        if not self.r > 0:
            raise ValueError("r must be positive")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "symmetries", tuple(self.symmetries))


def verify_sep(instance: SepInstance, tol: float = SEP_RESIDUAL_TOL) -> tuple[bool, float]:
    """Check the weight equation as full tensor operators; returns (ok, residual)."""
    gf = instance.G.full_matrix()
    hf = instance.H.full_matrix()
    if gf.shape != hf.shape:
        raise ValueError("G and H dimension mismatch")
    acc = np.zeros_like(gf)
    for p, s in zip(instance.weights, instance.symmetries):
        sf = s.full_matrix()
        if sf.shape != gf.shape:
            raise ValueError("symmetry dimension mismatch")
        acc += p * (sf.conj().T @ hf @ sf)
    residual = float(np.max(np.abs(acc - instance.r * gf)))
    return residual < tol, residual


def solve_sep_weights(
    G: ProductOperator,
    H: ProductOperator,
    symmetries,
    tol: float = SEP_RESIDUAL_TOL,
) -> tuple[np.ndarray, float] | None:
    """Solve for (p, r) with p >= 0, sum p = 1 by nonnegative least squares.

    r is eliminated through the trace of the equation and recovered from the
    solution. Returns None when the best nonnegative solution leaves a residual
    above ``tol``.
    """
    symmetries = tuple(symmetries)
    if not symmetries:
        raise ValueError("empty symmetry list")
    gf = G.full_matrix()
    hf = H.full_matrix()
    tau = float(np.trace(gf).real)
    if tau <= 0:
        raise ValueError("G must have positive trace")
    cols = []
    traces = []
    for s in symmetries:
        a = s.full_matrix().conj().T @ hf @ s.full_matrix()
        t = float(np.trace(a).real)
        traces.append(t)
        cols.append((a - (t / tau) * gf).reshape(-1))
    c = np.stack(cols, axis=1)
    a_real = np.vstack([c.real, c.imag, 3.0 * np.ones((1, len(symmetries)))])
    b = np.zeros(a_real.shape[0])
    b[-1] = 3.0
    p, _ = nnls(a_real, b)
    total = p.sum()
    if total < 1e-12:
        return None
    p = p / total
    r = float(np.dot(p, traces) / tau)
    if r <= 0:
        return None
    ok, residual = verify_sep(SepInstance(G, H, r, symmetries, p), tol=tol)
    if not ok:
        return None
    return p, r


def build_povm(
    h: ProductOperator,
    g: ProductOperator,
    symmetries,
    weights,
    r: float,
) -> list[ProductOperator]:
    """POVM elements M_k = sqrt(p_k/r) h S_k g^-1 with a completeness check."""
    symmetries = tuple(symmetries)
    weights = np.asarray(weights, dtype=float)
    g_inv = g.inverse()
    big_g = positive_part(g)
    big_h = positive_part(h)
    ok, residual = verify_sep(SepInstance(big_g, big_h, r, symmetries, weights))
    if not ok:
        raise ValueError(f"weights do not satisfy the conversion equation (residual {residual:.3e})")
    povm = []
    for p, s in zip(weights, symmetries):
        factors = [hf @ sf @ gi for hf, sf, gi in zip(h.factors, s.factors, g_inv.factors)]
        factors[0] = math.sqrt(p / r) * factors[0]
        povm.append(ProductOperator(tuple(factors)))
    acc = sum(m.full_matrix().conj().T @ m.full_matrix() for m in povm)
    completeness = float(np.max(np.abs(acc - np.eye(acc.shape[0]))))
    if completeness > POVM_COMPLETENESS_TOL:
        raise AssertionError(f"POVM completeness residual {completeness:.3e} exceeds tolerance")
    return povm


def positive_part(op: ProductOperator) -> ProductOperator:
    """Factor-wise op^dag op."""
    return ProductOperator(tuple(f.conj().T @ f for f in op.factors))


@dataclass(frozen=True)
class BranchReport:
    outcome: int
    probability: float
    fidelity: float | None
    skipped: bool


def verify_conversion(
    povm,
    source: PureState,
    target: PureState,
    tol: float = 1e-9,
) -> tuple[bool, list[BranchReport]]:
    """Check that every POVM branch maps source onto target up to a phase."""
    reports = []
    ok = True
    total = 0.0
    for k, m in enumerate(povm):
        try:
            out, prob = apply_product(m, source)
        except ValueError:
            reports.append(BranchReport(k, 0.0, None, skipped=True))
            continue
        total += prob
        if prob < BRANCH_SKIP_PROB:
            reports.append(BranchReport(k, prob, None, skipped=True))
            continue
        f = fidelity(out, target)
        reports.append(BranchReport(k, prob, f, skipped=False))
        if f < 1.0 - tol:
            ok = False
    if abs(total - 1.0) > 1e-9:
        ok = False
    return ok, reports


# -- symmetry providers --------------------------------------------------------

def ghz_symmetries(z1: complex, z2: complex, flip: bool = False) -> ProductOperator:
    """A local symmetry of the three-qubit GHZ state.

    Returns P_z1 x P_z2 x P_z3 with z3 = 1/(z1 z2), composed with sigma_x^x3
    when ``flip`` is set. Every returned operator fixes |GHZ> exactly.
    """
    z1, z2 = complex(z1), complex(z2)
    if abs(z1) < 1e-14 or abs(z2) < 1e-14:
        raise ValueError("z arguments must be nonzero")
    z3 = 1.0 / (z1 * z2)
    factors = []
    for z in (z1, z2, z3):
        m = np.diag([z, 1.0 / z]).astype(complex)
        if flip:
            m = m @ PAULI["x"]
        factors.append(m)
    return ProductOperator(tuple(factors))


# -- synthesized four-qubit protocols -------------------------------------------

@dataclass(frozen=True)
class SynthesizedConversion:
    """A verified one-round protocol reaching h|seed> from an inequivalent state."""

    source: PureState
    target: PureState
    source_operator: ProductOperator
    sep: SepInstance
    povm: tuple
    protocol: LoccProtocol
    special_party: int
    axis: str | None


def _axis_projection(h_factor: np.ndarray, w: str) -> np.ndarray:
    """Positive part of the factor projected onto span{1, sigma_w}."""
    big = h_factor.conj().T @ h_factor
    ident = np.trace(big) / 2.0
    coef = np.trace(PAULI[w] @ big) / 2.0
    return ident.real * np.eye(2, dtype=complex) + coef.real * PAULI[w]


def synthesize_reach_protocol_4q(
    h: ProductOperator, params: GabcdParams
) -> SynthesizedConversion:
    """Build and verify the one-round protocol that prepares h|seed>.

    For a target whose non-special factors are axis-w, the source replaces the
    special factor by the axis-w projection of its positive part and the
    equation closes with symmetries {1, sigma_w^x4} at weights 1/2. When the
    non-special factors are all proportional to the identity, the source is the
    seed itself and the full four-element symmetry group is used at weights 1/4.
    """
    reachable, witness = is_reachable(h, params)
    if not reachable:
        raise ValueError("target operator is not reachable; no protocol exists")
    s_idx = witness.special_party - 1
    classes = [classify_factor(f) for f in h.factors]
    others_identity = all(
        classes[i].tag is FactorTag.PROPORTIONAL_IDENTITY for i in range(4) if i != s_idx
    )
    seed = seed_state(params)
    group = symmetry_group(params)

    if others_identity:
        symmetries = tuple(group)
        weights = np.full(4, 0.25)
        g_factors = [np.eye(2, dtype=complex) for _ in range(4)]
    else:
        w = witness.axis
        flip = ProductOperator.pauli_string(w * 4)
        symmetries = (ProductOperator.identity(4), flip)
        weights = np.array([0.5, 0.5])
        g_factors = []
        for i, f in enumerate(h.factors):
            if i == s_idx:
                proj = _axis_projection(f, w)
                if np.linalg.eigvalsh(proj).min() < 1e-12:
                    raise ValueError("axis projection of the special factor is singular")
                g_factors.append(psd_sqrt(proj))
            else:
                g_factors.append(psd_sqrt(f.conj().T @ f))

    g = ProductOperator(tuple(g_factors))
    # the special factor differs from its axis projection, so the states are
    # LU-inequivalent; double-checked numerically below
    if classify_factor(g.factors[s_idx]).is_axis_or_id(witness.axis) == classify_factor(
        h.factors[s_idx]
    ).is_axis_or_id(witness.axis):
        raise ValueError("special factor is already of axis form; states would be LU-equivalent")

    big_g = positive_part(g)
    big_h = positive_part(h)
    # the construction prescribes the weights; recover r from the trace
    gf, hf = big_g.full_matrix(), big_h.full_matrix()
    traces = [float(np.trace(s.full_matrix().conj().T @ hf @ s.full_matrix()).real)
              for s in symmetries]
    r = float(np.dot(weights, traces) / np.trace(gf).real)
    instance = SepInstance(big_g, big_h, r, symmetries, weights)
    ok, residual = verify_sep(instance)
    if not ok:
        raise AssertionError(
            f"constructed instance failed the weight equation (residual {residual:.3e})"
        )
    povm = build_povm(h, g, symmetries, weights, r)

    source, _ = apply_product(g, seed)
    target, _ = apply_product(h, seed)
    ok, reports = verify_conversion(povm, source, target)
    if not ok:
        raise AssertionError("synthesized POVM failed branch verification")
    if lu_equivalent(source, target, restarts=6, iters=40) is not None:
        raise AssertionError("source and target are LU-equivalent; synthesis is vacuous")

    protocol = _povm_to_protocol(povm, witness.special_party)
    return SynthesizedConversion(
        source=source,
        target=target,
        source_operator=g,
        sep=instance,
        povm=tuple(povm),
        protocol=protocol,
        special_party=witness.special_party,
        axis=None if others_identity else witness.axis,
    )


def _povm_to_protocol(povm, acting_party: int) -> LoccProtocol:
    """Split product POVM elements into a measurement plus unitary corrections."""
    n = povm[0].num_parties
    kraus = []
    corrections = []
    for m in povm:
        scale = 1.0
        row = []
        for i, f in enumerate(m.factors, start=1):
            if i == acting_party:
                row.append(np.eye(2, dtype=complex))
                continue
            p = f.conj().T @ f
            lam = float(np.trace(p).real / 2.0)
            if lam <= 0 or np.max(np.abs(p - lam * np.eye(2))) > 1e-9:
                raise ValueError(
                    f"factor for party {i} is not proportional to a unitary; "
                    "the element does not define a one-round protocol"
                )
            row.append(f / math.sqrt(lam))
            scale *= math.sqrt(lam)
        kraus.append(scale * m.factors[acting_party - 1])
        corrections.append(tuple(row))
    return LoccProtocol(
        acting_party=acting_party,
        kraus_ops=tuple(kraus),
        corrections=tuple(corrections),
        dims=(2,) * n,
    )
