"""Dense complex linear algebra for few-qubit pure states.

Conventions used by every module in this package:

* Parties are labelled 1..n and party 1 is the most significant bit of the
  amplitude index, i.e. ``amplitudes[0b10] == <10|psi>`` pairs party 1 with
  the leading bit.
* States are compared up to a global phase: two states are "equal" when
  ``fidelity(a, b) >= 1 - tol`` with ``tol = 1e-9`` by default.
* All values are immutable after construction and every operation is a pure
  function; random number generators are always passed explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NORM_ATOL = 1e-12
HERMITIAN_ATOL = 1e-12
PSD_ATOL = 1e-10
TRACE_ATOL = 1e-12
UNITARY_ATOL = 1e-12
BASIS_ORTHO_ATOL = 1e-10
FORCED_BRANCH_MIN_PROB = 1e-14
PHASE_EQUAL_TOL = 1e-9

SQRT2_INV = 1.0 / math.sqrt(2.0)

PAULI = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _frozen_array(a, shape=None) -> np.ndarray:
    arr = np.array(a, dtype=complex)
    if shape is not None and arr.shape != shape:
        raise ValueError(f"expected array of shape {shape}, got {arr.shape}")
    if not (np.all(np.isfinite(arr.real)) and np.all(np.isfinite(arr.imag))):
        raise ValueError("array contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PureState:
    """Normalized pure state of ``num_qubits`` qubits as a flat amplitude vector."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("num_qubits must be positive")
        amps = _frozen_array(np.asarray(self.amplitudes).reshape(-1))
        if amps.size != 2 ** self.num_qubits:
            raise ValueError(
                f"amplitude vector has length {amps.size}, expected {2 ** self.num_qubits}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"state norm {norm} deviates from 1 beyond tolerance")
        if abs(norm - 1.0) > NORM_ATOL:
            amps = _frozen_array(amps / norm)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, amplitudes) -> "PureState":
        """Build a state from an arbitrary nonzero vector, rescaling to unit norm."""
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n = int(round(math.log2(amps.size)))
        if 2**n != amps.size:
            raise ValueError("amplitude vector length must be a power of 2")
        norm = np.linalg.norm(amps)
        if norm < 1e-14:
            raise ValueError("cannot normalize a zero vector")
        return cls(n, amps / norm)

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per party (party i -> axis i-1)."""
        return self.amplitudes.reshape([2] * self.num_qubits)


@dataclass(frozen=True)
class ProductOperator:
    """Tensor product of one 2x2 operator per party."""

    factors: tuple

    def __post_init__(self):
        facs = tuple(_frozen_array(f, shape=(2, 2)) for f in self.factors)
        if not facs:
            raise ValueError("ProductOperator needs at least one factor")
        object.__setattr__(self, "factors", facs)

    @property
    def num_parties(self) -> int:
        return len(self.factors)

    @classmethod
    def identity(cls, n: int) -> "ProductOperator":
        return cls(tuple(np.eye(2, dtype=complex) for _ in range(n)))

    @classmethod
    def pauli_string(cls, letters: str) -> "ProductOperator":
        """e.g. ``pauli_string("xixz")`` for sigma_x x 1 x sigma_x x sigma_z."""
        return cls(tuple(PAULI[c] for c in letters.lower()))

    @classmethod
    def single(cls, n: int, party: int, factor) -> "ProductOperator":
        """Operator acting as ``factor`` on ``party`` (1-based) and identity elsewhere."""
        facs = [np.eye(2, dtype=complex) for _ in range(n)]
        facs[party - 1] = np.asarray(factor, dtype=complex)
        return cls(tuple(facs))

    def dagger(self) -> "ProductOperator":
        return ProductOperator(tuple(f.conj().T for f in self.factors))

    def inverse(self) -> "ProductOperator":
        invs = []
        for k, f in enumerate(self.factors):
            if abs(np.linalg.det(f)) < 1e-14:
                raise ValueError(f"factor for party {k + 1} is singular")
            invs.append(np.linalg.inv(f))
        return ProductOperator(tuple(invs))

    def compose(self, other: "ProductOperator") -> "ProductOperator":
        """Factor-wise matrix product ``self @ other`` (other acts first)."""
        if self.num_parties != other.num_parties:
            raise ValueError("party count mismatch")
        return ProductOperator(tuple(a @ b for a, b in zip(self.factors, other.factors)))

    def full_matrix(self) -> np.ndarray:
        m = self.factors[0]
        for f in self.factors[1:]:
            m = np.kron(m, f)
        return m


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix."""

    dim: int
    entries: np.ndarray

    def __post_init__(self):
        ent = _frozen_array(self.entries, shape=(self.dim, self.dim))
        if np.max(np.abs(ent - ent.conj().T)) > HERMITIAN_ATOL:
            raise ValueError("density matrix is not Hermitian within tolerance")
        if abs(np.trace(ent).real - 1.0) > TRACE_ATOL or abs(np.trace(ent).imag) > TRACE_ATOL:
            raise ValueError("density matrix trace deviates from 1")
        eigs = np.linalg.eigvalsh(ent)
        if eigs.min() < -PSD_ATOL:
            raise ValueError(f"density matrix has negative eigenvalue {eigs.min()}")
        object.__setattr__(self, "entries", ent)

    @classmethod
    def from_pure(cls, state: PureState) -> "DensityMatrix":
        v = state.amplitudes
        return cls(v.size, np.outer(v, v.conj()))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)


# -- state constructors ------------------------------------------------------

def basis_state(num_qubits: int, bits: str) -> PureState:
    amps = np.zeros(2**num_qubits, dtype=complex)
    amps[int(bits, 2)] = 1.0
    return PureState(num_qubits, amps)


def plus_state(num_qubits: int) -> PureState:
    d = 2**num_qubits
    return PureState(num_qubits, np.full(d, 1.0 / math.sqrt(d), dtype=complex))


def ghz_state(num_qubits: int = 3) -> PureState:
    amps = np.zeros(2**num_qubits, dtype=complex)
    amps[0] = amps[-1] = SQRT2_INV
    return PureState(num_qubits, amps)


def w_state() -> PureState:
    amps = np.zeros(8, dtype=complex)
    amps[0b100] = amps[0b010] = amps[0b001] = 1.0 / math.sqrt(3.0)
    return PureState(3, amps)


# -- gate constructors -------------------------------------------------------

def pauli(w: str) -> np.ndarray:
    return PAULI[w.lower()].copy()


def hadamard() -> np.ndarray:
    return SQRT2_INV * np.array([[1, 1], [1, -1]], dtype=complex)


def z_rot(alpha: float) -> np.ndarray:
    """exp(i*alpha*sigma_z) = diag(e^{i alpha}, e^{-i alpha})."""
    return np.diag([np.exp(1j * alpha), np.exp(-1j * alpha)]).astype(complex)


def y_rot(beta: float) -> np.ndarray:
    """exp(i*beta*sigma_y), a real rotation matrix."""
    c, s = math.cos(beta), math.sin(beta)
    return np.array([[c, s], [-s, c]], dtype=complex)


def x_rot(theta: float) -> np.ndarray:
    """exp(i*theta*sigma_x)."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, 1j * s], [1j * s, c]], dtype=complex)


def t2_gate() -> np.ndarray:
    """exp(i pi/4 sigma_y) Z(pi/4) H."""
    return y_rot(math.pi / 4) @ z_rot(math.pi / 4) @ hadamard()


def t3_gate() -> np.ndarray:
    """exp(-i pi/4 sigma_x) Z(-pi/4) H."""
    return x_rot(-math.pi / 4) @ z_rot(-math.pi / 4) @ hadamard()


def cz_gate() -> np.ndarray:
    """|0><0| x 1 + |1><1| x sigma_z."""
    return np.diag([1, 1, 1, -1]).astype(complex)


def phase_string_gate(alpha: float, num_targets: int) -> np.ndarray:
    """exp(i*alpha * sigma_z x ... x sigma_z) on ``num_targets`` qubits (diagonal)."""
    signs = np.array(
        [(-1) ** bin(k).count("1") for k in range(2**num_targets)], dtype=float
    )
    return np.diag(np.exp(1j * alpha * signs))


_GATE_BUILDERS = {
    "pauli": lambda w: (pauli(w), 1),
    "hadamard": lambda: (hadamard(), 1),
    "z": lambda alpha: (z_rot(alpha), 1),
    "yrot": lambda beta: (y_rot(beta), 1),
    "xrot": lambda theta: (x_rot(theta), 1),
    "t2": lambda: (t2_gate(), 1),
    "t3": lambda: (t3_gate(), 1),
    "cz": lambda: (cz_gate(), 2),
    "phase": lambda alpha, num_targets: (
        phase_string_gate(alpha, num_targets),
        num_targets,
    ),
}


def build_gate(kind: str, **params) -> tuple[np.ndarray, int]:
    """Return ``(unitary, arity)`` for a named gate kind.

    Kinds: ``pauli(w=..)``, ``hadamard``, ``z(alpha=..)``, ``yrot(beta=..)``,
    ``xrot(theta=..)``, ``t2``, ``t3``, ``cz``, ``phase(alpha=.., num_targets=..)``.
    """
    try:
        builder = _GATE_BUILDERS[kind]
    except KeyError:
        raise ValueError(f"unknown gate kind {kind!r}") from None
    matrix, arity = builder(**params)
    err = np.max(np.abs(matrix.conj().T @ matrix - np.eye(matrix.shape[0])))
    if err > UNITARY_ATOL:
        raise AssertionError(f"gate {kind} failed unitarity check ({err})")
    return matrix, arity


# -- applying operators ------------------------------------------------------

def _check_parties(num_qubits: int, parties) -> list[int]:
    parties = list(parties)
    if not parties:
        raise ValueError("empty party list")
    if len(set(parties)) != len(parties):
        raise ValueError("duplicate party index")
    for p in parties:
        if not 1 <= p <= num_qubits:
            raise ValueError(f"party index {p} outside 1..{num_qubits}")
    return parties


def apply_on(state: PureState, unitary: np.ndarray, parties) -> PureState:
    """Apply a unitary acting on the given parties (1-based, in the given order)."""
    parties = _check_parties(state.num_qubits, parties)
    k = len(parties)
    u = np.asarray(unitary, dtype=complex)
    if u.shape != (2**k, 2**k):
        raise ValueError(f"unitary shape {u.shape} does not match {k} target parties")
    axes = [p - 1 for p in parties]
    t = np.moveaxis(state.tensor(), axes, range(k))
    rest = t.shape[k:]
    t = u @ t.reshape(2**k, -1)
    t = np.moveaxis(t.reshape([2] * k + list(rest)), range(k), axes)
    return PureState(state.num_qubits, t.reshape(-1))


def apply_product(
    op: ProductOperator, state: PureState, renormalize: bool = True
) -> tuple[PureState, float]:
    """Apply a product operator; returns the state and the pre-normalization squared norm.

    With ``renormalize=False`` the operator must be norm-preserving, since the
    returned state is always normalized.
    """
    if op.num_parties != state.num_qubits:
        raise ValueError(
            f"operator has {op.num_parties} factors for a {state.num_qubits}-qubit state"
        )
    t = state.tensor()
    for axis, f in enumerate(op.factors):
        t = np.moveaxis(np.tensordot(f, t, axes=([1], [axis])), 0, axis)
    vec = t.reshape(-1)
    sq_norm = float(np.vdot(vec, vec).real)
    if sq_norm < 1e-28:
        raise ValueError("product operator destroyed the state (zero output vector)")
    if renormalize:
        vec = vec / math.sqrt(sq_norm)
    elif abs(sq_norm - 1.0) > 1e-9:
        raise ValueError(
            "renormalize=False requires a norm-preserving operator "
            f"(squared norm was {sq_norm})"
        )
    return PureState(state.num_qubits, vec), sq_norm


def reduced_density(state: PureState, keep) -> DensityMatrix:
    """Partial trace keeping the listed parties (1-based), ordered ascending."""
    keep = sorted(_check_parties(state.num_qubits, keep))
    t = state.tensor()
    drop = [p - 1 for p in range(1, state.num_qubits + 1) if p not in keep]
    rho = np.tensordot(t, t.conj(), axes=(drop, drop))
    d = 2 ** len(keep)
    return DensityMatrix(d, rho.reshape(d, d))


def fidelity(a: PureState, b: PureState) -> float:
    """|<a|b>|^2; equals 1 iff the states agree up to a global phase."""
    if a.num_qubits != b.num_qubits:
        raise ValueError("qubit count mismatch")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def states_equal(a: PureState, b: PureState, tol: float = PHASE_EQUAL_TOL) -> bool:
    return fidelity(a, b) >= 1.0 - tol


# -- measurement -------------------------------------------------------------

@dataclass(frozen=True)
class MeasureResult:
    outcome: int
    probability: float
    post_state: PureState


def projective_measure(
    state: PureState,
    party: int,
    basis,
    forced_outcome: int | None = None,
    rng: np.random.Generator | None = None,
) -> MeasureResult:
    """Measure one party in an orthonormal 1-qubit basis ``(b0, b1)``.

    The measured party is removed from the register; remaining parties keep
    their relative order. With ``forced_outcome`` the branch is selected
    deterministically and its true Born probability is returned.
    """
    _check_parties(state.num_qubits, [party])
    if state.num_qubits == 1:
        raise ValueError("cannot remove the last remaining qubit")
    b = np.column_stack([np.asarray(v, dtype=complex).reshape(2) for v in basis])
    if np.max(np.abs(b.conj().T @ b - np.eye(2))) > BASIS_ORTHO_ATOL:
        raise ValueError("measurement basis is not orthonormal within tolerance")
    t = state.tensor()
    branches = []
    for k in range(2):
        post = np.tensordot(b[:, k].conj(), t, axes=([0], [party - 1]))
        prob = float(np.vdot(post, post).real)
        branches.append((prob, post))
    probs = np.array([branches[0][0], branches[1][0]])
    if forced_outcome is not None:
        outcome = int(forced_outcome)
        if outcome not in (0, 1):
            raise ValueError("forced outcome must be 0 or 1")
        if probs[outcome] < FORCED_BRANCH_MIN_PROB:
            raise ValueError(
                f"forced outcome {outcome} has vanishing probability {probs[outcome]}"
            )
    else:
        gen = rng if rng is not None else np.random.default_rng(0)
        outcome = int(gen.random() < probs[1])
    prob, post = branches[outcome]
    post = post / math.sqrt(prob)
    return MeasureResult(outcome, prob, PureState(state.num_qubits - 1, post.reshape(-1)))


# -- random sampling helpers -------------------------------------------------

def random_state(num_qubits: int, rng: np.random.Generator) -> PureState:
    z = rng.standard_normal(2**num_qubits) + 1j * rng.standard_normal(2**num_qubits)
    return PureState.normalized(z)


def random_unitary(rng: np.random.Generator, dim: int = 2) -> np.ndarray:
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_invertible(
    rng: np.random.Generator, s_min: float = 0.5, s_max: float = 2.0
) -> np.ndarray:
    """Random invertible 2x2 with singular values bounded in [s_min, s_max]."""
    s = rng.uniform(s_min, s_max, size=2)
    return random_unitary(rng) @ np.diag(s).astype(complex) @ random_unitary(rng)


def random_product_unitary(n: int, rng: np.random.Generator) -> ProductOperator:
    return ProductOperator(tuple(random_unitary(rng) for _ in range(n)))


def random_product_invertible(
    n: int, rng: np.random.Generator, s_min: float = 0.5, s_max: float = 2.0
) -> ProductOperator:
    return ProductOperator(tuple(random_invertible(rng, s_min, s_max) for _ in range(n)))


# -- positive 2x2 helpers ----------------------------------------------------

def psd_sqrt(m: np.ndarray) -> np.ndarray:
    """Principal square root of a positive semidefinite matrix."""
    vals, vecs = np.linalg.eigh(np.asarray(m, dtype=complex))
    if vals.min() < -PSD_ATOL:
        raise ValueError(f"matrix is not PSD (eigenvalue {vals.min()})")
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.conj().T


def pauli_components(m: np.ndarray) -> tuple[complex, complex, complex, complex]:
    """Coefficients (c_i, c_x, c_y, c_z) of m = c_i*1 + c_x*sx + c_y*sy + c_z*sz."""
    m = np.asarray(m, dtype=complex)
    return tuple(np.trace(PAULI[w] @ m) / 2.0 for w in "ixyz")


# -- numeric local-unitary equivalence ---------------------------------------

def _overlap_matrix(b_tensor: np.ndarray, a_tensor: np.ndarray, axis: int, n: int):
    axes = [i for i in range(n) if i != axis]
    return np.tensordot(b_tensor.conj(), a_tensor, axes=(axes, axes))


def _alternating_lu_search(a: PureState, b: PureState, us: list, iters: int) -> float:
    at, bt = a.tensor(), b.tensor()
    n = a.num_qubits
    best = 0.0
    for _ in range(iters):
        for i in range(n):
            cur = at
            for j in range(n):
                if j != i:
                    cur = np.moveaxis(np.tensordot(us[j], cur, axes=([1], [j])), 0, j)
            m = _overlap_matrix(bt, cur, i, n)
            w, _, vh = np.linalg.svd(m.T)
            us[i] = (w @ vh).conj().T
        val = at
        for j in range(n):
            val = np.moveaxis(np.tensordot(us[j], val, axes=([1], [j])), 0, j)
        f = abs(np.vdot(bt.reshape(-1), val.reshape(-1))) ** 2
        if f <= best + 1e-15:
            best = max(best, f)
            break
        best = f
    return best


def _diag_phase_ascent(at: np.ndarray, bt: np.ndarray, n: int, iters: int = 100):
    """Best diagonal-unitary product matching at to bt (states in local eigenbases)."""
    phases = [np.ones(2, dtype=complex) for _ in range(n)]
    for _ in range(iters):
        improved = False
        for i in range(n):
            cur = at
            for j in range(n):
                if j != i:
                    cur = np.moveaxis(cur, j, 0)
                    cur = np.moveaxis((cur.T * phases[j]).T, 0, j)
            m = _overlap_matrix(bt, cur, i, n)
            diag = np.diagonal(m)
            new = np.where(np.abs(diag) > 1e-15, diag.conj() / np.abs(diag), phases[i])
            if np.max(np.abs(new - phases[i])) > 1e-13:
                improved = True
            phases[i] = new
        if not improved:
            break
    return [np.diag(p) for p in phases]


def lu_equivalent(
    a: PureState,
    b: PureState,
    tol: float = PHASE_EQUAL_TOL,
    rng: np.random.Generator | None = None,
    restarts: int = 24,
    iters: int = 60,
) -> ProductOperator | None:
    """Search for single-qubit unitaries U_1 x ... x U_n mapping ``a`` onto ``b``.

    Non-degenerate local spectra give candidate unitaries directly from the
    eigenbases, with the leftover diagonal phases resolved by coordinate
    ascent; degenerate spectra fall back to alternating optimization from
    random starts. Returns a witness ProductOperator with
    ``fidelity(U a, b) >= 1 - tol``, or ``None`` if the bounded search fails.
    Failure is not a proof of inequivalence; a mismatch of local spectra,
    however, rules equivalence out and short-circuits the search.
    """
    if a.num_qubits != b.num_qubits:
        raise ValueError("qubit count mismatch")
    n = a.num_qubits
    gen = rng if rng is not None else np.random.default_rng(0)

    spectra_gap = 0.0
    basis_a, basis_b = [], []
    for p in range(1, n + 1):
        ea, va = np.linalg.eigh(reduced_density(a, [p]).entries)
        eb, vb = np.linalg.eigh(reduced_density(b, [p]).entries)
        spectra_gap = max(spectra_gap, float(np.max(np.abs(ea - eb))))
        basis_a.append(va)
        basis_b.append(vb)
    if spectra_gap > 10.0 * math.sqrt(max(tol, 1e-16)) + 1e-10:
        return None

    # candidate from eigenbasis matching, diagonal phases resolved separately
    at = a.tensor()
    bt = b.tensor()
    for j in range(n):
        at = np.moveaxis(np.tensordot(basis_a[j].conj().T, at, axes=([1], [j])), 0, j)
        bt = np.moveaxis(np.tensordot(basis_b[j].conj().T, bt, axes=([1], [j])), 0, j)
    diags = _diag_phase_ascent(at, bt, n)
    candidates = [basis_b[j] @ diags[j] @ basis_a[j].conj().T for j in range(n)]

    starts = [candidates, [np.eye(2, dtype=complex) for _ in range(n)]]
    for _ in range(restarts):
        starts.append([random_unitary(gen) for _ in range(n)])

    best_f, best_us = -1.0, None
    for start in starts:
        us = [u.copy() for u in start]
        f = _alternating_lu_search(a, b, us, iters)
        if f > best_f:
            best_f, best_us = f, [u.copy() for u in us]
        if best_f >= 1.0 - tol:
            break
    if best_f < 1.0 - tol:
        return None
    cleaned = []
    for u in best_us:
        w, _, vh = np.linalg.svd(u)
        cleaned.append(w @ vh)
    witness = ProductOperator(tuple(cleaned))
    out, _ = apply_product(witness, a)
    if fidelity(out, b) < 1.0 - tol:
        return None
    return witness
