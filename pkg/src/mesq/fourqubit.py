"""Generic four-qubit SLOCC family: seed states, genericity conditions, the
Pauli-string symmetry group, and the reachability/convertibility predicates
that decide membership and isolation in the four-qubit maximally entangled set.
"""

from __future__ import annotations

import enum
import itertools
import warnings
from dataclasses import dataclass

import numpy as np

from .core import ProductOperator, PureState, apply_product, fidelity, pauli_components

GENERICITY_TOL = 1e-10
AXIS_TOL = 1e-10
SYMMETRY_FIDELITY_TOL = 1e-10

AXES = ("x", "y", "z")


@dataclass(frozen=True)
class GabcdParams:
    """Four complex parameters selecting a generic four-qubit SLOCC class."""

    a: complex
    b: complex
    c: complex
    d: complex

    def as_tuple(self) -> tuple[complex, complex, complex, complex]:
        return (complex(self.a), complex(self.b), complex(self.c), complex(self.d))


def seed_state(params: GabcdParams) -> PureState:
    """Normalized four-qubit representative state for the given parameters."""
    a, b, c, d = params.as_tuple()
    if max(abs(a), abs(b), abs(c), abs(d)) < 1e-14:
        raise ValueError("all four parameters are zero")
    amps = np.zeros(16, dtype=complex)
    amps[0b0000] = amps[0b1111] = (a + d) / 2
    amps[0b0011] = amps[0b1100] = (a - d) / 2
    amps[0b0101] = amps[0b1010] = (b + c) / 2
    amps[0b0110] = amps[0b1001] = (b - c) / 2
    return PureState.normalized(amps)


def _multiset_close(xs, ys, tol: float) -> bool:
    for perm in itertools.permutations(range(len(ys))):
        if all(abs(x - ys[p]) <= tol for x, p in zip(xs, perm)):
            return True
    return False


def is_generic(params: GabcdParams, tol: float = GENERICITY_TOL) -> tuple[bool, list[str]]:
    """Evaluate the genericity clauses; returns (verdict, violated conditions)."""
    a, b, c, d = params.as_tuple()
    sq = {"a": a * a, "b": b * b, "c": c * c, "d": d * d}
    violations = []
    for u, v in (("b", "c"), ("c", "d"), ("d", "b")):
        if abs(sq[u] - sq[v]) <= tol:
            violations.append(f"{u}^2 = {v}^2")
    for v in ("b", "c", "d"):
        if abs(sq["a"] - sq[v]) <= tol:
            violations.append(f"a^2 = {v}^2")
    # scaling clause: no q != 1 maps the squared multiset onto itself
    values = list(sq.values())
    candidates = set()
    for x in values:
        for y in values:
            if abs(y) > tol:
                q = x / y
                if abs(q - 1.0) > tol:
                    candidates.add(complex(round(q.real, 12), round(q.imag, 12)))
    for q in candidates:
        if _multiset_close([q * v for v in values], values, tol):
            violations.append(f"multiset invariant under scaling q={q}")
            break
    return (not violations, violations)


def symmetry_group(params: GabcdParams) -> list[ProductOperator]:
    """The four Pauli-string symmetries fixing the seed state of generic parameters."""
    ok, violations = is_generic(params)
    if not ok:
        raise ValueError(f"parameters are not generic ({'; '.join(violations)}); "
                         "the symmetry group would be larger")
    seed = seed_state(params)
    group = [ProductOperator.identity(4)]
    for w in AXES:
        group.append(ProductOperator.pauli_string(w * 4))
    for s in group:
        out, _ = apply_product(s, seed)
        if fidelity(out, seed) < 1.0 - SYMMETRY_FIDELITY_TOL:
            raise AssertionError(f"symmetry candidate failed to fix the seed state")
    return group


class FactorTag(enum.Enum):
    PROPORTIONAL_IDENTITY = "proportional_identity"
    AXIS = "axis"
    GENERIC = "generic"


@dataclass(frozen=True)
class FactorClass:
    """Classification of a local operator by its trace-normalized positive part."""

    tag: FactorTag
    axis: str | None = None
    gamma: float | None = None
    components: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def is_axis_or_id(self, w: str) -> bool:
        """True when the positive part has the form 1/2 + gamma*sigma_w, gamma = 0 allowed."""
        return self.tag is FactorTag.PROPORTIONAL_IDENTITY or (
            self.tag is FactorTag.AXIS and self.axis == w
        )


def classify_factor(op: np.ndarray, tol: float = AXIS_TOL) -> FactorClass:
    """Classify op via P = op^dag op normalized to trace 1, P = 1/2 + v . sigma."""
    op = np.asarray(op, dtype=complex)
    if abs(np.linalg.det(op)) < 1e-12:
        raise ValueError("singular local operator")
    p = op.conj().T @ op
    p = p / np.trace(p).real
    _, cx, cy, cz = pauli_components(p)
    v = np.array([cx.real, cy.real, cz.real])
    mags = np.abs(v)
    if np.any((mags > tol / 10) & (mags < tol * 10)):
        warnings.warn(
            "factor has Pauli components near the axis-detection threshold; "
            "classifying as computed but the tag is numerically borderline",
            stacklevel=2,
        )
    above = mags > tol
    if not above.any():
        return FactorClass(FactorTag.PROPORTIONAL_IDENTITY, components=tuple(v))
    if above.sum() == 1:
        k = int(np.argmax(mags))
        return FactorClass(FactorTag.AXIS, axis=AXES[k], gamma=float(v[k]), components=tuple(v))
    return FactorClass(FactorTag.GENERIC, components=tuple(v))


@dataclass(frozen=True)
class PredicateWitness:
    special_party: int
    axis: str


def _require_generic(params: GabcdParams):
    ok, violations = is_generic(params)
    if not ok:
        raise ValueError(f"parameters are not generic: {'; '.join(violations)}")


def is_reachable(
    h: ProductOperator, params: GabcdParams
) -> tuple[bool, PredicateWitness | None]:
    """Can h|seed> be reached deterministically from an LU-inequivalent state?

    True iff, for some party s and axis w, every other factor's positive part is
    of the form 1/2 + gamma*sigma_w (gamma = 0 allowed) while party s's is not.
    """
    _require_generic(params)
    if h.num_parties != 4:
        raise ValueError("expected a four-party operator")
    classes = [classify_factor(f) for f in h.factors]
    for s in range(4):
        for w in AXES:
            others = [classes[i].is_axis_or_id(w) for i in range(4) if i != s]
            if all(others) and not classes[s].is_axis_or_id(w):
                return True, PredicateWitness(special_party=s + 1, axis=w)
    return False, None


def is_convertible(
    g: ProductOperator, params: GabcdParams
) -> tuple[bool, PredicateWitness | None]:
    """Can g|seed> be converted deterministically to an LU-inequivalent state?

    True iff, for some party s and axis w, every other factor is axis-w or
    proportional to the identity; the factor at s is arbitrary.
    """
    _require_generic(params)
    if g.num_parties != 4:
        raise ValueError("expected a four-party operator")
    classes = [classify_factor(f) for f in g.factors]
    for s in range(4):
        for w in AXES:
            if all(classes[i].is_axis_or_id(w) for i in range(4) if i != s):
                return True, PredicateWitness(special_party=s + 1, axis=w)
    return False, None


class Mes4Status(enum.Enum):
    REACHABLE_NOT_IN_MES = "reachable_not_in_mes"
    ISOLATED_IN_MES = "isolated_in_mes"
    NON_ISOLATED_IN_MES = "non_isolated_in_mes"


@dataclass(frozen=True)
class Mes4Certificate:
    status: Mes4Status
    reachable_witness: PredicateWitness | None
    convertible_witness: PredicateWitness | None
    factor_classes: tuple[FactorClass, ...]


def mes4_status(g: ProductOperator, params: GabcdParams) -> Mes4Certificate:
    """MES membership/isolation verdict for the state g|seed>."""
    reach, rw = is_reachable(g, params)
    conv, cw = is_convertible(g, params)
    classes = tuple(classify_factor(f) for f in g.factors)
    if reach:
        status = Mes4Status.REACHABLE_NOT_IN_MES
    elif conv:
        status = Mes4Status.NON_ISOLATED_IN_MES
    else:
        status = Mes4Status.ISOLATED_IN_MES
    return Mes4Certificate(status, rw, cw, classes)
