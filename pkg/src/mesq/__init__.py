"""Few-qubit entanglement manipulation toolkit.

Implements the deterministic-LOCC order on bipartite pure states, maximally
entangled set membership for three and generic four qubits, a separable-map
conversion engine with explicit POVM construction, and the six-qubit resource
protocol that prepares arbitrary three-qubit states.
"""

from .core import (
    DensityMatrix,
    ProductOperator,
    PureState,
    apply_on,
    apply_product,
    fidelity,
    ghz_state,
    lu_equivalent,
    plus_state,
    projective_measure,
    reduced_density,
    w_state,
)

__all__ = [
    "DensityMatrix",
    "ProductOperator",
    "PureState",
    "apply_on",
    "apply_product",
    "fidelity",
    "ghz_state",
    "lu_equivalent",
    "plus_state",
    "projective_measure",
    "reduced_density",
    "w_state",
]

__version__ = "0.1.0"
