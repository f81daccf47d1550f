"""Distance of bipartite unitaries to local product gates, and UBB pairs."""

__version__ = "0.1.0"

from .linalg import (  # noqa: E402
    BipartiteGate,
    ConvergenceError,
    DomainError,
    ShapeError,
    hs_inner,
    hs_norm,
    nearest_unitary,
    partial_trace,
    realign,
    trace_norm,
    vectorize,
    devectorize,
)
from .gates import GateFamilySpec  # noqa: E402
from .measures import kd_bounds, operator_schmidt  # noqa: E402
from .kd import KdResult, kd_alternating, kd_closed_form, kd_two_qubit  # noqa: E402
from .ubb import UbbTrace, detect_cycle, ubb_find, ubb_solve  # noqa: E402

__all__ = [
    "BipartiteGate",
    "ConvergenceError",
    "DomainError",
    "ShapeError",
    "GateFamilySpec",
    "KdResult",
    "UbbTrace",
    "detect_cycle",
    "devectorize",
    "hs_inner",
    "hs_norm",
    "kd_alternating",
    "kd_bounds",
    "kd_closed_form",
    "kd_two_qubit",
    "nearest_unitary",
    "operator_schmidt",
    "partial_trace",
    "realign",
    "trace_norm",
    "ubb_find",
    "ubb_solve",
    "vectorize",
]
