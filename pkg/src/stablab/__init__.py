"""Ulam-stability machinery for T(xy) = psi(T x, T y) on finite-dimensional normed algebras."""

from .algebra import (
    Algebra,
    L1Weighted,
    LInf,
    SpectralMatrix,
    cyclic_algebra,
    element_norm,
    extreme_points,
    group_algebra,
    make_algebra,
    matrix_algebra,
    multiply,
    pointwise_algebra,
    symmetric_group_algebra,
)
from .defects import (
    BilinearMap,
    LinearOp,
    MultilinearMap,
    NormEstimate,
    TrilinearMap,
    adef,
    coboundary,
    delta2,
    derivative_apply,
    identity_op,
    linear_op,
    mdef,
    multilinear_norm,
    multiplication_map,
    vee,
)
from .newton import (
    Instance,
    IterationConfig,
    IterationTrace,
    Outcome,
    J_apply,
    constants,
    delta_threshold,
    improve,
    schedule,
    stabilize,
    theta_from_eta,
    verify_bounds,
)
from .tensor import DiagonalRep, TensorRep, group_diagonal, matrix_diagonal, validate_diagonal

__version__ = "0.1.0"

__all__ = [
    "adef",
    "Algebra",
    "BilinearMap",
    "coboundary",
    "constants",
    "cyclic_algebra",
    "delta2",
    "delta_threshold",
    "derivative_apply",
    "DiagonalRep",
    "element_norm",
    "extreme_points",
    "group_algebra",
    "group_diagonal",
    "identity_op",
    "improve",
    "Instance",
    "IterationConfig",
    "IterationTrace",
    "J_apply",
    "L1Weighted",
    "linear_op",
    "LinearOp",
    "LInf",
    "make_algebra",
    "matrix_algebra",
    "matrix_diagonal",
    "mdef",
    "multilinear_norm",
    "MultilinearMap",
    "multiplication_map",
    "multiply",
    "NormEstimate",
    "Outcome",
    "pointwise_algebra",
    "schedule",
    "SpectralMatrix",
    "stabilize",
    "symmetric_group_algebra",
    "TensorRep",
    "theta_from_eta",
    "TrilinearMap",
    "validate_diagonal",
    "vee",
    "verify_bounds",
]
