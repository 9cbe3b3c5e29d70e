"""SVD-based periodicity detection and outlier analysis for 1-D time series."""

from cyclesvd.linalg import (
    SvdConvergenceError,
    SvdResult,
    add_scalar,
    as_matrix,
    frobenius_norm,
    matmul,
    scale,
    singular_values_via_gram,
    svd,
    transpose,
)

__version__ = "0.1.0"

__all__ = [
    "SvdConvergenceError",
    "SvdResult",
    "add_scalar",
    "as_matrix",
    "frobenius_norm",
    "matmul",
    "scale",
    "singular_values_via_gram",
    "svd",
    "transpose",
    "__version__",
]
