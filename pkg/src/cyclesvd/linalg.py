"""Dense real matrix helpers and a self-contained SVD.

The SVD uses one-sided Jacobi rotations (cyclic sweeps over column pairs),
which is accurate and fully deterministic for the desk-scale matrices this
package handles.  No library SVD/eigen solver is called anywhere on the
factorization path; ``singular_values_via_gram`` exists only as an
independent cross-check for tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

DEFAULT_TOLERANCE = 1e-12
MAX_SWEEPS = 60

# Columns whose singular value falls below _RANK_EPS * sigma_1 have no
# numerically meaningful direction; their U (or V) column is rebuilt by
# basis completion instead of normalization.
_RANK_EPS = 2.22e-16


class SvdConvergenceError(RuntimeError):
    """Jacobi sweeps did not converge within the iteration cap."""

    def __init__(self, message: str, iterations: int):
        super().__init__(message)
        self.iterations = iterations


def as_matrix(data, copy: bool = True) -> np.ndarray:
    """Validate and return a 2-D float64 matrix with finite entries."""
    a = np.array(data, dtype=np.float64, copy=copy)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={a.ndim}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"matrix dimensions must be positive, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite (no NaN/Inf)")
    return a


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product with an explicit dimension check."""
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul shape mismatch: {a.shape} @ {b.shape}")
    return a @ b


def transpose(a: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(a.T)


def scale(a: np.ndarray, alpha: float) -> np.ndarray:
    """Entrywise multiplication by ``alpha``; sigma_i scale by |alpha|."""
    return a * float(alpha)


def add_scalar(a: np.ndarray, alpha: float) -> np.ndarray:
    """Shift every entry by ``alpha`` (adds a rank-1 all-ones component)."""
    return a + float(alpha)


def frobenius_norm(a: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.asarray(a, dtype=np.float64) ** 2)))


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD ``a = u @ diag(s) @ v.T`` with r = min(p, q) columns.

    Columns of u and v are orthonormal, s is non-negative and descending,
    and each u column has its largest-magnitude entry non-negative (the
    matching v column is flipped to compensate), making results bit-stable.
    """

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray
    iterations: int
    tolerance_used: float


@njit(cache=True)
def _jacobi_sweeps(bt, vt, tol, max_sweeps):  # pragma: no cover - jitted
    # bt holds the working columns as contiguous rows (n x m); vt likewise
    # accumulates the right rotations (n x n).  Returns (sweeps, converged).
    n, m = bt.shape
    sweeps = 0
    while sweeps < max_sweeps:
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                alpha = 0.0
                beta = 0.0
                gamma = 0.0
                for k in range(m):
                    bi = bt[i, k]
                    bj = bt[j, k]
                    alpha += bi * bi
                    beta += bj * bj
                    gamma += bi * bj
                if abs(gamma) <= tol * math.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                for k in range(m):
                    bi = bt[i, k]
                    bj = bt[j, k]
                    bt[i, k] = c * bi - s * bj
                    bt[j, k] = s * bi + c * bj
                for k in range(n):
                    vi = vt[i, k]
                    vj = vt[j, k]
                    vt[i, k] = c * vi - s * vj
                    vt[j, k] = s * vi + c * vj
        sweeps += 1
        if not rotated:
            return sweeps, True
    return sweeps, False


def _complete_columns(cols: np.ndarray, dead: np.ndarray) -> None:
    # Rebuild columns flagged in `dead` (stored as rows of `cols`, each of
    # length m >= n) as an orthonormal completion of the live ones.  For each
    # dead column pick the canonical axis least covered by the filled rows
    # (residual norm >= 1/sqrt(m), so normalization is safe); two
    # Gram-Schmidt passes keep orthogonality at machine precision.
    n, m = cols.shape
    for idx in np.nonzero(dead)[0]:
        filled = [r for r in range(n) if not dead[r]]
        covered = np.zeros(m)
        for r in filled:
            covered += cols[r] ** 2
        cand = np.zeros(m)
        cand[int(np.argmin(covered))] = 1.0
        for _ in range(2):
            for r in filled:
                cand -= (cols[r] @ cand) * cols[r]
        cols[idx] = cand / math.sqrt(cand @ cand)
        dead[idx] = False


def svd(a, tolerance: float = DEFAULT_TOLERANCE) -> SvdResult:
    """Factor ``a`` as U S V^T via one-sided Jacobi rotations.

    Deterministic: cyclic sweep order, stable descending sort, fixed sign
    convention.  Raises SvdConvergenceError (with the iteration count) if
    the off-diagonal of the implicit Gram matrix has not dropped below
    ``tolerance`` after MAX_SWEEPS sweeps.
    """
    a = as_matrix(a)
    if not (0.0 < tolerance <= 1e-4):
        raise ValueError(f"tolerance must be in (0, 1e-4], got {tolerance}")
    p, q = a.shape
    transposed = p < q
    # Work with the short side as rotation columns, stored as rows so that
    # each column access in the kernel is contiguous.
    bt = np.ascontiguousarray(a if transposed else a.T)
    n, m = bt.shape
    vt = np.eye(n)

    sweeps, converged = _jacobi_sweeps(bt, vt, float(tolerance), MAX_SWEEPS)
    if not converged:
        raise SvdConvergenceError(
            f"one-sided Jacobi SVD did not converge after {sweeps} sweeps "
            f"(shape {p}x{q}, tolerance {tolerance:g})",
            iterations=sweeps,
        )

    sigmas = np.sqrt(np.sum(bt * bt, axis=1))
    order = np.argsort(-sigmas, kind="stable")
    sigmas = sigmas[order]
    bt = bt[order]
    vt = vt[order]

    # Normalize the rotated columns into the left factor of the worked
    # problem; columns with negligible sigma are completed to a basis.
    dead = sigmas <= _RANK_EPS * max(m, n) * (sigmas[0] if sigmas[0] > 0 else 1.0)
    left = np.zeros_like(bt)
    live = ~dead
    left[live] = bt[live] / sigmas[live, None]
    if np.any(dead):
        _complete_columns(left, dead)

    if transposed:
        u, v = vt.T, left.T  # factors swap when we factored a.T
    else:
        u, v = left.T, vt.T
    u = np.ascontiguousarray(u)
    v = np.ascontiguousarray(v)

    # Sign convention: largest-|entry| of each u column made non-negative.
    for k in range(u.shape[1]):
        lead = np.argmax(np.abs(u[:, k]))
        if u[lead, k] < 0.0:
            u[:, k] = -u[:, k]
            v[:, k] = -v[:, k]

    return SvdResult(u=u, s=sigmas, v=v, iterations=sweeps, tolerance_used=float(tolerance))


def singular_values_via_gram(a) -> np.ndarray:
    """Oracle-scale singular values from characteristic-polynomial roots.

    Forms the smaller Gram matrix and root-finds its characteristic
    polynomial (closed form up to 2x2, Faddeev-LeVerrier coefficients plus
    polynomial root-finding above).  Independent of the Jacobi path; only
    meant to cross-check ``svd`` on matrices with min(p, q) <= 8.
    """
    a = as_matrix(a)
    p, q = a.shape
    r = min(p, q)
    if r > 8:
        raise ValueError(f"gram oracle limited to min(p, q) <= 8, got {r}")
    g = a.T @ a if q <= p else a @ a.T

    if r == 1:
        return np.array([math.sqrt(max(g[0, 0], 0.0))])
    if r == 2:
        tr = g[0, 0] + g[1, 1]
        det = g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]
        disc = math.sqrt(max(tr * tr - 4.0 * det, 0.0))
        lam1 = 0.5 * (tr + disc)
        lam2 = det / lam1 if lam1 > 0.0 else 0.0
        return np.sqrt(np.maximum([lam1, lam2], 0.0))

    # Normalize so the polynomial coefficients stay well scaled.
    s0 = max(np.abs(g).max(), 1.0)
    gn = g / s0
    coeffs = np.zeros(r + 1)
    coeffs[0] = 1.0
    mk = np.zeros_like(gn)
    for k in range(1, r + 1):
        mk = gn @ mk
        np.fill_diagonal(mk, mk.diagonal() + coeffs[k - 1])
        coeffs[k] = -np.trace(gn @ mk) / k
    lams = np.real(np.roots(coeffs)) * s0
    lams = np.sort(np.maximum(lams, 0.0))[::-1]
    return np.sqrt(lams)
