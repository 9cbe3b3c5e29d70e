"""Truncated-SVD approximation of cycle frames and residual extraction.

The rank-k approximation keeps the first k terms of sigma_i * U_i * V_i^T.
U columns are per-cycle profiles (one value per sample of the cycle), V
columns are the per-cycle weights of each profile, kept unscaled with the
sigmas reported separately.  Both residual norms are reported: the
Frobenius norm equals the tail sum sqrt(sum_{i>k} sigma_i^2), while the
spectral norm equals sigma_{k+1}; they are distinct quantities and are
never conflated here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from cyclesvd.frames import CycleFrame, Series, flatten, with_zero_mean_provenance
from cyclesvd.linalg import frobenius_norm, svd


@dataclass(frozen=True)
class RankKApprox:
    k: int
    approx_frame: np.ndarray
    residual_frame: np.ndarray
    u_profiles: np.ndarray
    v_coeffs: np.ndarray
    sigmas: np.ndarray
    frob_residual: float
    spectral_residual: float


def approximate(frame: CycleFrame, k: int) -> RankKApprox:
    """Best rank-``k`` approximation of the frame, 1 <= k <= min(p, q)."""
    p, q = frame.matrix.shape
    r = min(p, q)
    if not 1 <= k <= r:
        raise ValueError(f"rank k must be in [1, {r}] for a {p}x{q} frame, got {k}")
    result = svd(frame.matrix)
    u_k = result.u[:, :k]
    v_k = result.v[:, :k]
    s_k = result.s[:k]
    approx = (u_k * s_k) @ v_k.T
    residual = frame.matrix - approx
    spectral = float(result.s[k]) if k < r else 0.0
    return RankKApprox(
        k=k,
        approx_frame=approx,
        residual_frame=residual,
        u_profiles=np.ascontiguousarray(u_k),
        v_coeffs=np.ascontiguousarray(v_k),
        sigmas=s_k.copy(),
        frob_residual=frobenius_norm(residual),
        spectral_residual=spectral,
    )


def residual_series(frame: CycleFrame, approx: RankKApprox) -> Series:
    """Residuals on the time axis; no mean re-added, residuals are mean-free."""
    if approx.residual_frame.shape != frame.matrix.shape:
        raise ValueError(
            f"approximation shape {approx.residual_frame.shape} does not match "
            f"frame shape {frame.matrix.shape}"
        )
    return flatten(with_zero_mean_provenance(frame), approx.residual_frame, add_mean=False)


def approximation_series(frame: CycleFrame, approx: RankKApprox) -> Series:
    """Rank-k reconstruction on the time axis, removed mean added back."""
    if approx.approx_frame.shape != frame.matrix.shape:
        raise ValueError(
            f"approximation shape {approx.approx_frame.shape} does not match "
            f"frame shape {frame.matrix.shape}"
        )
    return flatten(frame, approx.approx_frame)


def significant_rank(sigmas, energy_fraction: float = 0.99) -> int:
    """Smallest k whose leading sigmas carry ``energy_fraction`` of the energy.

    Energy is the sum of squared singular values; all-zero input returns 0.
    """
    if not 0.0 < energy_fraction <= 1.0:
        raise ValueError(f"energy_fraction must be in (0, 1], got {energy_fraction}")
    s = np.asarray(sigmas, dtype=np.float64)
    if s.ndim != 1 or s.size == 0:
        raise ValueError("sigmas must be a non-empty 1-D vector")
    if np.any(s < 0) or np.any(np.diff(s) > 0):
        raise ValueError("sigmas must be non-negative and non-increasing")
    energy = s**2
    total = energy.sum()
    if total == 0.0:
        return 0
    cumulative = np.cumsum(energy) / total
    # The 1e-12 slack absorbs cumsum rounding so e.g. fraction 1.0 never
    # walks past the last index.
    k = int(np.searchsorted(cumulative, energy_fraction - 1e-12) + 1)
    return min(k, int(s.size))
