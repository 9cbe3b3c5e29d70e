"""Period extraction by scanning the singular value ratio over candidate periods.

A strongly periodic series reshaped at its true period gives a near-rank-1
cycle matrix, so SVR = sigma_1/sigma_2 spikes there (and at integer
multiples, which also align the cycles).  Peaks are only trusted above a
data-driven null band estimated from shuffled surrogates of the same
series, which kills the classic false positive caused by a nonzero mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from cyclesvd.frames import CycleFrame, Series, reshape
from cyclesvd.linalg import SvdConvergenceError, svd
from cyclesvd.rand import Rng

SVR_SENTINEL_RATIO = 1e-12
DEFAULT_NULL_TRIALS = 50
DEFAULT_NULL_QUANTILE = 0.99
DEFAULT_SCAN_SEED = 42


@dataclass(frozen=True)
class Peak:
    """A significant local SVR maximum; harmonic_of points at the smaller
    detected peak it is an integer multiple of (within one sample)."""

    period: int
    svr: float
    prominence: float
    harmonic_of: int | None = None


@dataclass(frozen=True)
class PeriodScan:
    candidates: np.ndarray
    svr: np.ndarray
    sigma1: np.ndarray
    sigma2: np.ndarray
    peaks: tuple[Peak, ...]
    null_level: np.ndarray
    null_trials: int
    null_quantile: float
    mean_removed: bool

    @property
    def fundamental(self) -> Peak | None:
        """Smallest detected peak that is not a harmonic of another."""
        for peak in sorted(self.peaks, key=lambda pk: pk.period):
            if peak.harmonic_of is None:
                return peak
        return None

    def to_dict(self) -> dict:
        """JSON-ready view; infinite SVRs serialize as the string 'inf'."""
        return {
            "candidates": [int(p) for p in self.candidates],
            "sigma1": [float(s) for s in self.sigma1],
            "sigma2": [float(s) for s in self.sigma2],
            "svr": [_json_ratio(v) for v in self.svr],
            "null_level": [_json_ratio(v) for v in self.null_level],
            "null_trials": self.null_trials,
            "null_quantile": self.null_quantile,
            "mean_removed": self.mean_removed,
            "peaks": [
                {
                    "period": pk.period,
                    "svr": _json_ratio(pk.svr),
                    "prominence": _json_ratio(pk.prominence),
                    "harmonic_of": pk.harmonic_of,
                }
                for pk in self.peaks
            ],
            "fundamental": self.fundamental.period if self.fundamental else None,
        }


def _json_ratio(value: float):
    return "inf" if math.isinf(value) else float(value)


def sigma_pair(frame: CycleFrame) -> tuple[float, float]:
    """(sigma_1, sigma_2) of the frame; sigma_2 is 0.0 for 1-column frames."""
    result = svd(frame.matrix)
    s1 = float(result.s[0])
    s2 = float(result.s[1]) if result.s.size > 1 else 0.0
    return s1, s2


def svr_of_pair(sigma1: float, sigma2: float) -> float:
    """sigma_1/sigma_2, with +inf once sigma_2 is negligible against sigma_1."""
    if sigma2 <= SVR_SENTINEL_RATIO * sigma1 or sigma2 == 0.0:
        return math.inf
    return sigma1 / sigma2


def svr(frame: CycleFrame) -> float:
    """Singular value ratio of a cycle frame (fresh SVD each call)."""
    return svr_of_pair(*sigma_pair(frame))


def mean_shift_bound(sigma1_zero_mean: float, alpha: float, p: int, q: int) -> float:
    """Approximate upper limit of sigma_1 after shifting all entries by alpha.

    sqrt(sigma1_0^2 + alpha^2 * p * q): the rank-1 all-ones bump can add at
    most alpha^2*p*q to the squared top singular value.
    """
    if p < 1 or q < 1:
        raise ValueError("p and q must be >= 1")
    if not (math.isfinite(sigma1_zero_mean) and math.isfinite(alpha)):
        raise ValueError("inputs must be finite")
    return math.sqrt(sigma1_zero_mean**2 + alpha**2 * p * q)


def expected_spectrum(signal_norm: float, noise_sigma: float, p: int, q: int) -> tuple[float, float]:
    """Model predictions (sigma1, tail sigma) for one periodic profile plus noise.

    For a frame built from q repeats of a profile with L2 norm ``signal_norm``
    plus i.i.d. noise of scale ``noise_sigma``: sigma_1 ~ sqrt(a^2 q + eps^2 p)
    and the trailing singular values cluster near sqrt(q)*eps.
    """
    if signal_norm < 0 or noise_sigma < 0 or p < 1 or q < 1:
        raise ValueError("inputs must be non-negative (p, q >= 1)")
    sigma1 = math.sqrt(signal_norm**2 * q + noise_sigma**2 * p)
    tail = math.sqrt(q) * noise_sigma
    return sigma1, tail


def _svr_curve(values: np.ndarray, periods: range, remove_mean: bool):
    n = values.size
    s1s = np.empty(len(periods))
    s2s = np.empty(len(periods))
    ratios = np.empty(len(periods))
    series = Series(values=values)
    for i, p in enumerate(periods):
        frame = reshape(series, p, remove_mean=remove_mean)
        try:
            s1, s2 = sigma_pair(frame)
        except SvdConvergenceError as err:
            raise SvdConvergenceError(
                f"SVD failed at candidate period {p} ({n} samples): {err}",
                iterations=err.iterations,
            ) from err
        s1s[i], s2s[i] = s1, s2
        ratios[i] = svr_of_pair(s1, s2)
    return s1s, s2s, ratios


def _find_peaks(periods: range, ratios: np.ndarray, null_level: np.ndarray) -> tuple[Peak, ...]:
    peaks: list[Peak] = []
    for i in range(1, len(ratios) - 1):
        if not (ratios[i] > ratios[i - 1] and ratios[i] > ratios[i + 1]):
            continue
        if not ratios[i] > null_level[i]:
            continue
        prominence = ratios[i] - null_level[i]
        peaks.append(Peak(period=periods[i], svr=float(ratios[i]), prominence=float(prominence)))

    annotated: list[Peak] = []
    for peak in peaks:  # ascending period order by construction
        harmonic_of = None
        for earlier in annotated:
            k = peak.period // earlier.period
            for mult in (k, k + 1):
                if mult >= 2 and abs(peak.period - mult * earlier.period) <= 1:
                    harmonic_of = earlier.period
                    break
            if harmonic_of is not None:
                break
        if harmonic_of is not None:
            peak = Peak(peak.period, peak.svr, peak.prominence, harmonic_of)
        annotated.append(peak)
    return tuple(annotated)


def scan_periods(
    series: Series,
    p_min: int,
    p_max: int,
    remove_mean: bool = True,
    *,
    null_trials: int = DEFAULT_NULL_TRIALS,
    null_quantile: float = DEFAULT_NULL_QUANTILE,
    seed: int = DEFAULT_SCAN_SEED,
) -> PeriodScan:
    """Compute SVR over every integer period in [p_min, p_max].

    The significance threshold is the per-candidate ``null_quantile`` of
    SVR over ``null_trials`` shuffled surrogates of the series (shuffling
    destroys periodicity but keeps the value distribution).  Peaks are
    strict local maxima above that band; peaks sitting at an integer
    multiple of a smaller peak (within one sample) are tagged harmonics.
    """
    n = len(series)
    if not (2 <= p_min < p_max <= n // 2):
        raise ValueError(
            f"need 2 <= p_min < p_max <= n//2 = {n // 2}, got [{p_min}, {p_max}]"
        )
    if null_trials < 1:
        raise ValueError("null_trials must be >= 1")
    periods = range(p_min, p_max + 1)

    s1s, s2s, ratios = _svr_curve(series.values, periods, remove_mean)

    rng = Rng(seed)
    surrogate_ratios = np.empty((null_trials, len(periods)))
    for t in range(null_trials):
        shuffled = rng.split(t).shuffled(series.values)
        _, _, surrogate_ratios[t] = _svr_curve(shuffled, periods, remove_mean)
    null_level = np.quantile(surrogate_ratios, null_quantile, axis=0)

    peaks = _find_peaks(periods, ratios, null_level)
    return PeriodScan(
        candidates=np.array(periods, dtype=np.int64),
        svr=ratios,
        sigma1=s1s,
        sigma2=s2s,
        peaks=peaks,
        null_level=null_level,
        null_trials=null_trials,
        null_quantile=null_quantile,
        mean_removed=remove_mean,
    )
