"""Outlier detection and classification on top of a rank-k decomposition.

Two complementary signals are scanned with robust z-scores (median center,
MAD scale, 1.4826 consistency factor, standard-deviation fallback when the
MAD collapses):

* residuals on the time axis - what the retained profiles cannot express;
* V-coefficient columns 2..k - cycles that lean unusually hard on a
  secondary profile.  Column 1 is excluded: it tracks overall cycle
  amplitude and roughly mirrors the raw data.

A cycle flagged only in V-space had unusual but regular activity
(PROFILE_CAPTURED: the model absorbed it, residuals stay quiet); a cycle
flagged only in the residuals is genuinely unlike every extracted profile
(RESIDUAL_OUTLIER); a cycle flagged in both is BOTH.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from cyclesvd.frames import CycleFrame
from cyclesvd.lowrank import RankKApprox, residual_series

PROFILE_CAPTURED = "PROFILE_CAPTURED"
RESIDUAL_OUTLIER = "RESIDUAL_OUTLIER"
BOTH = "BOTH"

DEFAULT_Z_THRESHOLD = 3.5
DEFAULT_S_THRESHOLD = 3.5

MAD_CONSISTENCY = 1.4826
# Components whose sigma is below this ratio of sigma_1 have numerically
# meaningless V columns and are skipped by the saliency scan.
_COMPONENT_FLOOR = 1e-12
# Residuals at rounding level relative to the frame are noise, not outliers.
_RESIDUAL_FLOOR = 1e-9


@dataclass(frozen=True)
class PointFlag:
    index: int
    value: float
    residual: float
    zscore: float


@dataclass(frozen=True)
class CycleFlag:
    cycle: int
    component: int
    v_coeff: float
    saliency: float


@dataclass(frozen=True)
class OutlierEvent:
    cycle: int
    label: str
    point_flags: tuple[PointFlag, ...]
    cycle_flags: tuple[CycleFlag, ...]


@dataclass(frozen=True)
class OutlierReport:
    point_flags: tuple[PointFlag, ...]
    cycle_flags: tuple[CycleFlag, ...]
    events: tuple[OutlierEvent, ...]
    z_threshold: float
    s_threshold: float

    def to_dict(self) -> dict:
        return {
            "z_threshold": self.z_threshold,
            "s_threshold": self.s_threshold,
            "point_flags": [vars(f) for f in self.point_flags],
            "cycle_flags": [vars(f) for f in self.cycle_flags],
            "events": [
                {
                    "cycle": e.cycle,
                    "label": e.label,
                    "point_flags": [vars(f) for f in e.point_flags],
                    "cycle_flags": [vars(f) for f in e.cycle_flags],
                }
                for e in self.events
            ],
        }


def robust_zscores(values: np.ndarray) -> np.ndarray | None:
    """(x - median) / (1.4826 * MAD); falls back to the standard deviation
    when the MAD is zero, and returns None when both scales vanish."""
    values = np.asarray(values, dtype=np.float64)
    center = float(np.median(values))
    mad = float(np.median(np.abs(values - center)))
    scale = MAD_CONSISTENCY * mad
    if scale == 0.0:
        scale = float(values.std())
    if scale == 0.0:
        return None
    return (values - center) / scale


def detect(
    frame: CycleFrame,
    approx: RankKApprox,
    z_threshold: float = DEFAULT_Z_THRESHOLD,
    s_threshold: float = DEFAULT_S_THRESHOLD,
) -> OutlierReport:
    """Flag and classify anomalous behavior in a decomposed cycle frame.

    ``approx`` must come from ``approximate(frame, k)``.  Point flags mark
    residual samples with |robust z| >= z_threshold; cycle flags mark
    V-coefficients (components 2..k) with saliency >= s_threshold.  Flags
    in the same cycle merge into one classified event.
    """
    if z_threshold <= 0 or s_threshold <= 0:
        raise ValueError("thresholds must be positive")
    if approx.approx_frame.shape != frame.matrix.shape:
        raise ValueError(
            f"approximation shape {approx.approx_frame.shape} does not match "
            f"frame shape {frame.matrix.shape}"
        )
    p = frame.period

    point_flags: list[PointFlag] = []
    residuals = residual_series(frame, approx).values
    frame_scale = max(1.0, float(np.abs(frame.matrix).max()))
    if float(np.abs(residuals).max()) > _RESIDUAL_FLOOR * frame_scale:
        z = robust_zscores(residuals)
        if z is not None:
            for idx in np.nonzero(np.abs(z) >= z_threshold)[0]:
                idx = int(idx)
                original = frame.matrix[idx % p, idx // p] + frame.mean_removed
                point_flags.append(
                    PointFlag(
                        index=idx,
                        value=float(original),
                        residual=float(residuals[idx]),
                        zscore=float(z[idx]),
                    )
                )

    cycle_flags: list[CycleFlag] = []
    sigma1 = float(approx.sigmas[0]) if approx.sigmas.size else 0.0
    for j in range(1, approx.k):  # component numbers 2..k
        if approx.sigmas[j] <= _COMPONENT_FLOOR * sigma1:
            continue
        column = approx.v_coeffs[:, j]
        z = robust_zscores(column)
        if z is None:
            continue
        saliency = np.abs(z)
        for cycle in np.nonzero(saliency >= s_threshold)[0]:
            cycle = int(cycle)
            cycle_flags.append(
                CycleFlag(
                    cycle=cycle,
                    component=j + 1,
                    v_coeff=float(column[cycle]),
                    saliency=float(saliency[cycle]),
                )
            )

    events = _merge_events(point_flags, cycle_flags, p)
    return OutlierReport(
        point_flags=tuple(point_flags),
        cycle_flags=tuple(cycle_flags),
        events=events,
        z_threshold=float(z_threshold),
        s_threshold=float(s_threshold),
    )


def _merge_events(
    point_flags: list[PointFlag], cycle_flags: list[CycleFlag], period: int
) -> tuple[OutlierEvent, ...]:
    by_cycle: dict[int, tuple[list[PointFlag], list[CycleFlag]]] = {}
    for flag in point_flags:
        by_cycle.setdefault(flag.index // period, ([], []))[0].append(flag)
    for flag in cycle_flags:
        by_cycle.setdefault(flag.cycle, ([], []))[1].append(flag)
    events = []
    for cycle in sorted(by_cycle):
        points, cycles = by_cycle[cycle]
        if points and cycles:
            label = BOTH
        elif points:
            label = RESIDUAL_OUTLIER
        else:
            label = PROFILE_CAPTURED
        events.append(
            OutlierEvent(
                cycle=cycle,
                label=label,
                point_flags=tuple(points),
                cycle_flags=tuple(cycles),
            )
        )
    return tuple(events)


def explain(report: OutlierReport, approx: RankKApprox) -> dict:
    """Narrative for each flagged cycle: per-component contribution
    sigma_j * v[cycle, j] plus the cycle's residual energy."""
    entries = []
    for event in report.events:
        cycle = event.cycle
        contributions = [
            {
                "component": j + 1,
                "sigma": float(approx.sigmas[j]),
                "v_coeff": float(approx.v_coeffs[cycle, j]),
                "contribution": float(approx.sigmas[j] * approx.v_coeffs[cycle, j]),
            }
            for j in range(approx.k)
        ]
        residual_energy = float(np.sum(approx.residual_frame[:, cycle] ** 2))
        entries.append(
            {
                "cycle": cycle,
                "label": event.label,
                "contributions": contributions,
                "residual_energy": residual_energy,
                "flagged_components": sorted({f.component for f in event.cycle_flags}),
                "flagged_points": [f.index for f in event.point_flags],
            }
        )
    return {"events": entries}


def format_explanation(explanation: dict) -> str:
    """Plain-text rendering of ``explain`` output, one block per event."""
    if not explanation["events"]:
        return "no events flagged\n"
    lines = []
    for entry in explanation["events"]:
        lines.append(f"cycle {entry['cycle']}: {entry['label']}")
        for c in entry["contributions"]:
            lines.append(
                f"  component {c['component']}: sigma={c['sigma']:.6g} "
                f"v={c['v_coeff']:+.6g} contribution={c['contribution']:+.6g}"
            )
        lines.append(f"  residual energy: {entry['residual_energy']:.6g}")
        if entry["flagged_components"]:
            lines.append(f"  salient components: {entry['flagged_components']}")
        if entry["flagged_points"]:
            lines.append(f"  residual points: {entry['flagged_points']}")
    return "\n".join(lines) + "\n"
