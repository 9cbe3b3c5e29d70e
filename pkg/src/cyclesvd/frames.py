"""Time-series ingestion and reshaping into cycle matrices.

A series of length n cut at period p becomes a p x q matrix (q = n // p)
whose columns are consecutive cycles; the n mod p trailing samples are
dropped, never zero-padded.  The global mean of the retained samples is
removed by default: a DC offset inflates sigma_1 and biases the singular
value ratio upward, so skipping removal must be an explicit choice.
"""

from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass

import numpy as np

from cyclesvd.linalg import as_matrix

MISSING_MARKERS = {"", "nan", "na"}
MAX_INTERPOLATED_FRACTION = 0.05


class CsvError(ValueError):
    """Malformed or unusable CSV input."""


@dataclass(frozen=True)
class Series:
    """A 1-D real-valued series; timestamps are carried but never used."""

    values: np.ndarray
    timestamps: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size < 2:
            raise ValueError("series needs at least 2 values in a 1-D vector")
        if not np.all(np.isfinite(values)):
            raise ValueError("series values must be finite")
        object.__setattr__(self, "values", values)
        if self.timestamps is not None:
            ts = np.asarray(self.timestamps, dtype=np.float64)
            if ts.shape != values.shape:
                raise ValueError("timestamps must match values in length")
            if np.any(np.diff(ts) <= 0):
                raise ValueError("timestamps must be strictly increasing")
            object.__setattr__(self, "timestamps", ts)

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class CycleFrame:
    """A series reshaped into a (period x cycles) matrix with provenance."""

    matrix: np.ndarray
    period: int
    cycles: int
    dropped_tail: int
    mean_removed: float

    def __post_init__(self):
        if self.matrix.shape != (self.period, self.cycles):
            raise ValueError(
                f"frame matrix shape {self.matrix.shape} does not match "
                f"period={self.period}, cycles={self.cycles}"
            )
        if not 0 <= self.dropped_tail < self.period:
            raise ValueError("dropped_tail must lie in [0, period)")


@dataclass(frozen=True)
class CsvLoad:
    """A loaded series plus how many gaps were repaired or trimmed."""

    series: Series
    interpolated: int
    dropped_leading: int
    dropped_trailing: int


def reshape(series: Series, period: int, remove_mean: bool = True) -> CycleFrame:
    """Cut ``series`` into consecutive length-``period`` columns.

    Requires at least two full cycles; the trailing ``n mod period``
    samples are dropped.  With ``remove_mean`` the grand mean of the
    retained samples is subtracted first and recorded on the frame.
    """
    n = len(series)
    if period < 2:
        raise ValueError(f"period must be >= 2, got {period}")
    cycles = n // period
    if cycles < 2:
        raise ValueError(
            f"period {period} too large for series of length {n}: "
            f"need at least 2 full cycles (max admissible period is {n // 2})"
        )
    retained = series.values[: period * cycles]
    mean = float(retained.mean()) if remove_mean else 0.0
    matrix = as_matrix((retained - mean).reshape(cycles, period).T)
    return CycleFrame(
        matrix=matrix,
        period=period,
        cycles=cycles,
        dropped_tail=n - period * cycles,
        mean_removed=mean,
    )


def flatten(frame: CycleFrame, matrix: np.ndarray | None = None, add_mean: bool = True) -> Series:
    """Concatenate frame columns back into a series of length period*cycles.

    ``matrix`` defaults to the frame's own matrix but may be any equally
    shaped matrix (an approximation, a residual).  The removed mean is
    added back unless ``add_mean`` is false.
    """
    if matrix is None:
        matrix = frame.matrix
    if matrix.shape != frame.matrix.shape:
        raise ValueError(
            f"matrix shape {matrix.shape} does not match frame shape {frame.matrix.shape}"
        )
    values = matrix.T.reshape(-1)
    if add_mean:
        values = values + frame.mean_removed
    return Series(values=values.copy())


def with_zero_mean_provenance(frame: CycleFrame) -> CycleFrame:
    """Copy of ``frame`` that flattens without re-adding the removed mean."""
    return dataclasses.replace(frame, mean_removed=0.0)


def _parse_cell(cell: str) -> float | None:
    text = cell.strip()
    if text.lower() in MISSING_MARKERS:
        return None
    return float(text)


def _resolve_column(header: list[str] | None, selector: int | str, width: int) -> int:
    if isinstance(selector, int):
        if not 0 <= selector < width:
            raise CsvError(f"column index {selector} out of range for {width} columns")
        return selector
    if header is None:
        raise CsvError(f"column {selector!r} requested by name but the file has no header row")
    try:
        return header.index(selector)
    except ValueError:
        raise CsvError(f"no column named {selector!r}; header is {header}") from None


def _is_header(row: list[str]) -> bool:
    # Header iff no cell parses as a number or missing marker; a data row
    # with string timestamps still has its numeric value cell.
    for cell in row:
        try:
            _parse_cell(cell)
            return False
        except ValueError:
            continue
    return True


def load_csv(path, column: int | str = 0, missing: str = "error", name: str | None = None) -> CsvLoad:
    """Load one numeric column from a CSV file.

    A header row is auto-detected (first row with no numeric cell at all).
    Missing markers are the empty field, "NaN" and "NA"; ``missing``
    selects the policy: "error" (default), "interpolate" (linear fill of
    interior gaps, capped at 5% of the points; edge gaps still error) or
    "drop-edges" (trim leading/trailing gaps, interior gaps still error).
    Non-selected columns (e.g. string timestamps) are ignored.
    """
    if missing not in ("error", "interpolate", "drop-edges"):
        raise ValueError(f"unknown missing-value policy {missing!r}")
    rows: list[tuple[int, list[str]]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for row in reader:
            if row and any(cell.strip() for cell in row):
                rows.append((reader.line_num, row))
    if not rows:
        raise CsvError(f"{path}: file contains no data rows")

    header: list[str] | None = None
    if _is_header(rows[0][1]):
        header = [cell.strip() for cell in rows[0][1]]
        rows = rows[1:]
    if not rows:
        raise CsvError(f"{path}: header only, no data rows")

    col = _resolve_column(header, column, len(rows[0][1]))
    raw: list[float | None] = []
    lines: list[int] = []
    for lineno, row in rows:
        if col >= len(row):
            raise CsvError(f"{path}: line {lineno}: only {len(row)} fields, need column {col}")
        try:
            raw.append(_parse_cell(row[col]))
        except ValueError:
            raise CsvError(
                f"{path}: line {lineno}: cannot parse {row[col]!r} as a number"
            ) from None
        lines.append(lineno)

    missing_idx = [i for i, v in enumerate(raw) if v is None]
    if len(missing_idx) == len(raw):
        raise CsvError(f"{path}: selected column is entirely missing")

    series_name = name if name is not None else (header[col] if header else "")
    interpolated = 0
    dropped_leading = 0
    dropped_trailing = 0

    if missing_idx:
        if missing == "error":
            raise CsvError(
                f"{path}: line {lines[missing_idx[0]]}: missing value "
                f"(policy 'error'; use 'interpolate' or 'drop-edges')"
            )
        lead = 0
        while raw[lead] is None:
            lead += 1
        trail = len(raw)
        while raw[trail - 1] is None:
            trail -= 1
        if missing == "drop-edges":
            interior = [i for i in missing_idx if lead <= i < trail]
            if interior:
                raise CsvError(
                    f"{path}: line {lines[interior[0]]}: interior gap under "
                    f"policy 'drop-edges'"
                )
            raw = raw[lead:trail]
            dropped_leading, dropped_trailing = lead, len(missing_idx) - lead
        else:  # interpolate
            if lead > 0 or trail < len(raw):
                raise CsvError(
                    f"{path}: cannot interpolate gaps at the series edges "
                    f"(use 'drop-edges' first or fix the file)"
                )
            if len(missing_idx) > MAX_INTERPOLATED_FRACTION * len(raw):
                raise CsvError(
                    f"{path}: {len(missing_idx)} missing values exceed the "
                    f"{MAX_INTERPOLATED_FRACTION:.0%} interpolation cap"
                )
            known = [i for i, v in enumerate(raw) if v is not None]
            known_vals = [raw[i] for i in known]
            filled = np.interp(missing_idx, known, known_vals)
            for i, v in zip(missing_idx, filled):
                raw[i] = float(v)
            interpolated = len(missing_idx)

    values = np.array(raw, dtype=np.float64)
    if values.size < 2:
        raise CsvError(f"{path}: fewer than 2 usable values")
    return CsvLoad(
        series=Series(values=values, name=series_name),
        interpolated=interpolated,
        dropped_leading=dropped_leading,
        dropped_trailing=dropped_trailing,
    )
