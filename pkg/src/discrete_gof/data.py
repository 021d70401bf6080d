"""CSV ingestion and the interest-rate discretizer."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .errors import DomainError
from .model import ObservationSeries

RATE_THRESHOLDS = (-0.25, 0.0, 0.25)


def discretize(values, thresholds=RATE_THRESHOLDS) -> np.ndarray:
    """Category ``k`` (1-based) such that ``thresholds[k-2] <= v < thresholds[k-1]``."""
    thresholds = np.asarray(thresholds, dtype=float)
    if np.any(np.diff(thresholds) <= 0):
        raise DomainError("thresholds must be strictly increasing")
    return np.searchsorted(thresholds, np.asarray(values, dtype=float), side="right") + 1


def read_columns(path, names) -> dict[str, np.ndarray]:
    """Float columns from a headed CSV; blank or non-numeric cells raise with the row number."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames:
            raise DomainError(f"{path}: empty file or missing header")
        missing = [n for n in names if n not in reader.fieldnames]
        if missing:
            raise DomainError(f"{path}: columns {missing} not in header {reader.fieldnames}")
        cols: dict[str, list[float]] = {n: [] for n in names}
        for row_no, row in enumerate(reader, start=2):
            for n in names:
                cell = (row.get(n) or "").strip()
                try:
                    v = float(cell)
                except ValueError:
                    raise DomainError(f"{path}: row {row_no}, column {n!r}: missing or non-numeric value {cell!r}") from None
                if math.isnan(v):
                    raise DomainError(f"{path}: row {row_no}, column {n!r}: missing value")
                cols[n].append(v)
    if not cols or not next(iter(cols.values()), []):
        raise DomainError(f"{path}: no data rows")
    return {n: np.asarray(v) for n, v in cols.items()}


def category_mapping(codes, K: int | None = None) -> dict[int, int]:
    """Original code -> category in ``1..K``.

    Codes already inside ``1..K`` are kept; otherwise the sorted distinct
    codes are renumbered.
    """
    codes = np.asarray(codes)
    if np.any(codes != np.round(codes)):
        bad = int(np.flatnonzero(codes != np.round(codes))[0])
        raise DomainError(f"non-integer response at data row {bad + 2}: {codes[bad]}")
    distinct = sorted({int(c) for c in codes})
    if K is not None and distinct and distinct[0] >= 1 and distinct[-1] <= K:
        return {k: k for k in range(1, K + 1)}
    return {c: i + 1 for i, c in enumerate(distinct)}


def ingest_csv(
    path,
    y: str,
    x=(),
    K: int | None = None,
    counts: bool = False,
    rate: str | None = None,
    thresholds=RATE_THRESHOLDS,
    mapping_out=None,
) -> ObservationSeries:
    """Build an ``ObservationSeries`` from a CSV file.

    ``y`` names the response column.  With ``rate`` set, the response is
    instead obtained by discretizing that column at ``thresholds``.  Count
    responses (``counts=True``) are shifted to ``Y = count + 1``; ordered
    responses are recoded to ``1..K`` and the mapping is written as JSON to
    ``mapping_out`` when given.
    """
    x = list(x)
    source = rate if rate is not None else y
    cols = read_columns(path, [source] + x)
    xmat = np.column_stack([cols[c] for c in x]) if x else np.zeros((cols[source].size, 0))
    if rate is not None:
        yy = discretize(cols[rate], thresholds)
        K = K or len(thresholds) + 1
        mapping = {k: k for k in range(1, K + 1)}
    else:
        raw = cols[y]
        if counts:
            if np.any(raw != np.round(raw)) or np.any(raw < 0):
                bad = int(np.flatnonzero((raw != np.round(raw)) | (raw < 0))[0])
                raise DomainError(f"count column must hold nonnegative integers (data row {bad + 2})")
            return ObservationSeries(y=raw.astype(np.int64) + 1, x=xmat, K=None, columns=tuple(x))
        mapping = category_mapping(raw, K)
        yy = np.array([mapping[int(v)] for v in raw])
        K = K or len(mapping)
    if mapping_out is not None:
        Path(mapping_out).write_text(json.dumps({str(k): v for k, v in mapping.items()}, indent=2) + "\n")
    return ObservationSeries(y=yy, x=xmat, K=K, columns=tuple(x))


def series_csv(series: ObservationSeries, counts: bool = False) -> str:
    """``y`` (or the count ``y - 1``) and covariates as CSV text."""
    names = list(series.columns) if len(series.columns) == series.p else [f"x{i + 1}" for i in range(series.p)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["y"] + names)
    for yt, xt in zip(series.y, series.x):
        w.writerow([int(yt) - 1 if counts else int(yt)] + [repr(float(v)) for v in xt])
    return buf.getvalue()
