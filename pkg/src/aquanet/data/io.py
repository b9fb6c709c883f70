"""CSV ingestion, row cleaning and dataset assembly."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..errors import EmptyInputError, FileError, ParseError, SchemaError
from .schema import FEATURES, Dataset, WaterSample
from .wqi import DEFAULT_THRESHOLDS, StandardsTable, classify_wqi, compute_wqi

log = logging.getLogger(__name__)

OPTIONAL_COLUMNS = ("wqi", "label")


@dataclass
class RawTable:
    """Parsed CSV rows in canonical column order; ``None`` marks a missing cell."""

    rows: list[list[Optional[float]]]
    line_numbers: list[int]
    wqi: Optional[list[Optional[float]]] = None
    label: Optional[list[Optional[float]]] = None
    ignored_columns: list[str] = field(default_factory=list)
    dropped: int = 0
    kept: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)


def _parse_cell(text: str, line: int, column: str) -> Optional[float]:
    text = text.strip()
    if text == "":
        return None
    try:
        return float(text)
    except ValueError:
        raise ParseError(line, column, text) from None


def load_csv(path) -> RawTable:
    """Read a feature CSV; header names are matched case-insensitively."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(FEATURES[0], f"{path}: file is empty, header row expected") from None
        lookup = {name.strip().lower(): i for i, name in enumerate(header)}
        for name in FEATURES:
            if name not in lookup:
                raise SchemaError(name)
        known = set(FEATURES) | set(OPTIONAL_COLUMNS)
        extras = [h for h in header if h.strip().lower() not in known]
        if extras:
            log.warning("ignoring unrecognised column(s): %s", ", ".join(extras))
        feat_idx = [lookup[n] for n in FEATURES]
        opt_idx = {n: lookup.get(n) for n in OPTIONAL_COLUMNS}
        table = RawTable([], [], ignored_columns=extras)
        if opt_idx["wqi"] is not None:
            table.wqi = []
        if opt_idx["label"] is not None:
            table.label = []
        for cells in reader:
            line = reader.line_num
            if not cells or all(not c.strip() for c in cells):
                continue
            cells = cells + [""] * (len(header) - len(cells))
            table.rows.append([_parse_cell(cells[i], line, n) for i, n in zip(feat_idx, FEATURES)])
            table.line_numbers.append(line)
            for n in OPTIONAL_COLUMNS:
                if opt_idx[n] is not None:
                    getattr(table, n).append(_parse_cell(cells[opt_idx[n]], line, n))
    return table


def clean_impute(raw: RawTable, max_missing_fraction: float = 0.5) -> list[WaterSample]:
    """Drop rows missing more than half their fields; median-impute the rest.

    Medians come from the non-missing values of the kept rows. The number of
    dropped rows is logged and recorded on ``raw.dropped``.
    """
    limit = max_missing_fraction * len(FEATURES)
    keep = [i for i, r in enumerate(raw.rows) if sum(v is None for v in r) <= limit]
    dropped = len(raw.rows) - len(keep)
    raw.dropped = dropped
    raw.kept = keep
    if dropped:
        log.warning("dropped %d row(s) with more than %.0f%% missing fields", dropped, 100 * max_missing_fraction)
    if not keep:
        raise EmptyInputError("every row was dropped during cleaning")
    medians = []
    for j, name in enumerate(FEATURES):
        present = [raw.rows[i][j] for i in keep if raw.rows[i][j] is not None]
        medians.append(float(np.median(present)) if present else 0.0)
        if not present:
            log.warning("column %s has no values; imputing 0", name)
    out = []
    for i in keep:
        vals = [medians[j] if v is None else v for j, v in enumerate(raw.rows[i])]
        out.append(WaterSample.from_values(vals))
    return out


def build_dataset(
    samples: Sequence[WaterSample],
    standards: StandardsTable,
    thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
    stored_labels: Optional[Sequence[Optional[float]]] = None,
) -> Dataset:
    """Attach WQI and class labels computed from the features.

    Labels are always derived from the features so they can never disagree
    with the active standards; a mismatching stored label is only reported.
    """
    if not samples:
        raise EmptyInputError("dataset has no samples")
    wqi = np.array([compute_wqi(s, standards) for s in samples])
    labels = np.array([classify_wqi(w, thresholds) for w in wqi], dtype=np.int64)
    if stored_labels is not None:
        mism = sum(
            1 for s, l in zip(stored_labels, labels) if s is not None and int(s) != int(l)
        )
        if mism:
            log.warning("%d stored label(s) disagree with labels recomputed from features", mism)
    return Dataset(tuple(samples), wqi, labels)


def read_dataset(path, standards: StandardsTable, thresholds: Sequence[float] = DEFAULT_THRESHOLDS) -> Dataset:
    raw = load_csv(path)
    samples = clean_impute(raw)
    stored = None
    if raw.label is not None:
        stored = [raw.label[i] for i in raw.kept]
    return build_dataset(samples, standards, thresholds, stored)


def _fmt(x: float) -> str:
    return repr(float(x))


def write_dataset_csv(dataset: Dataset, path) -> Path:
    path = Path(path)
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(list(FEATURES) + ["wqi", "label"])
            for s, q, l in zip(dataset.samples, dataset.wqi, dataset.labels):
                w.writerow([_fmt(v) for v in s.as_array()] + [_fmt(q), str(int(l))])
    except OSError as exc:
        raise FileError(path, exc.strerror or str(exc)) from None
    return path
