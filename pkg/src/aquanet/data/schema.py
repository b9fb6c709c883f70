"""Feature schema, the sample record and the labelled dataset."""

from __future__ import annotations

from dataclasses import dataclass, fields
from functools import cached_property
from typing import Sequence

import numpy as np

from ..errors import ConsistencyError, DimensionError, DomainError

FEATURES = (
    "tds",
    "ec",
    "sodium",
    "calcium",
    "magnesium",
    "bicarbonate",
    "sulfate",
    "chloride",
    "potassium",
    "nitrate_n",
    "ph",
    "well_depth",
)

UNITS = {
    "tds": "mg/L", "ec": "uS/cm", "sodium": "mg/L", "calcium": "mg/L",
    "magnesium": "mg/L", "bicarbonate": "mg/L", "sulfate": "mg/L",
    "chloride": "mg/L", "potassium": "mg/L", "nitrate_n": "mg/L",
    "ph": "", "well_depth": "m",
}

CLASS_NAMES = ("Excellent", "Good", "Fair", "Poor", "Very Poor")
CLASS_SLUGS = ("excellent", "good", "fair", "poor", "very_poor")

WELL_DEPTH_RANGE = (5.7, 590.0)


@dataclass(frozen=True)
class WaterSample:
    tds: float
    ec: float
    sodium: float
    calcium: float
    magnesium: float
    bicarbonate: float
    sulfate: float
    chloride: float
    potassium: float
    nitrate_n: float
    ph: float
    well_depth: float

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "WaterSample":
        if len(values) != len(FEATURES):
            raise DimensionError(f"a sample has {len(FEATURES)} features, got {len(values)}")
        return cls(*(float(v) for v in values))

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, f) for f in FEATURES], dtype=np.float64)

    def validate(self, generated: bool = False) -> None:
        for f in fields(self):
            v = getattr(self, f.name)
            if not np.isfinite(v):
                raise DomainError(f"{f.name} is not finite")
            if f.name != "ph" and v < 0:
                raise DomainError(f"{f.name} must be >= 0, got {v}")
        if not 0 <= self.ph <= 14:
            raise DomainError(f"ph must lie in [0, 14], got {self.ph}")
        if generated:
            lo, hi = WELL_DEPTH_RANGE
            if not lo <= self.well_depth <= hi:
                raise DomainError(f"well_depth {self.well_depth} outside [{lo}, {hi}]")


@dataclass(frozen=True)
class Dataset:
    samples: tuple[WaterSample, ...]
    wqi: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        n = len(self.samples)
        if self.wqi.shape != (n,) or self.labels.shape != (n,):
            raise ConsistencyError("samples, wqi and labels must have equal lengths")

    def __len__(self) -> int:
        return len(self.samples)

    @cached_property
    def features(self) -> np.ndarray:
        """Read-only ``(n, 12)`` view of the samples in canonical column order."""
        if not self.samples:
            m = np.empty((0, len(FEATURES)))
        else:
            m = np.stack([s.as_array() for s in self.samples])
        m.flags.writeable = False
        return m

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.intp)
        return Dataset(
            tuple(self.samples[i] for i in idx),
            self.wqi[idx].copy(),
            self.labels[idx].copy(),
        )

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=len(CLASS_NAMES))
