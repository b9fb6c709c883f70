"""Per-feature z-score normalization fitted on training rows only."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError, EmptyInputError

STD_FLOOR = 1e-9


@dataclass(frozen=True)
class NormalizerStats:
    mean: np.ndarray
    std: np.ndarray  # already floored

    @property
    def constant(self) -> np.ndarray:
        return self.std <= STD_FLOOR

    def transform(self, rows) -> np.ndarray:
        x = np.asarray(rows, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.mean.shape[0]:
            raise DimensionError(f"expected rows of width {self.mean.shape[0]}, got {x.shape}")
        z = (x - self.mean) / self.std
        # A constant training column carries no information; map it to 0.
        z[:, self.constant] = 0.0
        return z


def fit_normalizer(rows) -> NormalizerStats:
    x = np.asarray(rows, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise EmptyInputError("normalizer needs at least one training row")
    mean = x.mean(axis=0)
    std = np.maximum(x.std(axis=0), STD_FLOOR)
    return NormalizerStats(mean, std)


def apply_normalizer(stats: NormalizerStats, rows) -> np.ndarray:
    return stats.transform(rows)
