"""Weighted arithmetic water quality index and its five-class binning.

Each parameter i contributes a sub-index ``q_i = 100 (C_i - V_i) / (S_i - V_i)``
where ``S_i`` is the permissible standard and ``V_i`` the ideal value; the
index is ``sum_i w_i q_i`` with unit weights normalized to sum to one.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ..errors import ConfigError, ConsistencyError
from .schema import CLASS_NAMES, FEATURES, WaterSample

DEFAULT_THRESHOLDS = (25.0, 50.0, 75.0, 100.0)


@dataclass(frozen=True)
class Standard:
    S: float
    V: float
    w: float


def _normalize_weights(raw: Sequence[float]) -> list[float]:
    total = math.fsum(raw)
    w = [r / total for r in raw]
    # Nudge the largest weight until the exact float sum is 1, so an
    # all-at-standard sample scores exactly 100.
    big = max(range(len(w)), key=lambda i: w[i])
    for _ in range(8):
        resid = math.fsum([1.0] + [-x for x in w])
        if resid == 0.0:
            break
        w[big] += resid
    return w


class StandardsTable:
    """Per-parameter standard, ideal value and normalized unit weight."""

    def __init__(self, entries: Mapping[str, Mapping[str, float]]):
        if not entries:
            raise ConfigError("standards table is empty")
        names = list(entries)
        for name in names:
            if name not in FEATURES:
                raise ConfigError(f"standard for unknown parameter {name!r}")
            e = entries[name]
            try:
                S, V, w = float(e["S"]), float(e["V"]), float(e["w"])
            except (KeyError, TypeError, ValueError):
                raise ConfigError(f"standard {name!r} needs numeric S, V and w") from None
            if not S > V:
                raise ConfigError(f"standard {name!r}: S ({S}) must exceed V ({V})")
            if not w > 0:
                raise ConfigError(f"standard {name!r}: weight must be positive")
        weights = _normalize_weights([float(entries[n]["w"]) for n in names])
        self._table = {
            n: Standard(float(entries[n]["S"]), float(entries[n]["V"]), wn)
            for n, wn in zip(names, weights)
        }

    @classmethod
    def from_config(cls, cfg: Mapping) -> "StandardsTable":
        return cls(cfg["standards"] if "standards" in cfg else cfg)

    def __getitem__(self, name: str) -> Standard:
        return self._table[name]

    def __iter__(self):
        return iter(self._table)

    def __len__(self) -> int:
        return len(self._table)

    def items(self):
        return self._table.items()

    @property
    def parameters(self) -> tuple[str, ...]:
        return tuple(self._table)

    def to_dict(self) -> dict:
        return {n: {"S": s.S, "V": s.V, "w": s.w} for n, s in self._table.items()}


def compute_wqi(sample: WaterSample | Mapping[str, float], standards: StandardsTable) -> float:
    get = sample.get if isinstance(sample, Mapping) else (lambda k, d=None: getattr(sample, k, d))
    terms = []
    for name, st in standards.items():
        c = get(name, None)
        if c is None:
            raise ConsistencyError(f"sample lacks parameter {name!r} required by the standards table")
        terms.append(st.w * ((float(c) - st.V) / (st.S - st.V)))
    return 100.0 * math.fsum(terms)


def compute_wqi_rows(features: np.ndarray, standards: StandardsTable) -> np.ndarray:
    """compute_wqi over the rows of an ``(n, 12)`` feature matrix."""
    idx = [FEATURES.index(n) for n in standards.parameters]
    out = np.empty(features.shape[0])
    stds = list(standards.items())
    for r, row in enumerate(features):
        out[r] = 100.0 * math.fsum(
            st.w * ((float(row[j]) - st.V) / (st.S - st.V)) for j, (_, st) in zip(idx, stds)
        )
    return out


def check_thresholds(thresholds: Sequence[float]) -> tuple[float, ...]:
    t = tuple(float(x) for x in thresholds)
    if len(t) != len(CLASS_NAMES) - 1:
        raise ConfigError(f"need {len(CLASS_NAMES) - 1} class thresholds, got {len(t)}")
    if any(not b > a for a, b in zip(t, t[1:])):
        raise ConfigError(f"class thresholds must be strictly ascending: {t}")
    return t


def classify_wqi(wqi: float, thresholds: Sequence[float] = DEFAULT_THRESHOLDS) -> int:
    """Class index for ``wqi``; a value on a cut-point falls in the upper bin."""
    t = check_thresholds(thresholds)
    return bisect_right(t, float(wqi))


def class_name(label: int) -> str:
    return CLASS_NAMES[label]
