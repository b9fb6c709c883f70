"""Seeded stand-in for the groundwater survey.

Every feature is drawn from a configured distribution (truncated log-normal,
uniform, or a noisy multiple of another feature); WQI and the class label are
then computed from the drawn features, so labels are consistent by
construction.
"""

from __future__ import annotations

import math
from typing import Mapping, Optional, Sequence

import numpy as np

from ..errors import ConfigError, DomainError, GenerationError
from ..rng import as_generator
from .io import build_dataset
from .schema import CLASS_NAMES, FEATURES, Dataset, WaterSample
from .wqi import DEFAULT_THRESHOLDS, StandardsTable, classify_wqi, compute_wqi

MIN_PER_CLASS = 2
COVERAGE_MIN_N = 100
MAX_RESAMPLE_DRAWS = 200_000


def _draw_one(dist: Mapping, rng: np.random.Generator, row: dict) -> float:
    kind = dist.get("dist")
    lo, hi = float(dist["low"]), float(dist["high"])
    if kind == "uniform":
        return float(rng.uniform(lo, hi))
    if kind == "lognormal":
        mu, sigma = math.log(float(dist["median"])), float(dist["sigma"])
        for _ in range(10_000):
            v = float(rng.lognormal(mu, sigma))
            if lo <= v <= hi:
                return v
        raise GenerationError(f"log-normal draw never fell inside [{lo}, {hi}]")
    if kind == "scaled":
        base = row[dist["of"]]
        v = base * float(dist["factor"]) * float(np.exp(rng.normal(0.0, float(dist["sigma"]))))
        return min(max(v, lo), hi)
    raise ConfigError(f"unknown distribution {kind!r}")


def _check_distributions(distributions: Mapping) -> list[str]:
    missing = [f for f in FEATURES if f not in distributions]
    if missing:
        raise ConfigError(f"no distribution configured for {missing}")
    order, done = [], set()
    # Resolve "scaled" dependencies so a base feature is drawn first.
    pending = list(FEATURES)
    while pending:
        progressed = False
        for f in list(pending):
            dep = distributions[f].get("of") if distributions[f].get("dist") == "scaled" else None
            if dep is None or dep in done:
                order.append(f)
                done.add(f)
                pending.remove(f)
                progressed = True
        if not progressed:
            raise ConfigError(f"circular 'scaled' dependencies among {pending}")
    return order


def draw_sample(distributions: Mapping, rng: np.random.Generator, order: Sequence[str]) -> WaterSample:
    row: dict[str, float] = {}
    for f in order:
        row[f] = _draw_one(distributions[f], rng, row)
    return WaterSample(**row)


def generate_synthetic(
    n: int = 422,
    seed=0,
    standards: Optional[StandardsTable] = None,
    thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
    distributions: Optional[Mapping] = None,
) -> Dataset:
    """Draw ``n`` samples and label them.

    For ``n >= 100`` every class is guaranteed at least two members: while a
    class is short, further draws landing in it replace the most recent
    member of the largest class.
    """
    from ..config import default_config

    if n < 5:
        raise DomainError(f"n must be >= 5, got {n}")
    cfg = default_config()
    if standards is None:
        standards = StandardsTable.from_config(cfg)
    if distributions is None:
        distributions = cfg["synthetic"]["distributions"]
    order = _check_distributions(distributions)
    rng = as_generator(seed)

    samples = [draw_sample(distributions, rng, order) for _ in range(n)]
    labels = [classify_wqi(compute_wqi(s, standards), thresholds) for s in samples]

    if n >= COVERAGE_MIN_N:
        counts = np.bincount(labels, minlength=len(CLASS_NAMES))
        draws = 0
        while counts.min() < MIN_PER_CLASS:
            if draws >= MAX_RESAMPLE_DRAWS:
                short = int(np.argmin(counts))
                raise GenerationError(
                    f"class {short} ({CLASS_NAMES[short]}) cannot be populated under the configured ranges"
                )
            draws += 1
            s = draw_sample(distributions, rng, order)
            lab = classify_wqi(compute_wqi(s, standards), thresholds)
            if counts[lab] >= MIN_PER_CLASS:
                continue
            donor = int(np.argmax(counts))
            pos = max(i for i, l in enumerate(labels) if l == donor)
            samples[pos] = s
            labels[pos] = lab
            counts[donor] -= 1
            counts[lab] += 1

    for s in samples:
        s.validate(generated=True)
    return build_dataset(samples, standards, thresholds)
