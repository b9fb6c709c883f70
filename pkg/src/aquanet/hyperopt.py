"""Grid and random hyperparameter search on a hold-out validation split."""

from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import ConfigError, FileError, UndefinedAUCError
from .metrics import macro_ovr_auc
from .models.network import predict_proba
from .models.spec import ModelSpec, spec_to_dict, tunable_fields, with_overrides
from .rng import stream
from .training import TrainConfig, train


@dataclass(frozen=True)
class Range:
    low: float
    high: float
    scale: str = "linear"
    integer: bool = False

    def __post_init__(self):
        if not self.low < self.high:
            raise ConfigError(f"range needs low < high, got ({self.low}, {self.high})")
        if self.scale not in ("linear", "log"):
            raise ConfigError(f"range scale must be 'linear' or 'log', got {self.scale!r}")
        if self.scale == "log" and self.low <= 0:
            raise ConfigError("log-scaled ranges need low > 0")

    def sample(self, rng: np.random.Generator):
        if self.scale == "log":
            v = math.exp(rng.uniform(math.log(self.low), math.log(self.high)))
        else:
            v = rng.uniform(self.low, self.high)
        return int(round(v)) if self.integer else float(v)


class SearchSpace:
    """Named hyperparameters, each a discrete value list or a :class:`Range`."""

    def __init__(self, entries: Mapping[str, Any]):
        if not entries:
            raise ConfigError("search space is empty")
        self.entries: dict[str, Any] = {}
        for name, spec in entries.items():
            if isinstance(spec, Range):
                self.entries[name] = spec
            elif isinstance(spec, Mapping):
                try:
                    self.entries[name] = Range(
                        float(spec["low"]), float(spec["high"]),
                        spec.get("scale", "linear"), bool(spec.get("integer", False)),
                    )
                except KeyError as exc:
                    raise ConfigError(f"range for {name!r} lacks {exc}") from None
            elif isinstance(spec, (list, tuple)):
                if len(spec) == 0:
                    raise ConfigError(f"value list for {name!r} is empty")
                self.entries[name] = list(spec)
            else:
                raise ConfigError(f"entry {name!r} must be a value list or a range object")

    @classmethod
    def from_file(cls, path) -> "SearchSpace":
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read search space ({exc.strerror or exc})") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: search space must be a JSON object")
        return cls(doc.get("space", doc))

    @property
    def is_discrete(self) -> bool:
        return all(isinstance(v, list) for v in self.entries.values())

    def check_against(self, spec: ModelSpec) -> None:
        bad = set(self.entries) - set(tunable_fields(spec.kind))
        if bad:
            raise ConfigError(f"{spec.kind} has no tunable field(s) {sorted(bad)}")

    def grid(self) -> list[dict]:
        if not self.is_discrete:
            ranged = [k for k, v in self.entries.items() if isinstance(v, Range)]
            raise ConfigError(f"grid search needs discrete value lists; discretize {ranged}")
        names = list(self.entries)
        return [dict(zip(names, combo)) for combo in itertools.product(*(self.entries[n] for n in names))]

    def draw(self, rng: np.random.Generator) -> dict:
        out = {}
        for name, v in self.entries.items():
            out[name] = v.sample(rng) if isinstance(v, Range) else v[int(rng.integers(len(v)))]
        return out


# Each best value from the tuned study plus its neighbors.
DEFAULT_SPACES: dict[str, dict] = {
    "mlp": {
        "hidden": [[50, 50], [100, 100], [200, 200]],
        "alpha": [0.0001, 0.001, 0.01],
        "activation": ["relu", "tanh"],
    },
    "ann": {
        "neurons": [[50, 50, 25], [100, 100, 50], [200, 200, 100]],
        "learning_rate": [0.0005, 0.001, 0.002],
    },
    "lstm": {
        "units": [64, 128, 256],
        "layers": [1, 2, 3],
    },
    "tcn": {
        "filters": [32, 64, 128],
        "kernel_size": [2, 3, 5],
        "dropout": [0.1, 0.2, 0.3],
    },
}


def default_space(kind: str) -> "SearchSpace":
    try:
        return SearchSpace(DEFAULT_SPACES[kind])
    except KeyError:
        raise ConfigError(f"no default search space for {kind!r}") from None


@dataclass
class SearchResult:
    params: dict
    val_auc: float
    final_train_loss: float
    epochs: int
    index: int
    rank: int = 0


def _evaluate(template: ModelSpec, assignment: dict, train_set, val_set, config: TrainConfig, index: int):
    spec = with_overrides(template, **assignment)
    model, hist = train(spec, train_set, None, config)
    probs = predict_proba(model, val_set.features)
    try:
        auc, _ = macro_ovr_auc(probs, val_set.labels)
    except UndefinedAUCError:
        auc = float("nan")
    return SearchResult(assignment, auc, hist.train_loss[-1], hist.epochs, index)


def _rank(results: list[SearchResult]) -> list[SearchResult]:
    # NaN scores sink to the bottom; equal scores keep enumeration order.
    ordered = sorted(results, key=lambda r: (math.inf if math.isnan(r.val_auc) else -r.val_auc, r.index))
    for i, r in enumerate(ordered, 1):
        r.rank = i
    return ordered


def _run(candidates, template, train_set, val_set, config, seed, workers):
    for c in candidates:
        with_overrides(template, **c)  # fail fast on invalid values
    cfg = replace(config, seed=int(seed))
    jobs = [(template, c, train_set, val_set, cfg, i) for i, c in enumerate(candidates)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda j: _evaluate(*j), jobs))
    else:
        results = [_evaluate(*j) for j in jobs]
    return _rank(results)


def grid_search(space: SearchSpace, template: ModelSpec, train_set, val_set,
                config: TrainConfig, seed: int, workers: int = 1) -> list[SearchResult]:
    """Train and score every point of the Cartesian product once."""
    space.check_against(template)
    return _run(space.grid(), template, train_set, val_set, config, seed, workers)


def random_search(space: SearchSpace, n_candidates: int, template: ModelSpec, train_set, val_set,
                  config: TrainConfig, seed: int, workers: int = 1) -> list[SearchResult]:
    """Score ``n_candidates`` seeded draws (log-uniform on log ranges)."""
    if n_candidates < 1:
        raise ConfigError("random search needs at least one candidate")
    space.check_against(template)
    rng = stream(seed, "random_search")
    candidates = [space.draw(rng) for _ in range(n_candidates)]
    return _run(candidates, template, train_set, val_set, config, seed, workers)


def _jsonable(v):
    if isinstance(v, tuple):
        return [_jsonable(x) for x in v]
    if isinstance(v, list):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


def search_report(results: Sequence[SearchResult], template: ModelSpec, method: str,
                  seed: int, config: TrainConfig) -> dict:
    """Ranked report; ``best_config`` uses the schema the ``train`` command reads."""
    best = results[0]
    best_spec = with_overrides(template, **best.params)
    spec_d = spec_to_dict(best_spec)
    spec_d.pop("kind")
    spec_d.pop("classes", None)
    train_d = {k: getattr(config, k) for k in ("epochs", "batch_size", "optimizer", "learning_rate", "l2_alpha")}
    return {
        "method": method,
        "model": template.kind,
        "seed": int(seed),
        "results": [
            {
                "rank": r.rank,
                "params": {k: _jsonable(v) for k, v in r.params.items()},
                "val_macro_auc": None if math.isnan(r.val_auc) else r.val_auc,
                "final_train_loss": r.final_train_loss,
                "epochs": r.epochs,
            }
            for r in results
        ],
        "best_config": {"models": {template.kind: spec_d}, "train": train_d, "seed": int(seed)},
    }


def write_report(report: dict, path) -> Path:
    path = Path(path)
    try:
        path.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise FileError(path, exc.strerror or str(exc)) from None
    return path
