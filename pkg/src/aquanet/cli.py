"""Command-line pipeline: generate -> train -> evaluate / predict, plus tune.

Exit codes: 0 success, 2 input or configuration error, 3 numerical divergence.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .config import load_config
from .data import (
    CLASS_NAMES,
    FEATURES,
    StandardsTable,
    check_thresholds,
    generate_synthetic,
    load_csv,
    read_dataset,
    stratified_split_indices,
    write_dataset_csv,
)
from .errors import AquanetError, ConfigError, DivergenceError
from .metrics import PROB_HEADER, evaluate_model, export_report
from .models import MODEL_NAMES, default_spec, load_model, save_model, with_overrides
from .models.network import forward
from .rng import stream
from .training import TrainConfig, train

log = logging.getLogger("aquanet")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DIVERGED = 3
MODEL_ORDER = ("mlp", "lstm", "tcn", "ann")


def resolve_seed(flag, cfg: dict) -> int:
    if flag is not None:
        return int(flag)
    if cfg.get("seed") is not None:
        return int(cfg["seed"])
    env = os.environ.get("AQUANET_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"AQUANET_SEED must be an integer, got {env!r}") from None
    return 0


def _standards(cfg):
    return StandardsTable.from_config(cfg), check_thresholds(cfg["class_thresholds"])


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def _parse_models(text: str) -> list[str]:
    kinds = [m.strip().lower() for m in text.split(",") if m.strip()]
    if not kinds:
        raise ConfigError("select at least one model")
    for k in kinds:
        if k not in MODEL_ORDER:
            raise ConfigError(f"unknown model {k!r}; choose from {','.join(MODEL_ORDER)}")
    return list(dict.fromkeys(kinds))


def _require_file(path, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"{what} not found: {p}")
    return p


def model_seed(seed: int, kind: str) -> int:
    return int(stream(seed, "train", kind).integers(2**63 - 1))


# ------------------------------------------------------------------------- commands


def cmd_generate(args) -> int:
    cfg = load_config(args.config)
    seed = resolve_seed(args.seed, cfg)
    standards, thresholds = _standards(cfg)
    n = args.n if args.n is not None else int(cfg["synthetic"]["n"])
    ds = generate_synthetic(n, stream(seed, "generate"), standards, thresholds, cfg["synthetic"]["distributions"])
    write_dataset_csv(ds, args.out)
    log.info("wrote %d samples to %s (class counts %s)", len(ds), args.out, ds.class_counts().tolist())
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = load_config(args.config)
    seed = resolve_seed(args.seed, cfg)
    data_path = _require_file(args.data, "data file")
    standards, thresholds = _standards(cfg)
    ds = read_dataset(data_path, standards, thresholds)
    frac = float(cfg["split"]["test_fraction"])
    tr_idx, te_idx = stratified_split_indices(ds.labels, frac, stream(seed, "split"))
    train_ds, test_ds = ds.subset(tr_idx), ds.subset(te_idx)
    kinds = _parse_models(args.models)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "split.json", {
        "data_sha256": _sha256(data_path),
        "seed": seed,
        "test_fraction": frac,
        "train_indices": tr_idx.tolist(),
        "test_indices": te_idx.tolist(),
    })
    model_cfgs = cfg.get("models", {})
    for kind in kinds:
        spec = with_overrides(default_spec(kind), **model_cfgs.get(kind, {}))
        tc = TrainConfig.from_dict(cfg.get("train", {}), seed=model_seed(seed, kind),
                                   epochs=args.epochs, batch_size=args.batch_size)
        log.info("training %s for %d epochs on %d rows", kind, tc.epochs, len(train_ds))
        model, hist = train(spec, train_ds, test_ds if len(test_ds) else None, tc)
        save_model(model, out / f"model_{kind}.json")
        hist.to_csv(out / f"history_{kind}.csv")
        log.info("%s: final train loss %.4f (%.1fs)", kind, hist.train_loss[-1], hist.wall_time)
    return EXIT_OK


def _model_files(models_dir: Path) -> list[Path]:
    files = sorted(models_dir.glob("model_*.json"))
    rank = {k: i for i, k in enumerate(MODEL_ORDER)}
    return sorted(files, key=lambda p: (rank.get(p.stem[6:], len(rank)), p.name))


def cmd_evaluate(args) -> int:
    cfg = load_config(args.config)
    data_path = _require_file(args.data, "data file")
    models_dir = Path(args.models)
    if not models_dir.is_dir():
        raise ConfigError(f"models directory not found: {models_dir}")
    standards, thresholds = _standards(cfg)
    ds = read_dataset(data_path, standards, thresholds)
    split_path = models_dir / "split.json"
    if not args.all_rows and split_path.is_file():
        split = json.loads(split_path.read_text(encoding="utf-8"))
        if split.get("data_sha256") == _sha256(data_path):
            ds = ds.subset(split["test_indices"])
            log.info("evaluating on the %d-row hold-out recorded in %s", len(ds), split_path)
        else:
            log.warning("data file differs from the training data; evaluating on all %d rows", len(ds))
    files = _model_files(models_dir)
    if not files:
        raise ConfigError(f"no model_*.json files in {models_dir}")
    reports = []
    for f in files:
        model = load_model(f)
        name = MODEL_NAMES.get(model.spec.kind, model.spec.kind.upper())
        if any(r.model == name for r in reports):
            name = f.stem[6:].upper()
        rep = evaluate_model(name, model, ds)
        log.info("%s macro one-vs-rest AUC = %.4f", name, rep.macro)
        reports.append(rep)
    export_report(reports, args.out)
    return EXIT_OK


def cmd_predict(args) -> int:
    model = load_model(_require_file(args.model, "model file"))
    raw = load_csv(_require_file(args.input, "input file"))
    x = np.array([[np.nan if v is None else v for v in row] for row in raw.rows], dtype=np.float64)
    if x.size == 0:
        x = x.reshape(0, len(FEATURES))
    if model.normalizer is not None:
        xn = model.normalizer.transform(np.where(np.isnan(x), model.normalizer.mean, x))
    else:
        xn = np.nan_to_num(x)
    # Missing cells were filled with the training mean, i.e. 0 after scaling.
    probs = forward(model, xn)[0] if len(xn) else np.empty((0, 5))
    out = Path(args.out)
    with out.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PROB_HEADER[:-1] + ["predicted_class", "predicted_name"])
        for row in probs:
            c = int(np.argmax(row))
            w.writerow([repr(float(v)) for v in row] + [c, CLASS_NAMES[c]])
    log.info("wrote %d predictions to %s", len(probs), out)
    return EXIT_OK


def cmd_tune(args) -> int:
    from .hyperopt import SearchSpace, default_space, grid_search, random_search, search_report, write_report

    cfg = load_config(args.config)
    seed = resolve_seed(args.seed, cfg)
    data_path = _require_file(args.data, "data file")
    kind = _parse_models(args.model)[0]
    if args.space:
        space = SearchSpace.from_file(_require_file(args.space, "search space file"))
    else:
        space = default_space(kind)
    template = with_overrides(default_spec(kind), **cfg.get("models", {}).get(kind, {}))
    space.check_against(template)
    if args.method == "grid" and not space.is_discrete:
        space.grid()  # raises with the offending names
    standards, thresholds = _standards(cfg)
    ds = read_dataset(data_path, standards, thresholds)
    frac = float(cfg["split"]["test_fraction"])
    tr_idx, va_idx = stratified_split_indices(ds.labels, frac, stream(seed, "split"))
    tc = TrainConfig.from_dict(cfg.get("train", {}), seed=seed, epochs=args.epochs, batch_size=args.batch_size)
    train_ds, val_ds = ds.subset(tr_idx), ds.subset(va_idx)
    if args.method == "grid":
        results = grid_search(space, template, train_ds, val_ds, tc, seed, workers=args.workers)
    else:
        results = random_search(space, args.budget, template, train_ds, val_ds, tc, seed, workers=args.workers)
    report = search_report(results, template, args.method, seed, tc)
    out = Path(args.out)
    write_report(report, out)
    _write_json(out.with_name(out.stem + "_best_config.json"), report["best_config"])
    log.info("rank-1 %s candidate %s (val AUC %s)", kind, results[0].params, report["results"][0]["val_macro_auc"])
    return EXIT_OK


# ---------------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aquanet", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic labelled dataset CSV")
    g.add_argument("--out", required=True)
    g.add_argument("--n", type=int, default=None, help="number of samples (default 422)")
    g.add_argument("--seed", type=int)
    g.add_argument("--config")
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("train", help="train the selected models on a dataset CSV")
    t.add_argument("--data", required=True)
    t.add_argument("--models", default=",".join(MODEL_ORDER))
    t.add_argument("--config")
    t.add_argument("--out", required=True)
    t.add_argument("--seed", type=int)
    t.add_argument("--epochs", type=int)
    t.add_argument("--batch-size", type=int)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("evaluate", help="AUC/ROC report for trained models")
    e.add_argument("--data", required=True)
    e.add_argument("--models", required=True, help="directory written by `train`")
    e.add_argument("--out", required=True)
    e.add_argument("--config")
    e.add_argument("--all-rows", action="store_true", help="ignore the recorded hold-out split")
    e.set_defaults(func=cmd_evaluate)

    pr = sub.add_parser("predict", help="class probabilities for each input row")
    pr.add_argument("--model", required=True)
    pr.add_argument("--input", required=True)
    pr.add_argument("--out", required=True)
    pr.set_defaults(func=cmd_predict)

    tu = sub.add_parser("tune", help="grid or random hyperparameter search")
    tu.add_argument("--data", required=True)
    tu.add_argument("--model", required=True, choices=MODEL_ORDER)
    tu.add_argument("--space", help="search space JSON (default: bundled space for the model)")
    tu.add_argument("--method", choices=("grid", "random"), default="grid")
    tu.add_argument("--budget", type=int, default=10, help="candidates for random search")
    tu.add_argument("--seed", type=int)
    tu.add_argument("--config")
    tu.add_argument("--out", default="search_report.json")
    tu.add_argument("--epochs", type=int)
    tu.add_argument("--batch-size", type=int)
    tu.add_argument("--workers", type=int, default=1)
    tu.set_defaults(func=cmd_tune)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except DivergenceError as exc:
        print(f"aquanet: error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (AquanetError, OSError) as exc:
        print(f"aquanet: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
