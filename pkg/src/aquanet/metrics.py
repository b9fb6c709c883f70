"""One-vs-rest ROC/AUC evaluation and report export."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .data.schema import CLASS_SLUGS
from .errors import DimensionError, FileError, UndefinedAUCError

REPORT_FORMAT_VERSION = 1
PROB_HEADER = [f"p_{s}" for s in CLASS_SLUGS] + ["true_label"]


@dataclass(frozen=True)
class RocCurve:
    fpr: tuple[float, ...]
    tpr: tuple[float, ...]

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fpr, self.tpr))

    def area(self) -> float:
        """Trapezoidal area under the curve."""
        f = np.asarray(self.fpr)
        t = np.asarray(self.tpr)
        return float(np.sum((f[1:] - f[:-1]) * (t[1:] + t[:-1]) / 2.0))


@dataclass
class EvaluationReport:
    model: str
    per_class: list[Optional[float]]  # None where the class is absent
    macro: float
    roc: list[Optional[RocCurve]]
    probabilities: np.ndarray
    labels: np.ndarray
    undefined: list[int] = field(default_factory=list)


def _binary_inputs(scores, labels):
    s = np.ascontiguousarray(scores, dtype=np.float64)
    lab = np.asarray(labels)
    if s.ndim != 1 or lab.shape != s.shape:
        raise DimensionError(f"scores {s.shape} and labels {lab.shape} must be equal-length vectors")
    if not np.isin(lab, (0, 1)).all():
        raise ValueError("binary labels must be 0 or 1")
    lab = np.ascontiguousarray(lab, dtype=np.int8)
    n_pos = int(lab.sum())
    if n_pos == 0 or n_pos == lab.size:
        raise UndefinedAUCError("AUC needs at least one positive and one negative label")
    return s, lab


def binary_auc(scores, labels) -> float:
    """Mann-Whitney AUC: P(score_pos > score_neg) with ties worth one half."""
    s, lab = _binary_inputs(scores, labels)
    return float(kernels.rank_auc(s, lab))


def roc_points(scores, labels) -> RocCurve:
    """ROC curve with one point per distinct score threshold, high to low."""
    s, lab = _binary_inputs(scores, labels)
    order = np.argsort(-s, kind="mergesort")
    s_sorted = s[order]
    pos = lab[order].astype(np.int64)
    # Last index of each run of equal scores.
    ends = np.flatnonzero(np.r_[s_sorted[1:] != s_sorted[:-1], True])
    tp = np.cumsum(pos)[ends]
    fp = (ends + 1) - tp
    P = int(pos.sum())
    N = s.size - P
    fpr = np.r_[0.0, fp / N]
    tpr = np.r_[0.0, tp / P]
    if fpr[-1] != 1.0 or tpr[-1] != 1.0:
        fpr = np.r_[fpr, 1.0]
        tpr = np.r_[tpr, 1.0]
    return RocCurve(tuple(float(v) for v in fpr), tuple(float(v) for v in tpr))


def macro_ovr_auc(probabilities, labels, n_classes: int = 5):
    """Macro one-vs-rest AUC over the classes present in ``labels``.

    Returns ``(macro, per_class)`` where undefined per-class entries are None.
    """
    p = np.asarray(probabilities, dtype=np.float64)
    y = np.asarray(labels)
    if p.ndim != 2 or p.shape[1] != n_classes or p.shape[0] != y.size:
        raise DimensionError(f"probabilities {p.shape} do not match {y.size} labels x {n_classes} classes")
    if y.size < 2:
        raise UndefinedAUCError("need at least two samples")
    per_class: list[Optional[float]] = []
    for c in range(n_classes):
        ind = (y == c).astype(np.int8)
        if ind.sum() in (0, ind.size):
            per_class.append(None)
        else:
            per_class.append(binary_auc(p[:, c], ind))
    defined = [a for a in per_class if a is not None]
    if len(np.unique(y)) < 2 or not defined:
        raise UndefinedAUCError("fewer than two distinct classes present")
    return float(np.mean(defined)), per_class


def evaluate_probabilities(model_name: str, probabilities, labels, n_classes: int = 5) -> EvaluationReport:
    p = np.asarray(probabilities, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    macro, per_class = macro_ovr_auc(p, y, n_classes)
    roc = [
        None if a is None else roc_points(p[:, c], (y == c).astype(np.int8))
        for c, a in enumerate(per_class)
    ]
    undefined = [c for c, a in enumerate(per_class) if a is None]
    return EvaluationReport(model_name, per_class, macro, roc, p, y, undefined)


def evaluate_model(model_name: str, model, dataset) -> EvaluationReport:
    from .models.network import predict_proba

    return evaluate_probabilities(model_name, predict_proba(model, dataset.features), dataset.labels)


def _r(x: float) -> str:
    return repr(float(x))


def auc_table(reports: Sequence[EvaluationReport]) -> dict:
    return {
        "models": {
            r.model: {"macro": r.macro, "per_class": list(r.per_class), "undefined_classes": list(r.undefined)}
            for r in reports
        },
        "format_version": REPORT_FORMAT_VERSION,
    }


def export_report(reports: Sequence[EvaluationReport], out_dir) -> list[Path]:
    """Write ``auc_table.json``, per-class ROC CSVs and per-model probability CSVs."""
    out = Path(out_dir)
    written: list[Path] = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        path = out / "auc_table.json"
        path.write_text(json.dumps(auc_table(reports), indent=2) + "\n", encoding="utf-8")
        written.append(path)
        for r in reports:
            for c, curve in enumerate(r.roc):
                if curve is None:
                    continue
                path = out / f"roc_{r.model}_{CLASS_SLUGS[c]}.csv"
                with path.open("w", newline="", encoding="utf-8") as fh:
                    w = csv.writer(fh, lineterminator="\n")
                    w.writerow(["fpr", "tpr"])
                    w.writerows([_r(f), _r(t)] for f, t in curve.points)
                written.append(path)
            path = out / f"probs_{r.model}.csv"
            with path.open("w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(PROB_HEADER)
                for row, lab in zip(r.probabilities, r.labels):
                    w.writerow([_r(v) for v in row] + [str(int(lab))])
            written.append(path)
    except OSError as exc:
        raise FileError(getattr(exc, "filename", None) or out, exc.strerror or str(exc)) from None
    return written
