import csv
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aquanet.errors import DimensionError, FileError, UndefinedAUCError
from aquanet.metrics import (
    PROB_HEADER,
    auc_table,
    binary_auc,
    evaluate_probabilities,
    export_report,
    macro_ovr_auc,
    roc_points,
)
from aquanet.rng import stream

from helpers import brute_auc


def test_known_values():
    assert binary_auc([0.9, 0.8, 0.3, 0.1], [1, 1, 0, 0]) == 1.0
    assert binary_auc([0.1, 0.2, 0.8, 0.9], [1, 1, 0, 0]) == 0.0
    assert binary_auc([0.5, 0.5, 0.5], [1, 0, 0]) == 0.5
    # One tie between a positive and a negative: (1 + 0.5 + 1 + 1) / 4.
    assert binary_auc([0.9, 0.4, 0.4, 0.1], [1, 1, 0, 0]) == 0.875


def test_undefined_cases():
    with pytest.raises(UndefinedAUCError):
        binary_auc([0.1, 0.2], [1, 1])
    with pytest.raises(DimensionError):
        binary_auc([0.1, 0.2], [1])
    with pytest.raises(ValueError):
        binary_auc([0.1, 0.2], [1, 2])


scores = st.lists(st.integers(0, 6).map(lambda v: v / 6), min_size=2, max_size=40)


@settings(max_examples=300)
@given(st.data())
def test_matches_pairwise_oracle(data):
    s = data.draw(scores)
    y = data.draw(st.lists(st.integers(0, 1), min_size=len(s), max_size=len(s)))
    if len(set(y)) < 2:
        return
    auc = binary_auc(s, y)
    assert abs(auc - brute_auc(s, y)) <= 1e-12
    assert abs(roc_points(s, y).area() - auc) <= 1e-12


@settings(max_examples=100)
@given(st.integers(0, 10**6))
def test_invariances(seed):
    g = stream(seed, "inv")
    n = int(g.integers(4, 80))
    s = g.normal(size=n)
    y = g.integers(0, 2, size=n)
    y[:2] = [0, 1]
    a = binary_auc(s, y)
    assert binary_auc(np.exp(s) * 3 + 1, y) == a  # strictly increasing transform
    assert binary_auc(-s, y) == pytest.approx(1 - a, abs=1e-12)
    assert binary_auc(s, 1 - y) == pytest.approx(1 - a, abs=1e-12)
    perm = g.permutation(n)
    assert binary_auc(s[perm], y[perm]) == a


def test_roc_points_one_per_threshold():
    curve = roc_points([0.9, 0.7, 0.7, 0.2], [1, 0, 1, 0])
    assert curve.points == [(0.0, 0.0), (0.0, 0.5), (0.5, 1.0), (1.0, 1.0)]


def test_macro_ovr_with_missing_class():
    y = np.array([0, 0, 1, 1, 2, 2])
    p = np.eye(5)[y] * 0.8 + 0.04
    macro, per_class = macro_ovr_auc(p, y)
    assert per_class[3] is None and per_class[4] is None
    assert macro == 1.0
    rep = evaluate_probabilities("M", p, y)
    assert rep.undefined == [3, 4] and rep.roc[3] is None


def test_macro_needs_two_classes():
    with pytest.raises(UndefinedAUCError):
        macro_ovr_auc(np.full((3, 5), 0.2), np.array([2, 2, 2]))


def test_export_report(tmp_path):
    g = stream(1, "export")
    y = np.array([0, 1, 2, 3, 4] * 4)
    p = g.dirichlet(np.ones(5), size=y.size)
    rep = evaluate_probabilities("MLP", p, y)
    written = export_report([rep], tmp_path / "out")
    names = sorted(w.name for w in written)
    assert "auc_table.json" in names and "probs_MLP.csv" in names
    assert "roc_MLP_very_poor.csv" in names
    table = json.loads((tmp_path / "out" / "auc_table.json").read_text())
    assert table == json.loads(json.dumps(auc_table([rep])))
    assert table["models"]["MLP"]["macro"] == rep.macro
    rows = list(csv.reader((tmp_path / "out" / "probs_MLP.csv").open()))
    assert rows[0] == PROB_HEADER
    assert [float(v) for v in rows[1][:5]] == p[0].tolist()
    with pytest.raises(FileError):
        (tmp_path / "blocked").write_text("")
        export_report([rep], tmp_path / "blocked")
