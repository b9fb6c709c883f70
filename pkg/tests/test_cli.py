import csv
import json

import numpy as np
import pytest

from aquanet.cli import main
from aquanet.data import FEATURES

SMALL = {"models": {"lstm": {"units": 6, "layers": 1}, "tcn": {"filters": 6}, "mlp": {"hidden": [8]},
                    "ann": {"neurons": [8, 8, 4]}}}


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    (d / "small.json").write_text(json.dumps(SMALL))
    assert main(["generate", "--out", str(d / "data.csv"), "--n", "120", "--seed", "4"]) == 0
    assert main(["train", "--data", str(d / "data.csv"), "--out", str(d / "models"), "--seed", "4",
                 "--epochs", "3", "--config", str(d / "small.json")]) == 0
    return d


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_generate_output(workdir):
    rows = _rows(workdir / "data.csv")
    assert rows[0] == list(FEATURES) + ["wqi", "label"]
    assert len(rows) == 121


def test_seed_sources(tmp_path, monkeypatch):
    monkeypatch.setenv("AQUANET_SEED", "5")
    main(["generate", "--out", str(tmp_path / "env.csv"), "--n", "20"])
    main(["generate", "--out", str(tmp_path / "flag.csv"), "--n", "20", "--seed", "5"])
    main(["generate", "--out", str(tmp_path / "other.csv"), "--n", "20", "--seed", "6"])
    assert (tmp_path / "env.csv").read_bytes() == (tmp_path / "flag.csv").read_bytes()
    assert (tmp_path / "env.csv").read_bytes() != (tmp_path / "other.csv").read_bytes()
    cfg = tmp_path / "seed.json"
    cfg.write_text('{"seed": 6}')
    main(["generate", "--out", str(tmp_path / "cfg.csv"), "--n", "20", "--config", str(cfg)])
    assert (tmp_path / "cfg.csv").read_bytes() == (tmp_path / "other.csv").read_bytes()


def test_train_outputs(workdir):
    m = workdir / "models"
    for kind in ("mlp", "lstm", "tcn", "ann"):
        assert (m / f"model_{kind}.json").is_file()
        assert len(_rows(m / f"history_{kind}.csv")) == 4
    split = json.loads((m / "split.json").read_text())
    assert len(split["train_indices"]) + len(split["test_indices"]) == 120
    assert split["seed"] == 4


def test_adding_a_model_leaves_others_unchanged(workdir, tmp_path):
    assert main(["train", "--data", str(workdir / "data.csv"), "--out", str(tmp_path), "--seed", "4",
                 "--epochs", "3", "--models", "mlp", "--config", str(workdir / "small.json")]) == 0
    assert (tmp_path / "model_mlp.json").read_bytes() == (workdir / "models" / "model_mlp.json").read_bytes()


def test_evaluate_uses_hold_out(workdir):
    out = workdir / "report"
    assert main(["evaluate", "--data", str(workdir / "data.csv"), "--models", str(workdir / "models"),
                 "--out", str(out)]) == 0
    table = json.loads((out / "auc_table.json").read_text())
    assert list(table["models"]) == ["MLP", "LSTM", "TCN", "ANN"]
    n_test = len(json.loads((workdir / "models" / "split.json").read_text())["test_indices"])
    probs = _rows(out / "probs_TCN.csv")
    assert len(probs) == n_test + 1
    for row in probs[1:]:
        assert abs(sum(float(v) for v in row[:5]) - 1) <= 1e-9


def test_evaluate_all_rows(workdir, tmp_path):
    assert main(["evaluate", "--data", str(workdir / "data.csv"), "--models", str(workdir / "models"),
                 "--out", str(tmp_path), "--all-rows"]) == 0
    assert len(_rows(tmp_path / "probs_MLP.csv")) == 121


def test_predict_with_missing_cells(workdir, tmp_path):
    src = _rows(workdir / "data.csv")
    lines = [",".join(FEATURES)]
    lines.append(",".join(src[1][:12]))
    lines.append(",".join(["500"] + [""] * 11))  # gaps take the training mean
    (tmp_path / "in.csv").write_text("\n".join(lines) + "\n")
    out = tmp_path / "pred.csv"
    assert main(["predict", "--model", str(workdir / "models" / "model_ann.json"),
                 "--input", str(tmp_path / "in.csv"), "--out", str(out)]) == 0
    rows = _rows(out)
    assert rows[0][-2:] == ["predicted_class", "predicted_name"]
    assert len(rows) == 3
    p = np.array([[float(v) for v in r[:5]] for r in rows[1:]])
    np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-12)
    assert int(rows[1][5]) == int(np.argmax(p[0]))


def test_tune_grid_and_best_config(workdir, tmp_path):
    space = tmp_path / "space.json"
    space.write_text(json.dumps({"hidden": [[4], [8]], "alpha": [0.0, 0.01]}))
    report = tmp_path / "search.json"
    assert main(["tune", "--data", str(workdir / "data.csv"), "--model", "mlp", "--space", str(space),
                 "--method", "grid", "--seed", "1", "--epochs", "2", "--out", str(report)]) == 0
    rep = json.loads(report.read_text())
    assert len(rep["results"]) == 4
    best = tmp_path / "search_best_config.json"
    assert main(["train", "--data", str(workdir / "data.csv"), "--models", "mlp", "--config", str(best),
                 "--out", str(tmp_path / "m")]) == 0


def test_tune_random(workdir, tmp_path):
    space = tmp_path / "space.json"
    space.write_text(json.dumps({"learning_rate": {"low": 1e-4, "high": 1e-2, "scale": "log"}}))
    out = tmp_path / "r.json"
    assert main(["tune", "--data", str(workdir / "data.csv"), "--model", "mlp", "--space", str(space),
                 "--method", "random", "--budget", "3", "--epochs", "1", "--out", str(out)]) == 0
    assert len(json.loads(out.read_text())["results"]) == 3


def test_exit_codes(workdir, tmp_path, capsys):
    data = str(workdir / "data.csv")
    bad = tmp_path / "bad.csv"
    bad.write_text("tds,ec\n1,2\n")
    assert main(["train", "--data", str(bad), "--out", str(tmp_path / "x")]) == 2
    assert "sodium" in capsys.readouterr().err
    assert main(["train", "--data", data, "--out", str(tmp_path / "x"), "--models", "svm"]) == 2
    assert main(["train", "--data", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "x")]) == 2
    cfg = tmp_path / "c.json"
    cfg.write_text("[1, 2")
    assert main(["generate", "--out", str(tmp_path / "g.csv"), "--config", str(cfg)]) == 2
    model = json.loads((workdir / "models" / "model_mlp.json").read_text())
    model["format_version"] = 99
    (tmp_path / "m.json").write_text(json.dumps(model))
    assert main(["predict", "--model", str(tmp_path / "m.json"), "--input", data, "--out", str(tmp_path / "p.csv")]) == 2
    assert "format_version" in capsys.readouterr().err
    assert main(["evaluate", "--data", data, "--models", str(tmp_path / "empty"), "--out", str(tmp_path)]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["tune", "--data", data, "--model", "mlp", "--method", "bayes"])
    assert exc.value.code == 2


def test_tune_default_space(workdir, tmp_path):
    out = tmp_path / "lstm_search.json"
    assert main(["tune", "--data", str(workdir / "data.csv"), "--model", "lstm", "--method", "random",
                 "--budget", "2", "--epochs", "1", "--config", str(workdir / "small.json"),
                 "--out", str(out)]) == 0
    for r in json.loads(out.read_text())["results"]:
        assert set(r["params"]) == {"units", "layers"}


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_exit_code(workdir, tmp_path):
    cfg = tmp_path / "diverge.json"
    cfg.write_text(json.dumps({"train": {"learning_rate": 1e300, "optimizer": "sgd"}}))
    code = main(["train", "--data", str(workdir / "data.csv"), "--models", "mlp", "--epochs", "20",
                 "--config", str(cfg), "--out", str(tmp_path)])
    assert code == 3
