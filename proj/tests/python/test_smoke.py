import json
import math
from pathlib import Path

import numpy as np
import pytest

import c3r

DATA = Path(__file__).resolve().parents[1] / "data"


def load(name):
    return json.loads((DATA / name).read_text())


def test_score_worked_tables():
    duck = c3r.score(load("duck_paws.json"))
    assert duck["ps"] == pytest.approx(1.0, abs=1e-12)
    assert duck["pn"] == pytest.approx(0.5, abs=1e-12)
    wings = c3r.score(load("wings.json"))
    assert wings["ps"] == pytest.approx(0.5, abs=1e-12)
    assert wings["pn"] == pytest.approx(1.0, abs=1e-12)


def test_malformed_table_raises():
    with pytest.raises(c3r.ConfigError):
        c3r.score(load("malformed_key.json"))


def test_generate_shapes_and_determinism():
    a = c3r.generate(seed=3, n_train=40, n_eval=10)
    b = c3r.generate(seed=3, n_train=40, n_eval=10)
    assert a["train"]["x"].shape == (40, 60)
    assert a["eval"]["x"].shape == (10, 60)
    assert np.array_equal(a["train"]["x"], b["train"]["x"])
    assert ((a["train"]["x"] > 0) & (a["train"]["x"] < 1)).all()


def test_distance_correlation_self_is_one():
    x = np.random.default_rng(0).normal(size=(30, 3))
    assert c3r.distance_correlation(x, x) == pytest.approx(1.0, abs=1e-12)
    assert c3r.distance_correlation(x, 2 * x + 3) == pytest.approx(1.0, abs=1e-10)


def test_log_confidence_term():
    assert c3r.log_confidence_term(1000, 0.05) == pytest.approx(math.log(20000) / 1000, abs=1e-15)


def test_risk_report_bound():
    r = c3r.risk_report([0.9, 0.2], [0.3, 0.6], [1, 0])
    assert r["c3_bound"]["hard"] == pytest.approx(2 * r["suf"]["hard"] + r["mon"]["hard"])


def test_train_and_evaluate_small():
    report = c3r.train_and_evaluate(
        synth={"n_train": 40, "n_eval": 20},
        train={"hidden": [6, 5, 7], "latent": 4, "epochs": 1, "lr": 0.001},
        trials=2,
    )
    assert report["epochs_run"] == 1
    assert set(report["correlation"]) >= {"dcorr_snc", "dcorr_sc", "dcorr_nc", "dcorr_sp"}
    assert 0.0 <= report["accuracy"]["worst"] <= report["accuracy"]["avg"] <= 1.0
