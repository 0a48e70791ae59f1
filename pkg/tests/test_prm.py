import math

import numpy as np
import pytest

from migdse import prm
from migdse.metrics import MetricVector
from migdse.trajectory import Dataset, Trajectory

from _corpus import random_dataset
from _oracles import direct_rmse_1sa, gradient_check, group_means_1sa, group_means_2sa


def toy():
    """Recipe 2 always removes 6 transistors, recipe 7 adds 2."""
    ds = Dataset("toy")
    for run in range(4):
        v = 100 + run
        t = Trajectory(run, 0, 0, MetricVector(v, 1, 1, v))
        for r in (2, 7, 2, 2, 7):
            v += -6 if r == 2 else 2
            t.append(r, MetricVector(v, 1, 1, v))
        ds.trajectories.append(t)
    return ds


def test_toy_means_and_pairs():
    m1 = prm.fit_statistical_1sa(toy())
    assert m1.delta(2) == -6 and m1.delta(7) == 2
    assert m1.counts[0] == 0 and m1.delta(0) == m1.fallback
    m2 = prm.fit_statistical_2sa(toy())
    assert m2.delta(2, 7) == -4 and m2.delta(7, 2) == -4 and m2.delta(2, 2) == -12
    # unseen pair falls back to the single-step sum
    assert m2.delta(7, 7) == 4


@pytest.mark.parametrize("seed", range(10))
def test_statistical_fits_match_group_by(seed):
    ds = random_dataset(seed, runs=5, chains=2)
    for target in ("transistors", "mig_nodes"):
        m1 = prm.fit_statistical_1sa(ds, target)
        means, overall = group_means_1sa(ds, target)
        for r in range(30):
            assert abs(m1.delta(r) - means.get(r, overall)) < 1e-9
        m2 = prm.fit_statistical_2sa(ds, target)
        pairs = group_means_2sa(ds, target)
        for (a, b), v in pairs.items():
            assert abs(m2.delta(a, b) - v) < 1e-9
        assert sum(map(sum, m2.pair_counts)) == sum(len(t) - 1 for t in ds.trajectories if len(t))


def test_evaluate_rmse_matches_direct_formula():
    train, valid = random_dataset(1, runs=8), random_dataset(2, runs=3)
    m1 = prm.fit_statistical_1sa(train)
    rep = prm.evaluate_rmse(m1, valid)
    assert abs(rep.rmse - direct_rmse_1sa(m1, valid)) < 1e-12
    assert rep.valid_samples == len(valid)


def test_predictions():
    m2 = prm.fit_statistical_2sa(toy())
    cur = MetricVector(50, 1, 1, 50)
    p1 = prm.predict_1sa(m2, cur)
    assert len(p1) == 30 and p1[2] == 44
    p2 = prm.predict_2sa(m2, cur)
    assert len(p2) == 900 and p2[2 * 30 + 2] == 38
    with pytest.raises(prm.ModelError):
        prm.predict_2sa(m2.single, cur)


def test_empty_dataset_and_bad_metric():
    with pytest.raises(prm.ModelError):
        prm.fit_statistical_1sa(Dataset())
    with pytest.raises(ValueError):
        prm.fit_statistical_1sa(toy(), "area")


def test_rmse_helper():
    assert prm.rmse([1, 2], [1, 4]) == pytest.approx(math.sqrt(2))
    with pytest.raises(prm.ModelError):
        prm.rmse([], [])


@pytest.mark.parametrize("seed", range(10))
def test_analytic_gradient_matches_finite_differences(seed):
    assert gradient_check(seed) < 1e-4


def test_context_features_layout():
    mean, scale = np.zeros(4), np.ones(4)
    h = [MetricVector(1, 2, 3, 4), MetricVector(5, 6, 7, 8)]
    f = prm.context_features(h, 3, mean, scale)
    assert f.shape == (prm.input_width(3) - 30,)
    assert list(f[:8]) == [5, 6, 7, 8, 1, 2, 3, 4]
    assert list(f[12:]) == [1, 1, 0]


def test_context_model_learns_a_constant_delta_table():
    ds = toy()
    cfg = prm.ContextConfig(context=1, hidden=16, epochs=200, lr=0.05, batch=16)
    model, report = prm.fit_context_model(ds, cfg, valid=toy())
    assert report.rmse < 0.1  # deltas are 6 and 2 transistors
    assert report.train_samples == len(ds)
    d = model.predict_deltas([MetricVector(90, 1, 1, 90)])
    assert d[2] == pytest.approx(-6, abs=0.05)


def test_context_config_validation():
    for bad in (dict(context=0), dict(context=21), dict(lr=0.0), dict(momentum=1.0),
                dict(hidden=0)):
        with pytest.raises(prm.ModelError):
            prm.ContextConfig(**bad).validate()


@pytest.mark.parametrize("kind", ["stat1sa", "stat2sa", "context"])
def test_model_files_round_trip(kind, tmp_path):
    ds = random_dataset(5)
    if kind == "stat1sa":
        model = prm.fit_statistical_1sa(ds)
    elif kind == "stat2sa":
        model = prm.fit_statistical_2sa(ds)
    else:
        model, _ = prm.fit_context_model(ds, prm.ContextConfig(context=2, hidden=4, epochs=2))
    p = tmp_path / "m.json"
    prm.save_model(model, str(p))
    back = prm.load_model(str(p))
    cur = MetricVector(100, 3, 20, 800)
    assert prm.predict_1sa(back, cur) == pytest.approx(prm.predict_1sa(model, cur), abs=1e-12)
    assert back.kind == kind


def test_malformed_model_documents(tmp_path):
    with pytest.raises(prm.ModelError):
        prm.model_from_dict({"kind": "forest", "target": "depth"})
    with pytest.raises(prm.ModelError):
        prm.model_from_dict({"kind": "stat1sa", "target": "depth"})
    p = tmp_path / "x.json"
    p.write_text("not json")
    with pytest.raises(prm.ModelError):
        prm.load_model(str(p))
