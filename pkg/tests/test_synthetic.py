import pytest

from migdse import synthetic as S
from migdse.recipes import NUM_RECIPES


def test_default_bench_layout():
    p = S.default_params()
    assert len(p.rules) == NUM_RECIPES
    assert p.rules[28].mean == 3 and p.rules[29].requires == 28
    assert p.start == 200 and p.floor == 50


def test_pair_trap_and_precondition():
    env = S.default_bench()
    env.apply(29)
    assert env.size == 200  # precondition unmet
    env.apply(28)
    env.apply(29)
    assert env.size == 195
    env.apply(29)
    assert env.size == 195  # previous recipe is now 29


def test_floor_and_metrics():
    rules = tuple(S.Rule(-100.0) for _ in range(NUM_RECIPES))
    env = S.SyntheticEnvironment(S.SyntheticParams(rules))
    env.apply(0)
    env.apply(1)
    assert env.size == 50
    m = env.current_metrics()
    assert (m.mig_nodes, m.lut6, m.transistors) == (50, 50, 50)


def test_noise_is_bounded_and_seeded():
    a, b = S.default_bench(7), S.default_bench(7)
    for r in range(26):
        a.apply(r)
        b.apply(r)
        assert a.size == b.size
    env = S.default_bench(1)
    for _ in range(200):
        before = env.size
        env.apply(3)
        assert abs(env.size - before) <= 2 or env.size == 50


def test_snapshot_restore():
    env = S.default_bench()
    env.apply(28)
    tok = env.snapshot()
    env.apply(5)
    env.restore(tok)
    env.apply(29)
    assert env.size == 195


def test_params_round_trip_and_validation():
    p = S.default_params()
    assert S.SyntheticParams.from_dict(p.to_dict()) == p
    with pytest.raises(ValueError):
        S.SyntheticParams(p.rules[:5])
    with pytest.raises(ValueError):
        S.SyntheticParams(p.rules, start=10)
    with pytest.raises(ValueError):
        S.default_bench().apply(30)


def test_uniform_step_mean():
    # 2 * (-1) + 3 + (-8) / 30, averaged over 30 recipes
    assert S.default_params().uniform_step_mean() == pytest.approx((1 - 8 / 30) / 30)
