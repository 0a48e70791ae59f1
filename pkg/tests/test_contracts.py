"""Small constructed instances for each operation's documented behaviour."""

import math
import random

import pytest

from migdse import evaluation as EV, pom, prm, synthetic
from migdse import io as IO
from migdse import trajectory as TJ
from migdse.engine import (ENV_STREAM, POLICY_STREAM, ChainResult, DseConfig, derive_seed,
                           iism_select, results_dataset, run_chain, run_experiment,
                           run_iterated)
from migdse.metrics import MetricVector, compute_metrics, transistor_estimate
from migdse.mig import (CONST0, CONST1, Mig, Verdict, check_equivalence, cleanup_dangling, depth,
                        negate, node_count, simulate_full)
from migdse.pom import Mode, PolicyConfig
from migdse.recipes import (pass_balance, pass_invert_opt, pass_refactor, pass_resub,
                            pass_rewrite, pass_sweep)


def equivalent(a, b):
    return check_equivalence(a, b).verdict is Verdict.EQUIVALENT


# -- mig ---------------------------------------------------------------------

def test_constant_collapse():
    assert Mig(0).make_maj(CONST0, CONST0, CONST1) == CONST0


def test_truth_tables_of_embeddings():
    m = Mig(1)
    m.add_po(m.pi(0))
    assert simulate_full(m).tables == [0b10]
    m = Mig(2)
    x, y = m.pis()
    m.add_po(m.make_maj(x, y, CONST0))
    m.add_po(m.make_maj(x, y, CONST1))
    assert simulate_full(m).tables == [0b1000, 0b1110]


def test_shared_node_counted_once_and_chain_depth():
    m = Mig(3)
    x, y, z = m.pis()
    a = m.make_maj(x, y, 0)
    m.add_po(a)
    m.add_po(negate(a))
    assert node_count(m) == 1
    m.add_po(m.make_maj(m.make_maj(a, z, 1), x, negate(z)))
    assert depth(m) == 3


def test_cleanup_examples():
    m = Mig(3)
    x, y, z = m.pis()
    m.add_po(m.make_maj(x, y, 0))
    m.make_maj(x, z, 0)
    m.make_maj(y, z, 1)
    clean = cleanup_dangling(m)
    assert clean.num_allocated == 1 and node_count(clean) == 1
    assert cleanup_dangling(clean).key() == clean.key()
    e = Mig(2)
    e.add_po(CONST1)
    assert cleanup_dangling(e).num_allocated == 0


def test_and_versus_or_counterexample():
    a = Mig(2)
    a.add_po(a.make_maj(*a.pis(), 0))
    b = Mig(2)
    b.add_po(b.make_maj(*b.pis(), 1))
    res = check_equivalence(a, b)
    assert res.verdict is Verdict.NOT_EQUIVALENT and res.counterexample == [1, 0]
    assert equivalent(a, a)


# -- io ----------------------------------------------------------------------

def test_aiger_minimal_files():
    empty = IO.parse_aiger_ascii("aag 0 0 0 0 0\n")
    assert empty.num_pis == 0 and empty.pos == []
    assert IO.write_aiger_ascii(IO.Aig()) == "aag 0 0 0 0 0\n"
    buf = IO.parse_aiger_ascii("aag 1 1 0 1 0\n2\n2\n")
    assert buf.pos == [2] and buf.ands == []
    m = IO.parse_aiger_mig("aag 3 2 0 1 1\n2\n4\n6\n6 2 4\n")
    assert simulate_full(m).tables == [0b1000] and node_count(m) == 1
    assert IO.aig_to_mig(IO.Aig()).num_allocated == 0


def test_blif_single_and_and_constant_zero():
    m = IO.parse_blif(".model t\n.inputs a b\n.outputs y z\n.names a b y\n11 1\n.names z\n.end\n")
    assert node_count(m) == 1 and m.pos[1] == CONST0


def test_mig_to_aig_sizes():
    m = Mig(3)
    x, y, z = m.pis()
    m.add_po(m.make_maj(x, y, 0))
    assert len(IO.mig_to_aig(m).ands) == 1
    full = Mig(3)
    full.add_po(full.make_maj(*full.pis()))
    aig = IO.mig_to_aig(full)
    assert len(aig.ands) <= 4
    assert equivalent(full, IO.aig_to_mig(aig))


# -- recipes -----------------------------------------------------------------

def _dist_expanded():
    # M(M(x,y,u), M(x,y,v), z) == M(x, y, M(u, v, z))
    m = Mig(5)
    x, y, u, v, z = m.pis()
    m.add_po(m.make_maj(m.make_maj(x, y, u), m.make_maj(x, y, v), z))
    return m


def test_rewrite_applies_distributivity():
    m = _dist_expanded()
    assert node_count(m) == 3
    for rules in ("dist", "all"):
        out = pass_rewrite(m, rules, False)
        assert node_count(cleanup_dangling(out)) == 2 and equivalent(m, out)
    assert pass_rewrite(Mig(2), "all", False).num_allocated == 0


def test_resub_reuses_a_duplicate_divisor():
    m = Mig(2)
    a, b = m.pis()
    d = m.make_maj(a, b, 0)
    m.add_po(d)
    m.add_po(m.make_maj(d, b, 0))  # a AND b again
    out = cleanup_dangling(pass_resub(m, 8, 16))
    assert node_count(out) == 1 and equivalent(m, out)
    single = Mig(2)
    single.add_po(single.make_maj(*single.pis(), 0))
    assert pass_resub(single, 8, 16).key() == single.key()


def test_refactor_shrinks_a_wasteful_three_input_and():
    m = Mig(3)
    x, y, z = m.pis()
    t3 = m.make_maj(m.make_maj(x, y, 0), m.make_maj(y, z, 0), 0)
    m.add_po(m.make_maj(t3, x, 0))
    assert node_count(m) == 4
    once = cleanup_dangling(pass_refactor(m, 4, False))
    assert node_count(once) <= 2 and equivalent(m, once)
    assert cleanup_dangling(pass_refactor(once, 4, False)).key() == once.key()


def test_balance_reduces_a_left_leaning_chain():
    m = Mig(5)
    acc = m.pi(0)
    for s in m.pis()[1:]:
        acc = m.make_maj(acc, s, 0)
    m.add_po(acc)
    assert depth(m) == 4
    out = cleanup_dangling(pass_balance(m, "strict"))
    assert depth(out) <= 3 and equivalent(m, out)
    again = cleanup_dangling(pass_balance(out, "strict"))
    assert depth(again) == depth(out)


def test_sweep_merges_duplicates_and_rejects_collisions():
    m = _dist_expanded()
    x, y, u, v, z = m.pis()
    m.add_po(m.make_maj(x, y, m.make_maj(u, v, z)))
    assert node_count(m) == 5
    out = cleanup_dangling(pass_sweep(m))
    # one of the two equivalent cones survives, both outputs share it
    assert node_count(out) <= 3 and out.pos[0] == out.pos[1] and equivalent(m, out)
    assert cleanup_dangling(pass_sweep(out)).key() == out.key()
    # a and b get the same patterns, so every node below looks constant zero
    c = Mig(2)
    a, b = c.pis()
    p, q = c.make_maj(a, negate(b), 0), c.make_maj(negate(a), b, 0)
    c.add_po(p)
    c.add_po(q)
    c.add_po(c.make_maj(p, q, 1))  # XOR
    pattern = random.Random(1).getrandbits(64)
    forced = cleanup_dangling(pass_sweep(c, [pattern, pattern], 64))
    assert equivalent(c, forced) and node_count(forced) == 3


def test_invert_opt_pushes_complements_through_a_node():
    m = Mig(3)
    a, b, c = m.pis()
    s = m.add_raw(negate(a), negate(b), negate(c))
    m.add_po(negate(s))
    before = transistor_estimate(m)
    out = pass_invert_opt(m)
    assert equivalent(m, out)
    n = out.pos[0] >> 1
    assert not any(f & 1 for f in out.fanins(n)) and not out.pos[0] & 1
    assert transistor_estimate(out) < before
    assert pass_invert_opt(out).key() == out.key()


# -- metrics -----------------------------------------------------------------

def test_metrics_ignore_dangling_nodes():
    m = Mig(3)
    x, y, z = m.pis()
    m.add_po(m.make_maj(x, y, negate(z)))
    m.make_maj(x, z, 1)
    assert compute_metrics(m) == compute_metrics(cleanup_dangling(m))


# -- trajectory store --------------------------------------------------------

def test_empty_dataset_is_header_only():
    text = TJ.dumps(TJ.Dataset("e"))
    assert text.count("\n") == 1
    assert len(TJ.loads(text)) == 0


def test_one_record_round_trip():
    ds = TJ.Dataset("one")
    t = TJ.Trajectory(0, 0, 0, MetricVector(3, 1, 1, 20))
    t.append(4, MetricVector(2, 1, 1, 14))
    ds.trajectories.append(t)
    back = TJ.loads(TJ.dumps(ds))
    assert back.trajectories[0].steps == t.steps


def test_split_ten_runs():
    ds = TJ.Dataset("s", trajectories=[TJ.Trajectory(r, 0, 0, MetricVector(1, 1, 1, 1))
                                       for r in range(10)])
    train, valid = TJ.split_dataset(ds, 0.1, 3)
    assert len(train.run_ids()) == 9 and len(valid.run_ids()) == 1


# -- prediction --------------------------------------------------------------

def _toy(sizes=(100, 95, 97, 90), recipes=(2, 7, 2)):
    ds = TJ.Dataset("toy")
    mv = lambda s: MetricVector(s, 1, 1, s)  # noqa: E731
    t = TJ.Trajectory(0, 0, 0, mv(sizes[0]))
    for r, s in zip(recipes, sizes[1:]):
        t.append(r, mv(s))
    ds.trajectories.append(t)
    return ds


def test_hand_computed_statistics():
    m1 = prm.fit_statistical_1sa(_toy())
    assert m1.delta(2) == -6 and m1.delta(7) == 2
    assert m1.delta(11) == m1.fallback == pytest.approx(-10 / 3)
    m2 = prm.fit_statistical_2sa(_toy())
    assert m2.delta(2, 7) == -3 and m2.delta(7, 2) == -5
    assert m2.delta(7, 7) == m1.delta(7) * 2
    flat = prm.fit_statistical_1sa(_toy((50, 50, 50, 50)))
    assert all(v == 0 for v in flat.means) and flat.fallback == 0
    single = prm.fit_statistical_2sa(_toy((10, 8), (3,)))
    assert sum(map(sum, single.pair_counts)) == 0


def test_predictions_from_the_toy_fit():
    m1 = prm.fit_statistical_1sa(_toy())
    cur = MetricVector(100, 1, 1, 100)
    p = prm.predict_1sa(m1, cur)
    assert len(p) == 30 and p[2] == 94
    flat = prm.fit_statistical_1sa(_toy((50, 50, 50, 50)))
    assert prm.predict_1sa(flat, cur) == [100] * 30
    p2 = prm.predict_2sa(prm.fit_statistical_2sa(_toy()), cur)
    assert len(p2) == 900 and p2[2 * 30 + 7] == 97


def test_rmse_examples():
    assert prm.rmse([1, 2], [1, 4]) == pytest.approx(1.41421356, abs=1e-8)
    assert prm.rmse([3, 3], [3, 3]) == 0
    assert prm.rmse([5.5] * 4, [3.0] * 4) == pytest.approx(2.5)
    m1 = prm.fit_statistical_1sa(_toy((10, 8, 6, 4), (1, 1, 1)))
    assert prm.evaluate_rmse(m1, _toy((10, 8, 6, 4), (1, 1, 1))).rmse == 0


def _constant_delta_dataset(runs=40, steps=15, seed=0):
    rng = random.Random(seed)
    ds = TJ.Dataset("const")
    for run in range(runs):
        v = rng.randint(300, 600)
        t = TJ.Trajectory(run, 0, 0, MetricVector(v, 5, v // 4, 8 * v))
        for _ in range(steps):
            r = rng.randrange(30)
            v += r % 7 - 3
            t.append(r, MetricVector(v, 5, v // 4, 8 * v))
        ds.trajectories.append(t)
    return ds


def test_context_model_fits_noiseless_constant_deltas():
    train, valid = _constant_delta_dataset(), _constant_delta_dataset(8, seed=1)
    cfg = prm.ContextConfig(context=1, hidden=16, epochs=400, lr=0.05, batch=16)
    model, report = prm.fit_context_model(train, cfg, "mig_nodes", valid)
    assert report.rmse < 1e-3
    again, _ = prm.fit_context_model(train, cfg, "mig_nodes", valid)
    assert (again.w1 == model.w1).all() and again.b2 == model.b2


# -- policy ------------------------------------------------------------------

def test_softmax_limits():
    assert pom.softmax_temperature([7, 7, 7, 7], 3) == [0.25] * 4
    p = pom.softmax_temperature([1, 500, 3000], 1e9)
    assert max(abs(v - 1 / 3) for v in p) < 1e-6
    a = pom.softmax_temperature([340, 350, 360], 5)
    b = pom.softmax_temperature([347, 357, 367], 5)
    assert max(abs(x - y) for x, y in zip(a, b)) < 1e-12


def test_sampling_examples():
    rng = random.Random(0)
    assert {pom.sample_action([1.0, 0.0, 0.0], rng) for _ in range(100)} == {0}
    rng = random.Random(42)
    n = 30000
    counts = [0] * 30
    for _ in range(n):
        counts[pom.sample_action([1 / 30] * 30, rng)] += 1
    sd = math.sqrt(n * (1 / 30) * (29 / 30))
    assert all(abs(c - n / 30) < 5 * sd for c in counts)
    seq = lambda: [pom.sample_action([0.2, 0.3, 0.5], random.Random(9)) for _ in range(5)]  # noqa: E731
    assert seq() == seq()


def test_select_step_examples():
    cur = MetricVector(100, 1, 1, 100)
    assert pom.action_distribution(PolicyConfig(), None, cur) == [1 / 30] * 30
    means = [0.0] * 30
    means[13] = -10.0
    model = prm.StatModel1SA("transistors", means, [1] * 30, 0.0)
    probs = pom.action_distribution(PolicyConfig(Mode.GUIDED_1SA, 0.1), model, cur)
    assert probs[13] > 0.999
    m2 = prm.fit_statistical_2sa(_toy())
    assert len(pom.select_step(PolicyConfig(Mode.GUIDED_2SA, 1), m2, cur, random.Random(0))) == 2


# -- engine ------------------------------------------------------------------

def _improver_params(start=100.0):
    rules = [synthetic.Rule(0.0, 1.0) for _ in range(29)] + [synthetic.Rule(-1.0)]
    return synthetic.SyntheticParams(tuple(rules), start=start)


def test_run_chain_examples():
    env = synthetic.SyntheticEnvironment(_improver_params(), 1)
    start = env.snapshot()
    empty = run_chain(env, start, 0, PolicyConfig(), None, random.Random(0), "transistors")
    assert len(empty.trajectory) == 0 and empty.best == start
    runs = []
    for _ in range(2):
        env.reseed(5)
        runs.append(run_chain(env, start, 200, PolicyConfig(), None, random.Random(3),
                              "transistors"))
    assert runs[0].trajectory.steps == runs[1].trajectory.steps
    assert runs[0].best_value < 100


def test_iism_select_examples():
    chains = [ChainResult(i, None, f"s{i}", f"b{i}", v) for i, v in enumerate([340, 338, 345])]
    assert iism_select(chains).best == "b1"
    assert iism_select(chains[:1]).best == "b0"


def test_single_chain_iteration_equals_run_chain():
    cfg = DseConfig(chain_length=30, seed=4)
    res = run_iterated(synthetic.default_bench(), cfg)
    env = synthetic.default_bench()
    env.reseed(derive_seed(4, 0, 0, 0, ENV_STREAM))
    chain = run_chain(env, env.snapshot(), 30, PolicyConfig(),
                      None, random.Random(derive_seed(4, 0, 0, 0, POLICY_STREAM)), "transistors")
    assert res.trajectories[0].steps == chain.trajectory.steps
    assert res.best_value == chain.best_value


def test_selected_best_is_non_increasing_over_iterations():
    cfg = DseConfig(chain_length=8, num_chains=2, num_iterations=6, seed=2)
    res = run_iterated(synthetic.default_bench(), cfg)
    starts = [res.trajectories[2 * i].initial.transistors for i in range(6)]
    assert starts == sorted(starts, reverse=True)


def test_run_experiment_examples():
    cfg = DseConfig(chain_length=40, runs=2, seed=8)
    a = run_experiment(cfg, None, synthetic.default_bench)
    b = run_experiment(cfg, None, synthetic.default_bench)
    assert [r.summary() for r in a] == [r.summary() for r in b]
    assert a[0].summary()["trace"] != a[1].summary()["trace"]
    assert sum(len(t) for r in a for t in r.trajectories) == cfg.budget


def test_paper_iism_setting_is_runnable():
    cfg = DseConfig(chain_length=50, num_chains=1, num_iterations=3, runs=2)
    assert len(run_experiment(cfg, None, synthetic.default_bench)) == 2


# -- synthetic bench ---------------------------------------------------------

def test_synthetic_rule_examples():
    rules = [synthetic.Rule(-5.0) for _ in range(29)] + [synthetic.Rule(-5.0, requires=3)]
    env = synthetic.SyntheticEnvironment(synthetic.SyntheticParams(tuple(rules), start=100))
    env.apply(0)
    assert env.size == 95
    env.apply(29)
    assert env.size == 95
    env.restore((52.0, None))
    env.apply(1)
    assert env.size == 50


# -- evaluation --------------------------------------------------------------

def test_success_fraction_and_speedup_examples():
    assert EV.success_fraction([340, 350, 360], 355) == pytest.approx(2 / 3)
    assert EV.success_fraction([340, 350, 360], 300) == 0
    assert EV.success_fraction([340, 350, 360], 400) == 1
    assert EV.speedup([1] * 8 + [9] * 2, [1] * 2 + [9] * 8, 1).speedup == pytest.approx(4.0)
    same = [3, 5, 7]
    assert EV.speedup(same, same, 5).speedup == 1.0
    assert EV.speedup([9, 9], [1, 9], 1).speedup == 0.0


def test_single_temperature_sweep():
    tr = run_experiment(DseConfig(chain_length=20, runs=10, seed=1), None,
                        synthetic.default_bench)
    model = prm.fit_statistical_1sa(results_dataset(tr))
    rows, _ = EV.temperature_sweep(DseConfig(chain_length=10, runs=5), [2.0], [199.0],
                                   model, synthetic.default_bench)
    assert [(r["temperature"], r["target"]) for r in rows] == [(2.0, 199.0), (math.inf, 199.0)]


def test_grid_cell_arithmetic_and_recount():
    rows, results = EV.iism_grid([10], [1], 200, DseConfig(seed=3), None,
                                 synthetic.default_bench)
    assert rows[0]["runs"] == 20
    bests = sorted(r.best_value for r in results[(10, 1)])
    assert rows[0]["min"] == bests[0]
    assert rows[0]["mean"] == pytest.approx(sum(bests) / len(bests))
    assert rows[0]["median"] == pytest.approx((bests[9] + bests[10]) / 2)
    assert rows[0]["min"] <= rows[0]["mean"] and rows[0]["min"] <= rows[0]["median"]


def test_emission_examples():
    assert EV.csv_text([], EV.GRID_COLUMNS) == ",".join(EV.GRID_COLUMNS) + "\n"
    rows = [{"temperature": 2.0, "target": 5.0, "speedup": 1.5}]
    assert EV.sweep_chart(rows) == EV.sweep_chart(rows)
