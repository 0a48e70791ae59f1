import itertools
import pickle

import pytest
from hypothesis import given, settings, strategies as st

from migdse import mig as M
from migdse.mig import CONST0, CONST1, Mig, MigError, Verdict, negate

from _corpus import random_mig


def maj(a, b, c):
    return (a & b) | (a & c) | (b & c)


def test_literal_helpers():
    assert M.lit(3) == 6 and M.lit(3, True) == 7
    assert M.node_of(7) == 3 and M.is_complemented(7)
    assert negate(negate(10)) == 10
    assert CONST1 == negate(CONST0)


def test_trivial_majorities_fold_without_nodes():
    m = Mig(2)
    x, y = m.pis()
    assert m.make_maj(x, x, y) == x
    assert m.make_maj(x, negate(x), y) == y
    assert m.make_maj(x, y, y) == y
    assert m.make_maj(CONST0, CONST1, x) == x
    assert m.num_allocated == 0


def test_structural_hashing_and_self_duality():
    m = Mig(3)
    a, b, c = m.pis()
    s1 = m.make_maj(a, b, c)
    assert m.make_maj(c, a, b) == s1
    # MAJ(~a, ~b, ~c) is the complement of MAJ(a, b, c) and shares its node
    assert m.make_maj(negate(a), negate(b), negate(c)) == negate(s1)
    assert m.make_maj(negate(a), negate(b), c) == negate(m.make_maj(a, b, negate(c)))
    assert m.num_allocated == 2
    m.validate()


def test_make_maj_rejects_unknown_signals():
    m = Mig(1)
    with pytest.raises(MigError):
        m.make_maj(2, 4, 0)
    with pytest.raises(MigError):
        m.add_po(99)
    with pytest.raises(MigError):
        m.pi(1)


def test_lookup_does_not_allocate():
    m = Mig(3)
    a, b, c = m.pis()
    assert m.lookup(a, b, c) is None
    s = m.make_maj(a, b, c)
    assert m.lookup(negate(a), negate(b), negate(c)) == negate(s)
    assert m.num_allocated == 1


def test_add_raw_keeps_polarity_and_shares_duals():
    m = Mig(3)
    a, b, c = m.pis()
    s = m.add_raw(negate(a), negate(b), c)
    assert m.fanins(s >> 1) == tuple(sorted((negate(a), negate(b), c)))
    assert m.add_raw(a, b, negate(c)) == negate(s)
    assert m.make_maj(a, b, negate(c)) == negate(s)


def test_node_count_depth_and_cleanup():
    m = Mig(3)
    a, b, c = m.pis()
    x = m.make_maj(a, b, 0)
    m.make_maj(a, c, 1)  # dangling
    y = m.make_maj(x, c, 0)
    m.add_po(y)
    assert M.node_count(m) == 2
    assert M.depth(m) == 2
    clean = M.cleanup_dangling(m)
    assert clean.num_allocated == 2
    assert M.check_equivalence(m, clean).verdict is Verdict.EQUIVALENT
    clean.validate()


def test_empty_and_wire_only_circuits():
    m = Mig(2)
    assert M.node_count(m) == 0 and M.depth(m) == 0
    m.add_po(negate(m.pi(1)))
    assert M.node_count(m) == 0
    assert M.evaluate(m, [0, 0]) == [1]


def test_simulation_matches_scalar_evaluation():
    m = random_mig(5, num_pis=5, num_nodes=40)
    tt = M.simulate_full(m)
    for row in range(32):
        bits = [(row >> i) & 1 for i in range(5)]
        assert M.evaluate(m, bits) == [tt.bit(k, row) for k in range(m.num_pos)]


def test_var_table():
    assert M.var_table(0, 2) == 0b1010
    assert M.var_table(1, 2) == 0b1100
    assert M.var_table(2, 3) == 0b11110000


def test_check_equivalence_verdicts_and_counterexample():
    a = Mig(3)
    x, y, z = a.pis()
    a.add_po(a.make_maj(x, y, z))
    b = Mig(3)
    x, y, z = b.pis()
    # majority rebuilt from AND/OR
    b.add_po(b.make_maj(b.make_maj(x, y, 0), b.make_maj(z, b.make_maj(x, y, 1), 0), 1))
    assert M.check_equivalence(a, b).verdict is Verdict.EQUIVALENT
    c = Mig(3)
    x, y, z = c.pis()
    c.add_po(c.make_maj(x, y, 0))
    res = M.check_equivalence(a, c)
    assert res.verdict is Verdict.NOT_EQUIVALENT and not res
    # lowest differing row: x=1, y=0, z=1 has MAJ=1, AND=0 (row 5); row 3 is x=1,y=1 (equal)
    assert res.counterexample == [1, 0, 1]
    assert M.evaluate(a, res.counterexample) != M.evaluate(c, res.counterexample)


def test_check_equivalence_random_above_exhaustive_limit():
    n = M.EXHAUSTIVE_LIMIT + 2
    a = Mig(n)
    acc = a.pi(0)
    for s in a.pis()[1:]:
        acc = a.make_maj(acc, s, 0)
    a.add_po(acc)
    b = a.copy()
    assert M.check_equivalence(a, b).verdict is Verdict.PROBABLY_EQUIVALENT


def test_interface_mismatch():
    with pytest.raises(MigError):
        M.check_equivalence(Mig(2), Mig(3))


def test_capacity_limit():
    with pytest.raises(M.CapacityError):
        M.simulate_full(Mig(M.SIMULATION_LIMIT + 1))


def test_pickle_round_trip():
    m = random_mig(3)
    again = pickle.loads(pickle.dumps(m))
    assert again.key() == m.key()


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 7))
def test_majority_semantics_of_random_graphs(seed, n):
    m = random_mig(seed, num_pis=n, num_nodes=25)
    m.validate()
    fan = m._fanins
    for bits in itertools.islice(itertools.product((0, 1), repeat=n), 16):
        vals = [0] + list(bits)
        for node in m.nodes():
            a, b, c = (vals[s >> 1] ^ (s & 1) for s in fan[node])
            vals.append(maj(a, b, c))
        expect = [vals[s >> 1] ^ (s & 1) for s in m.pos]
        assert M.evaluate(m, list(bits)) == expect
