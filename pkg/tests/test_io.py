import pytest
from hypothesis import given, settings, strategies as st

from migdse import benchmarks
from migdse import io as IO
from migdse.mig import Mig, Verdict, check_equivalence, evaluate, negate, node_count

from _corpus import random_mig

AND_EXAMPLE = "aag 3 2 0 1 1\n2\n4\n6\n6 2 4\n"


def test_aiger_and_example_round_trips_byte_for_byte():
    aig = IO.parse_aiger_ascii(AND_EXAMPLE)
    assert aig.num_pis == 2 and aig.ands == [(2, 4)] and aig.pos == [6]
    assert IO.write_aiger_ascii(aig) == AND_EXAMPLE


def test_aiger_symbols_and_comments():
    text = "aag 3 2 0 1 1\n2\n4\n7\n6 4 2\ni0 a\ni1 b\no0 nand\nc\nfree text\n"
    aig = IO.parse_aiger_ascii(text)
    assert aig.input_names == ["a", "b"] and aig.output_names == ["nand"]
    out = IO.write_aiger_ascii(aig)
    assert out.endswith("i0 a\ni1 b\no0 nand\n")
    assert IO.parse_aiger_ascii(out).pos == aig.pos


def test_aiger_out_of_order_ands_are_sorted():
    text = "aag 4 2 0 1 2\n2\n4\n8\n8 6 2\n6 2 4\n"
    m = IO.parse_aiger_mig(text)
    assert node_count(m) == 2
    ref = Mig(2)
    a, b = ref.pis()
    ref.add_po(ref.make_maj(a, b, 0))
    assert check_equivalence(m, ref).verdict is Verdict.EQUIVALENT


@pytest.mark.parametrize("text, fragment", [
    ("aig 1 1 0 0 0\n2\n", "header"),
    ("aag 1 1 1 0 0\n2\n", "latches"),
    ("aag 1 2 0 0 0\n2\n4\n", "smaller than"),
    ("aag 2 1 0 1 1\n2\n4\n4 2 8\n", "exceeds"),
    ("aag 3 1 0 1 1\n2\n4\n4 2 6\n", "undefined"),
    ("aag 3 1 0 1 2\n2\n4\n4 2 6\n6 2 4\n", "cycle"),
    ("aag 2 1 0 1 1\n2\n4\n2 2 2\n", "defined twice"),
    ("aag 2 1 0 1 1\n2\n4\n", "end of file"),
    ("aag 1 1 0 0 0\n3\n", "even"),
])
def test_aiger_errors_carry_line_numbers(text, fragment):
    with pytest.raises(IO.ParseError) as err:
        IO.parse_aiger_ascii(text)
    assert fragment in str(err.value)
    assert err.value.line is not None


def test_blif_majority_cover_is_one_node():
    text = """.model t
.inputs a b c
.outputs y
.names a b c y
11- 1
1-1 1
-11 1
.end
"""
    m = IO.parse_blif(text)
    assert node_count(m) == 1


def test_blif_complemented_majority_and_offset_cover():
    text = """.model t
.inputs a b c
.outputs y z
.names a b c y
01- 1
0-1 1
-11 1
.names a b z
11 0
.end
"""
    m = IO.parse_blif(text)
    ref = Mig(3)
    a, b, c = ref.pis()
    ref.add_po(ref.make_maj(negate(a), b, c))
    ref.add_po(negate(ref.make_maj(a, b, 0)))
    assert check_equivalence(m, ref).verdict is Verdict.EQUIVALENT
    assert node_count(m) == 2


def test_blif_constants_continuations_and_comments():
    text = """# comment
.model t
.inputs a \\
 b
.outputs one zero y
.names one
1
.names zero
.names a b y  # and
11 1
.end
"""
    m = IO.parse_blif(text)
    assert evaluate(m, [1, 1]) == [1, 0, 1]
    assert evaluate(m, [1, 0]) == [1, 0, 0]


@pytest.mark.parametrize("text, fragment", [
    (".model t\n.inputs a\n.outputs y\n.latch a y re clk 0\n.end\n", "latch"),
    (".model t\n.inputs a\n.outputs y\n.names a q y\n11 1\n.end\n", "q"),
    (".model t\n.inputs a b\n.outputs y\n.names a b y\n11 1\n00 0\n.end\n", "mix"),
    (".model t\n.inputs a\n.outputs y\n.names a y\n1 1\n.names a y\n0 1\n.end\n", "twice"),
])
def test_blif_errors(text, fragment):
    with pytest.raises(IO.ParseError) as err:
        IO.parse_blif(text)
    assert fragment in str(err.value).lower()


def test_blif_writer_names_and_pass_through_outputs():
    m = Mig(2, ["a", "b"])
    a, b = m.pis()
    m.add_po(a, "a")
    m.add_po(negate(m.make_maj(a, b, 1)), "nor")
    text = IO.write_blif(m)
    again = IO.parse_blif(text)
    assert again.input_names == ["a", "b"]
    assert check_equivalence(m, again).verdict is Verdict.EQUIVALENT


@pytest.mark.parametrize("name", benchmarks.names())
def test_second_generation_emission_is_a_fixed_point(name):
    m = benchmarks.load(name)
    aag2 = IO.write_aiger_mig(IO.parse_aiger_mig(IO.write_aiger_mig(m)))
    assert IO.write_aiger_mig(IO.parse_aiger_mig(aag2)) == aag2
    blif2 = IO.write_blif(IO.parse_blif(IO.write_blif(m)))
    assert IO.write_blif(IO.parse_blif(blif2)) == blif2


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 9))
def test_conversions_preserve_function(seed, n):
    m = random_mig(seed, num_pis=n, num_nodes=30, and_bias=0.4)
    via_aig = IO.parse_aiger_mig(IO.write_aiger_mig(m))
    via_blif = IO.parse_blif(IO.write_blif(m))
    assert check_equivalence(m, via_aig).verdict is Verdict.EQUIVALENT
    assert check_equivalence(m, via_blif).verdict is Verdict.EQUIVALENT
    # majority nodes survive BLIF as single nodes
    assert node_count(via_blif) <= node_count(m)


def test_read_write_circuit_by_extension(tmp_path):
    m = benchmarks.load("dec")
    for ext in (".aag", ".blif"):
        p = tmp_path / f"c{ext}"
        IO.write_circuit(m, str(p))
        assert check_equivalence(m, IO.read_circuit(str(p))).verdict is Verdict.EQUIVALENT
    with pytest.raises(ValueError):
        IO.write_circuit(m, str(tmp_path / "c.v"))
