import numpy as np
import pytest
from conftest import netlists
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import evaluate, truth_table

from splitguard.netlist import Gate, Netlist, parse_bench
from splitguard.sim import (PatternMismatchError, PatternSet, Verdict, check_equivalence,
                            pack_bits, score, simulate, unpack_bits)


def _outputs_as_rows(n, p):
    sim = simulate(n, p)
    return [{po: int(unpack_bits(sim[po], p.num_patterns)[j]) for po in n.outputs}
            for j in range(p.num_patterns)]


def _invert_output(n: Netlist, po: str) -> Netlist:
    """Same function except ``po`` is complemented (driver renamed, INV on top)."""
    inner = po + "__pre"
    while inner in n.gate_map:
        inner += "_"
    gates = []
    for g in n.gates:
        ins = tuple(inner if x == po else x for x in g.inputs)
        gates.append(Gate(inner if g.name == po else g.name, g.kind, ins))
    gates.append(Gate(po, "INV", (inner,)))
    return Netlist(n.inputs, n.outputs, tuple(gates), n.name)


def test_c17_truth_table(c17):
    p = PatternSet.all_patterns(c17.inputs)
    assert _outputs_as_rows(c17, p) == truth_table(c17)


@settings(max_examples=80)
@given(netlists(max_inputs=10, max_gates=30))
def test_simulator_matches_truth_table(n):
    p = PatternSet.all_patterns(n.inputs)
    assert _outputs_as_rows(n, p) == truth_table(n)


def test_random_patterns_match_evaluator(c432):
    p = PatternSet.random(c432.inputs, 200, seed=3)
    rows = _outputs_as_rows(c432, p)
    for j in range(0, 200, 17):
        assert rows[j] == evaluate(c432, p.column(j))


def test_all_patterns_layout():
    p = PatternSet.all_patterns(("a", "b", "c"))
    assert p.num_patterns == 8 and p.exhaustive
    assert [p.column(j) for j in (0, 5)] == [{"a": 0, "b": 0, "c": 0}, {"a": 1, "b": 0, "c": 1}]


def test_for_budget_switches_to_sampling():
    assert PatternSet.for_budget(("a", "b"), 4).exhaustive
    p = PatternSet.for_budget(("a", "b", "c"), 4, seed=9)
    assert not p.exhaustive and p.num_patterns == 4 and p.seed == 9


@given(st.lists(st.booleans(), max_size=200))
def test_pack_unpack_round_trip(bits):
    assert unpack_bits(pack_bits(bits), len(bits)).tolist() == bits


def test_pattern_text_round_trip():
    p = PatternSet.random(("x", "y", "z", "w", "v"), 130, seed=7)
    q = PatternSet.from_text(p.to_text())
    assert q.inputs == p.inputs and q.num_patterns == 130 and q.seed == 7
    assert np.array_equal(q.bits, p.bits)


def test_random_tail_bits_are_clear():
    p = PatternSet.random(("a",), 70, seed=0)
    assert int(p.bits[0, 1]) >> 6 == 0


@given(netlists(), st.integers(0, 1000))
def test_score_against_self_is_zero(n, seed):
    s = score(n, n, PatternSet.random(n.inputs, 300, seed))
    assert (s.oer, s.hd) == (0.0, 0.0)


def test_inverted_output(c17):
    m = _invert_output(c17, "22")
    s = score(c17, m, PatternSet.all_patterns(c17.inputs))
    assert s.oer == 1.0 and s.hd == pytest.approx(1 / len(c17.outputs))


def test_zero_patterns(c17):
    p = PatternSet.random(c17.inputs, 0)
    assert simulate(c17, p)["22"].shape == (0,)
    s = score(c17, _invert_output(c17, "23"), p)
    assert (s.oer, s.hd, s.num_patterns) == (0.0, 0.0, 0)


def test_block_size_does_not_matter(c880):
    p = PatternSet.random(c880.inputs, 64 * 37 + 5, seed=1)
    a = simulate(c880, p, block_words=1)
    b = simulate(c880, p, block_words=256)
    assert all(np.array_equal(a[o], b[o]) for o in c880.outputs)
    bad = _invert_output(c880, c880.outputs[0])
    assert score(c880, bad, p, block_words=3) == score(c880, bad, p, block_words=100)


def test_port_mismatch(c17):
    other = parse_bench("INPUT(1)\nOUTPUT(22)\n22 = NOT(1)")
    with pytest.raises(PatternMismatchError):
        score(c17, other, PatternSet.all_patterns(c17.inputs))
    with pytest.raises(PatternMismatchError):
        simulate(c17, PatternSet.all_patterns(("1", "2")))


def test_pattern_input_order_is_irrelevant(c17):
    fwd = PatternSet.all_patterns(c17.inputs)
    rev = PatternSet(tuple(reversed(fwd.inputs)), fwd.bits[::-1].copy(), fwd.num_patterns)
    a, b = simulate(c17, fwd), simulate(c17, rev)
    assert all(np.array_equal(a[o], b[o]) for o in c17.outputs)


def test_equivalence_verdicts(c17):
    assert check_equivalence(c17, c17).verdict is Verdict.EQUIV_EXHAUSTIVE
    assert check_equivalence(c17, c17, budget=16).verdict is Verdict.EQUIV_SAMPLED
    twice = _invert_output(_invert_output(c17, "23"), "23")
    assert check_equivalence(c17, twice).equivalent
    bad = _invert_output(c17, "23")
    res = check_equivalence(c17, bad)
    assert res.verdict is Verdict.DIFFERENT and not res
    assert evaluate(c17, res.witness) != evaluate(bad, res.witness)


def test_equivalence_witness_on_single_minterm():
    a = parse_bench("INPUT(x)\nINPUT(y)\nOUTPUT(o)\no = AND(x, y)")
    b = parse_bench("INPUT(x)\nINPUT(y)\nOUTPUT(o)\no = BUFF(x)")
    res = check_equivalence(a, b)
    assert res.witness == {"x": 1, "y": 0}
