import inspect
import itertools
import math
import random

import pytest
from conftest import random_netlist
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import hungarian_reference, permutation_minimum

from splitguard.attack import (AttackResult, HintConfig, assignment_cost, crouting_attack,
                               min_cost_assignment, proximity_attack, score_ccr, score_crouting,
                               solution_space)
from splitguard.netlist import detect_loop, parse_bench
from splitguard.physical import Pad, Placement, place, route, split, split_with_truth

PAIR = "INPUT(a)\nOUTPUT(g2)\ng1 = BUFF(a)\ng2 = BUFF(g1)"


def _dense(cost):
    return [[(c, d) for d, c in enumerate(row)] for row in cost]


def _random_cost(rng, ns, nd, hi=40):
    return [[rng.randint(0, hi) for _ in range(nd)] for _ in range(ns)]


def test_matching_3x3_permutations():
    cost = [[4, 1, 3], [2, 0, 5], [3, 2, 2]]
    match = min_cost_assignment(_dense(cost), [1, 1, 1])
    assert sorted(match) == [0, 1, 2]
    best = min(sum(cost[s][d] for s, d in enumerate(p)) for p in itertools.permutations(range(3)))
    assert assignment_cost(_dense(cost), match) == best == 5


def test_matching_single_pair_ignores_distance():
    assert min_cost_assignment([[(10**6, 0)]], [1]) == [0]


def test_matching_against_permutations():
    rng = random.Random(11)
    for _ in range(100):
        nd = rng.randint(1, 8)
        ns = rng.randint(1, nd)
        cost = _random_cost(rng, ns, nd)
        match = min_cost_assignment(_dense(cost), [1] * nd)
        assert -1 not in match and len(set(match)) == ns
        assert assignment_cost(_dense(cost), match) == permutation_minimum(cost)


@st.composite
def matching_instances(draw):
    ns = draw(st.integers(1, 8))
    nd = draw(st.integers(1, 8))
    cands = []
    for _ in range(ns):
        ds = draw(st.lists(st.integers(0, nd - 1), unique=True, max_size=nd))
        cands.append([(draw(st.integers(0, 30)), d) for d in ds])
    caps = draw(st.lists(st.integers(1, 3), min_size=nd, max_size=nd))
    bonus = draw(st.sampled_from([0, 5, 1000]))
    return cands, caps, bonus


@settings(max_examples=300)
@given(matching_instances())
def test_matching_against_hungarian(inst):
    cands, caps, bonus = inst
    match = min_cost_assignment(cands, caps, bonus)
    for s, d in enumerate(match):
        assert d == -1 or d in {dd for _, dd in cands[s]}
    use = [match.count(d) for d in range(len(caps))]
    assert all(u <= c for u, c in zip(use, caps))
    assigned, objective = hungarian_reference(cands, caps, bonus)
    assert sum(d >= 0 for d in match) == assigned
    assert assignment_cost(cands, match, bonus) == objective


def _pair_layout():
    pads = (Pad("a", "IN", 0, 3), Pad("g2", "OUT", 7, 3))
    p = Placement(8, 8, (("g1", 1, 1), ("g2", 6, 6)), pads)
    return route(p, parse_bench(PAIR), {"g1": 6})


def test_one_driver_one_sink():
    view, truth = split_with_truth(_pair_layout(), 5)
    result = proximity_attack(view)
    assert result.unassigned == () and len(result.assignment) == 1
    assert score_ccr(result, view, truth).per_net == 1.0


def _lifted_view(n, k, seed=0, frac=0.5):
    rng = random.Random(seed)
    nets = [g.name for g in n.gates if rng.random() < frac]
    return split_with_truth(route(place(n, seed=seed), n, {x: 6 for x in nets}), k)


def test_attack_cost_is_assignment_optimum(c17):
    view, _ = _lifted_view(c17, 5, frac=1.0)
    hints = HintConfig(use_loop_avoidance=False, fanout_cap=1, use_dangling_direction=False,
                       candidates=10**6, cover_drivers=False)
    sinks, drivers = view.sink_vpins(), view.driver_vpins()
    assert 0 < len(sinks) <= len(drivers)
    dist = [[abs(s.x - d.x) + abs(s.y - d.y) for d in drivers] for s in sinks]
    result = proximity_attack(view, hints)
    assert result.unassigned == ()
    assert result.cost == hungarian_reference(_dense(dist), [1] * len(drivers))[1]


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_loop_avoidance_is_sound(seed):
    n = random_netlist(random.Random(seed), 5, 30)
    view, _ = _lifted_view(n, 3, seed)
    assert detect_loop(proximity_attack(view).netlist) == []


def test_protected_recoveries_are_acyclic(protected_c432):
    for k in (3, 4, 5):
        view = split(protected_c432.restored, k)
        result = proximity_attack(view)
        assert detect_loop(result.netlist) == []
        assert len(result.driver_of) + len(result.unassigned) == len(view.sink_vpins())


def test_attack_is_deterministic(protected_c432):
    view = split(protected_c432.restored, 4)
    a, b = proximity_attack(view), proximity_attack(view)
    assert a == b and a.to_json() == b.to_json()


def test_attacks_cannot_see_truth():
    assert list(inspect.signature(proximity_attack).parameters) == ["view", "hints"]
    assert list(inspect.signature(crouting_attack).parameters) == ["view", "bboxes"]


def test_hint_config_validation():
    for bad in (dict(use_proximity=False), dict(fanout_cap=0), dict(candidates=0)):
        with pytest.raises(ValueError):
            HintConfig(**bad)
    assert HintConfig(use_dangling_direction=False).penalty(None) == 0


def test_result_json_round_trip(protected_c432):
    view = split(protected_c432.restored, 3)
    result = proximity_attack(view)
    back = AttackResult.from_json(result.to_json(), result.netlist)
    assert back == result


def _truthful(view, truth):
    first = {}
    for v in view.driver_vpins():
        first.setdefault(v.fragment, v.id)
    assignment = {}
    for s in view.sink_vpins():
        d = first[truth.true_driver(s.fragment)]
        assignment.setdefault(d, []).append(s.id)
    return AttackResult({d: tuple(v) for d, v in assignment.items()}, (), None, 0, 0, {})


def test_ccr_extremes(protected_c432):
    view, truth = split_with_truth(protected_c432.restored, 4)
    perfect = score_ccr(_truthful(view, truth), view, truth)
    assert perfect.per_net == 1.0 and perfect.per_sink == 1.0
    one = view.driver_vpins()[0].id
    lumped = AttackResult({one: tuple(s.id for s in view.sink_vpins())}, (), None, 0, 0, {})
    assert score_ccr(lumped, view, truth).per_net < 1.0
    nets = protected_c432.ledger.randomized_nets
    assert score_ccr(_truthful(view, truth), view, truth, nets).per_net == 1.0
    assert score_ccr(lumped, view, truth, []).per_net is None


def test_ccr_rejects_foreign_result(protected_c432, c432):
    a, truth = split_with_truth(protected_c432.restored, 3)
    b = split(route(place(c432), c432), 3)
    with pytest.raises(ValueError):
        score_ccr(proximity_attack(b), a, truth)
    with pytest.raises(ValueError):
        score_crouting(crouting_attack(b), a, truth)


def test_crouting_monotone_and_bbox_zero(protected_c432):
    view, truth = split_with_truth(protected_c432.restored, 4)
    report = score_crouting(crouting_attack(view, (0, 15, 30, 45, 10**4)), view, truth)
    sizes = [r.expected_list_size for r in report.rows]
    hits = [r.match_in_list for r in report.rows]
    assert sizes == sorted(sizes) and hits == sorted(hits)
    sinks, drivers = view.sink_vpins(), view.driver_vpins()
    same = sum((s.x, s.y) == (d.x, d.y) for s in sinks for d in drivers)
    assert sizes[0] == pytest.approx(same / len(sinks))
    assert sizes[-1] == len(drivers) and hits[-1] == 1.0
    assert report.num_vpins == len(view.vpins)
    with pytest.raises(ValueError):
        crouting_attack(view, (-1,))


def test_solution_space():
    one = solution_space(1, 1.4)
    assert (one.full, one.confined) == (0.0, 0.0)
    for n in (2, 10, 57, 200):
        assert solution_space(n).full == pytest.approx(math.log10(math.factorial(n)), abs=1e-9)
    assert solution_space(500, 1.4).confined == pytest.approx(500 * math.log10(1.4))
    assert solution_space(500).confined is None
    assert solution_space(3, 5.0).confined == solution_space(3).full
    with pytest.raises(ValueError):
        solution_space(-1)
