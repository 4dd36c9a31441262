import random
import statistics

import pytest
from conftest import random_netlist

from splitguard.defense import extract_netlist
from splitguard.netlist import Pin, parse_bench
from splitguard.physical import (LayoutError, Pad, Placement, RoutedLayout, Segment, Wire,
                                 beol_part, check_layout, distance_stats, layer_stats, merge,
                                 place, read_layout, route, split, split_with_truth,
                                 write_layout)
from splitguard.physical.stats import connection_distances, net_connections
from splitguard.sim import check_equivalence

CHAIN = "INPUT(a)\nOUTPUT(g3)\ng1 = NOT(a)\ng2 = NOT(g1)\ng3 = NOT(g2)"
PAIR = "INPUT(a)\nOUTPUT(g2)\ng1 = BUFF(a)\ng2 = BUFF(g1)"


def _pair_placement():
    pads = (Pad("a", "IN", 0, 3), Pad("g2", "OUT", 7, 3))
    return Placement(8, 8, (("g1", 3, 3), ("g2", 4, 3)), pads)


def _mean_pair_distance(n, p):
    return statistics.fmean(connection_distances(p, net_connections(n)))


def _assert_legal(n, p):
    sites = [(x, y) for _, x, y in p.locations]
    assert len(sites) == len(set(sites)) == len(n.gates)
    assert all(0 <= x < p.cols and 0 <= y < p.rows for x, y in sites)
    refs = [pad.ref for pad in p.pads]
    assert len(refs) == len(set(refs)) == len(n.inputs) + len(n.outputs)
    for pad in p.pads:
        assert pad.x in (0, p.cols - 1) or pad.y in (0, p.rows - 1)


def test_single_gate_at_centre():
    n = parse_bench("INPUT(a)\nOUTPUT(y)\ny = NOT(a)")
    for side in (3, 5, 8):
        p = place(n, min_side=side)
        assert p.loc["y"] == (p.cols // 2, p.rows // 2)


def test_chain_beats_random_placements():
    n = parse_bench(CHAIN)
    p = place(n, min_side=6)
    ours = _mean_pair_distance(n, p)
    rng = random.Random(0)
    sites = [(x, y) for x in range(p.cols) for y in range(p.rows)]
    baseline = []
    for _ in range(100):
        picks = rng.sample(sites, 3)
        q = Placement(p.cols, p.rows, tuple((g, *xy) for g, xy in zip(("g1", "g2", "g3"), picks)),
                      p.pads)
        baseline.append(_mean_pair_distance(n, q))
    assert ours < statistics.fmean(baseline)


def test_c432_placement_is_legal(c432):
    p = place(c432, utilization=0.6)
    _assert_legal(c432, p)
    assert len(c432.gates) / (p.cols * p.rows) <= 0.6 + 1e-9


def test_placement_is_deterministic_and_round_trips(c17):
    a, b = place(c17, seed=4), place(c17, seed=4)
    assert a == b
    assert Placement.from_text(a.to_text()) == a


def test_adjacent_cells_stay_low():
    n = parse_bench(PAIR)
    layout = route(_pair_placement(), n)
    w = layout.wire_map["g1"]
    assert all(s.layer <= 2 for s in w.segments)
    assert all(v.k == 1 for v in w.vias)
    assert layer_stats(layout).vias_above(2) == 0


def test_minimum_layer_forces_via_stacks():
    n = parse_bench(PAIR)
    plain = layer_stats(route(_pair_placement(), n))
    lifted_layout = route(_pair_placement(), n, {"g1": 6})
    lifted = layer_stats(lifted_layout)
    assert lifted.vias[4] == plain.vias[4] + 2
    w = lifted_layout.wire_map["g1"]
    assert all(s.layer >= 6 for s in w.segments)
    for x in (3, 4):
        assert {1, 2, 3, 4, 5} <= {v.k for v in w.vias if (v.x, v.y) == (x, 3)}


def test_layer_stats_identities(c17):
    empty = layer_stats(RoutedLayout(4, 4, (), ()))
    assert empty.total_wirelength == 0 and empty.total_vias == 0
    one = RoutedLayout(12, 2, (), (), wires=(Wire("w", (), 1, (Segment(1, 0, 0, 10, 0),)),))
    st = layer_stats(one)
    assert st.wirelength[0] == 10 and st.total_wirelength == 10 and st.total_vias == 0
    layout = route(place(c17), c17)
    st = layer_stats(layout)
    assert st.total_wirelength == sum(w.wirelength for w in layout.wires)
    assert sum(st.to_json()[f"M{i}"] for i in range(1, 11)) == st.total_wirelength


def test_distance_stats_basics():
    p = Placement(8, 8, (("g", 3, 4),), (Pad("a", "IN", 0, 0), Pad("g", "OUT", 3, 4)))
    st = distance_stats(p, [("a", Pin("g", 0))])
    assert (st.mean, st.median, st.stddev, st.count) == (7, 7, 0, 1)
    assert distance_stats(p, [("a", Pin("g", 0))], "euclidean").mean == 5
    same = Placement(8, 8, (("g1", 2, 2), ("g2", 2, 2)), ())
    st = distance_stats(same, [("g1", Pin("g2", 0))])
    assert (st.mean, st.median, st.stddev) == (0, 0, 0)
    with pytest.raises(ValueError):
        distance_stats(p, [])


def test_split_without_upper_wiring_has_no_vpins():
    n = parse_bench(PAIR)
    layout = route(_pair_placement(), n)
    assert layer_stats(layout).wirelength_above(3) == 0
    assert split(layout, 3).vpins == ()


def test_lifted_two_pin_net_gives_two_vpins():
    n = parse_bench(PAIR)
    layout = route(_pair_placement(), n, {"g1": 6})
    view, truth = split_with_truth(layout, 5)
    assert len(view.vpins) == 2
    assert sorted(v.role for v in view.vpins) == ["driver", "sink"]
    sink = next(v for v in view.vpins if v.role == "sink")
    drv = next(v for v in view.vpins if v.role == "driver")
    assert truth.true_driver(sink.fragment) == drv.fragment


def _scan_vpins(layout_text: str, k: int) -> int:
    count = 0
    for line in layout_text.splitlines():
        f = line.split()
        if f and f[0] == "VIA" and int(f[2]) == k:
            count += 1
    return count


def test_vpins_match_independent_scan(protected_c432):
    layout = protected_c432.restored
    for k in (3, 4, 5):
        assert len(split(layout, k).vpins) == _scan_vpins(write_layout(layout), k)


def test_split_merge_lossless(c17, protected_c432):
    for layout in (route(place(c17), c17), protected_c432.erroneous):
        for k in (1, 3, 4, 7):
            back = merge(split(layout, k), beol_part(layout, k))
            assert write_layout(back) == write_layout(layout)


def test_split_view_text_round_trip(protected_c432):
    view = split(protected_c432.restored, 4)
    assert type(view).from_text(view.to_text()) == view


def test_split_layer_range(c17):
    layout = route(place(c17), c17)
    for k in (0, 10):
        with pytest.raises(ValueError):
            split(layout, k)


def test_route_extract_round_trip(c17, c432):
    for n in (c17, c432):
        layout = route(place(n), n)
        check_layout(layout)
        assert check_equivalence(extract_netlist(layout), n).equivalent


def test_random_netlists_route_cleanly():
    rng = random.Random(5)
    for i in range(5):
        n = random_netlist(rng, 4, 25)
        layout = route(place(n, seed=i), n)
        check_layout(layout)
        assert check_equivalence(extract_netlist(layout), n).equivalent


def test_check_layout_catches_breaks(c17):
    layout = route(place(c17), c17)
    longest = max(layout.wires, key=lambda w: len(w.segments))
    broken = Wire(longest.name, longest.pins, longest.min_layer, longest.segments[1:],
                  longest.vias)
    bad = layout.with_wires([broken if w.name == longest.name else w for w in layout.wires])
    with pytest.raises(LayoutError):
        check_layout(bad)


def test_layout_text_is_deterministic(c432):
    a = write_layout(route(place(c432, seed=2), c432))
    b = write_layout(route(place(c432, seed=2), c432))
    assert a == b
    assert write_layout(read_layout(a)) == a
