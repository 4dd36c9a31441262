import pytest

from splitguard.netlist import detect_loop
from splitguard.synth import synthesize


@pytest.mark.parametrize("gates", [1, 10, 500, 3000])
def test_shape(gates):
    n = synthesize(gates, seed=1)
    assert len(n.gates) == gates
    assert detect_loop(n) == []
    assert n.outputs and len(n.inputs) == max(2, round(1.5 * gates ** 0.6))


def test_deterministic_per_seed():
    assert synthesize(300, seed=4) == synthesize(300, seed=4)
    assert synthesize(300, seed=4) != synthesize(300, seed=5)


def test_every_gate_is_used():
    n = synthesize(2000, seed=0)
    read = {x for g in n.gates for x in g.inputs} | set(n.outputs)
    assert all(g.name in read for g in n.gates)


def test_bad_arguments():
    with pytest.raises(ValueError):
        synthesize(0)
    with pytest.raises(ValueError):
        synthesize(10, rent=1.2)
