import random

import pytest
from hypothesis import strategies as st

from splitguard.defense import protect
from splitguard.netlist import ARITY, KINDS, Gate, Netlist
from splitguard.report import load_benchmark

ISCAS = ("c432", "c880", "c1355", "c1908", "c2670", "c3540", "c5315", "c7552")

C17 = """\
# c17
INPUT(1)
INPUT(2)
INPUT(3)
INPUT(6)
INPUT(7)
OUTPUT(22)
OUTPUT(23)
10 = NAND(1, 3)
11 = NAND(3, 6)
16 = NAND(2, 11)
19 = NAND(11, 7)
22 = NAND(10, 16)
23 = NAND(16, 19)
"""


@pytest.fixture(scope="session")
def c17():
    return load_benchmark("c17")


@pytest.fixture(scope="session")
def c432():
    return load_benchmark("c432")


@pytest.fixture(scope="session")
def c880():
    return load_benchmark("c880")


@pytest.fixture(scope="session")
def protected_c432(c432):
    return protect(c432, seed=0)


def random_netlist(rng: random.Random, num_inputs: int, num_gates: int, name="rnd") -> Netlist:
    """Acyclic netlist in which every gate reads earlier nets only."""
    nets = [f"i{k}" for k in range(num_inputs)]
    gates = []
    for k in range(num_gates):
        kind = rng.choice(KINDS)
        ins = tuple(rng.choice(nets) for _ in range(ARITY[kind]))
        gates.append(Gate(f"g{k}", kind, ins))
        nets.append(f"g{k}")
    read = {x for g in gates for x in g.inputs}
    outs = [g.name for g in gates if g.name not in read] or [gates[-1].name]
    return Netlist(tuple(nets[:num_inputs]), tuple(outs), tuple(gates), name)


@st.composite
def netlists(draw, max_inputs=6, max_gates=14):
    seed = draw(st.integers(0, 2**32 - 1))
    k = draw(st.integers(1, max_inputs))
    g = draw(st.integers(1, max_gates))
    return random_netlist(random.Random(seed), k, g)


# One line per acceptance criterion, printed after the run.
ACCEPTANCE: list[tuple[str, bool, str]] = []


def record(name: str, ok: bool, detail: str) -> bool:
    ACCEPTANCE.append((name, bool(ok), detail))
    print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
