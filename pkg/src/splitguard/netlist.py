"""Gate-level combinational netlists: ``.bench`` I/O, validation and rewiring.

A :class:`Netlist` is an immutable value.  Every gate drives exactly one
net, which carries the gate's name; primary inputs drive the remaining
nets.  Sinks are gate input pins (:class:`Pin`) and, separately, primary
outputs, which are identified by the name of the net they observe.
"""

from __future__ import annotations

import heapq
import re
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple

KINDS = ("INV", "BUF", "AND2", "NAND2", "OR2", "NOR2", "XOR2", "XNOR2")
ARITY = {k: (1 if k in ("INV", "BUF") else 2) for k in KINDS}

_FROM_BENCH = {
    "NOT": "INV", "INV": "INV", "BUF": "BUF", "BUFF": "BUF",
    "AND": "AND2", "NAND": "NAND2", "OR": "OR2", "NOR": "NOR2",
    "XOR": "XOR2", "XNOR": "XNOR2",
}
_FROM_BENCH.update({k: k for k in KINDS})
_TO_BENCH = {"INV": "NOT", "BUF": "BUFF", "AND2": "AND", "NAND2": "NAND",
             "OR2": "OR", "NOR2": "NOR", "XOR2": "XOR", "XNOR2": "XNOR"}
_SEQUENTIAL = {"DFF", "DFFR", "DFFS", "DFFRS", "LATCH", "SDFF"}

_IO_RE = re.compile(r"(INPUT|OUTPUT)\s*\(\s*([^\s(),=]+)\s*\)\s*$", re.IGNORECASE)
_GATE_RE = re.compile(r"([^\s(),=]+)\s*=\s*([A-Za-z_][A-Za-z0-9_]*)\s*\((.*)\)\s*$")
_NAME_RE = re.compile(r"[^\s(),=]+$")


class NetlistError(ValueError):
    """Base class for malformed or inconsistent netlists."""


class BenchSyntaxError(NetlistError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class UndrivenNetError(NetlistError):
    pass


class MultipleDriverError(NetlistError):
    pass


class UnknownGateError(NetlistError):
    pass


class CycleError(NetlistError):
    pass


class SwapError(NetlistError):
    pass


class Pin(NamedTuple):
    """Input pin ``index`` of gate ``gate``."""

    gate: str
    index: int

    def __str__(self) -> str:
        return f"{self.gate}:{self.index}"

    @classmethod
    def parse(cls, text: str) -> Pin:
        gate, _, index = text.rpartition(":")
        return cls(gate, int(index))


@dataclass(frozen=True)
class Gate:
    name: str
    kind: str
    inputs: tuple[str, ...]

    @property
    def output(self) -> str:
        return self.name


@dataclass(frozen=True)
class Netlist:
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    gates: tuple[Gate, ...]
    name: str = "top"

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "gates", tuple(self.gates))
        self._validate()

    def _validate(self) -> None:
        driven = set()
        for pi in self.inputs:
            if pi in driven:
                raise MultipleDriverError(f"net {pi!r} declared as input twice")
            driven.add(pi)
        for g in self.gates:
            if g.kind not in ARITY:
                raise UnknownGateError(f"gate {g.name!r}: unknown kind {g.kind!r}")
            if len(g.inputs) != ARITY[g.kind]:
                raise NetlistError(f"gate {g.name!r}: {g.kind} takes {ARITY[g.kind]} "
                                   f"input(s), got {len(g.inputs)}")
            if g.name in driven:
                raise MultipleDriverError(f"net {g.name!r} has more than one driver")
            driven.add(g.name)
        for g in self.gates:
            for net in g.inputs:
                if net not in driven:
                    raise UndrivenNetError(f"net {net!r} (input of {g.name!r}) has no driver")
        if len(set(self.outputs)) != len(self.outputs):
            raise NetlistError("duplicate primary output")
        for po in self.outputs:
            if po not in driven:
                raise UndrivenNetError(f"primary output {po!r} has no driver")

    @cached_property
    def gate_map(self) -> dict[str, Gate]:
        return {g.name: g for g in self.gates}

    @property
    def nets(self) -> tuple[str, ...]:
        return self.inputs + tuple(g.name for g in self.gates)

    @cached_property
    def fanout(self) -> dict[str, tuple[Pin, ...]]:
        """Gate input pins driven by each net, sorted."""
        out: dict[str, list[Pin]] = {net: [] for net in self.nets}
        for g in self.gates:
            for i, net in enumerate(g.inputs):
                out[net].append(Pin(g.name, i))
        return {net: tuple(sorted(pins)) for net, pins in out.items()}

    @cached_property
    def output_set(self) -> frozenset[str]:
        return frozenset(self.outputs)

    def driver_of(self, pin: Pin) -> str:
        return self.gate_map[pin.gate].inputs[pin.index]

    def __len__(self) -> int:
        return len(self.gates)

    def replace_gates(self, gates: Iterable[Gate]) -> Netlist:
        return Netlist(self.inputs, self.outputs, tuple(gates), self.name)


@dataclass(frozen=True)
class Swap:
    """Exchange of sink pins between two drivers.

    Every listed pin sitting on ``driver_a`` moves to ``driver_b`` and vice
    versa, so applying the same swap twice restores the original wiring.
    """

    driver_a: str
    sinks_a: tuple[Pin, ...]
    driver_b: str
    sinks_b: tuple[Pin, ...]

    def to_json(self) -> dict:
        return {"driver_a": self.driver_a, "sinks_a": [str(p) for p in self.sinks_a],
                "driver_b": self.driver_b, "sinks_b": [str(p) for p in self.sinks_b]}

    @classmethod
    def from_json(cls, d: dict) -> Swap:
        return cls(d["driver_a"], tuple(Pin.parse(p) for p in d["sinks_a"]),
                   d["driver_b"], tuple(Pin.parse(p) for p in d["sinks_b"]))


def parse_bench(text: str, name: str = "top") -> Netlist:
    """Parse ``.bench`` text (``INPUT(x)``, ``OUTPUT(x)``, ``x = KIND(a, b)``)."""
    inputs: list[str] = []
    outputs: list[str] = []
    gates: list[Gate] = []
    where: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.rstrip("\r")
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        col = len(line) - len(line.lstrip()) + 1
        m = _IO_RE.match(stripped)
        if m:
            net = m.group(2)
            if m.group(1).upper() == "INPUT":
                if net in where:
                    raise MultipleDriverError(f"line {lineno}: net {net!r} already driven "
                                              f"(line {where[net]})")
                where[net] = lineno
                inputs.append(net)
            else:
                outputs.append(net)
            continue
        m = _GATE_RE.match(stripped)
        if not m:
            raise BenchSyntaxError(f"cannot parse {stripped!r}", lineno, col)
        out, word, args = m.group(1), m.group(2).upper(), m.group(3)
        if word in _SEQUENTIAL:
            raise UnknownGateError(f"line {lineno}: sequential element {word} is not "
                                   "supported (combinational netlists only)")
        kind = _FROM_BENCH.get(word)
        if kind is None:
            raise UnknownGateError(f"line {lineno}: unknown gate kind {m.group(2)!r}")
        ins = [a.strip() for a in args.split(",")]
        for a in ins:
            if not _NAME_RE.match(a):
                raise BenchSyntaxError(f"bad argument list {args!r}",
                                       lineno, col + stripped.index("(") + 1)
        if len(ins) != ARITY[kind]:
            raise NetlistError(f"line {lineno}: {word} gate {out!r} needs {ARITY[kind]} "
                               f"input(s), got {len(ins)}")
        if out in where:
            raise MultipleDriverError(f"line {lineno}: net {out!r} already driven "
                                      f"(line {where[out]})")
        where[out] = lineno
        gates.append(Gate(out, kind, tuple(ins)))
    return Netlist(tuple(inputs), tuple(outputs), tuple(gates), name)


def read_bench(path) -> Netlist:
    from pathlib import Path

    path = Path(path)
    return parse_bench(path.read_text(encoding="utf-8"), name=path.stem)


def write_bench(n: Netlist) -> str:
    lines = [f"# {n.name}", f"# {len(n.inputs)} inputs, {len(n.outputs)} outputs, "
             f"{len(n.gates)} gates", ""]
    lines += [f"INPUT({x})" for x in n.inputs]
    lines.append("")
    lines += [f"OUTPUT({x})" for x in n.outputs]
    lines.append("")
    lines += [f"{g.name} = {_TO_BENCH[g.kind]}({', '.join(g.inputs)})" for g in n.gates]
    return "\n".join(lines) + "\n"


def _successors(n: Netlist) -> dict[str, list[str]]:
    succ: dict[str, list[str]] = {g.name: [] for g in n.gates}
    for g in n.gates:
        for net in set(g.inputs):
            if net in succ:
                succ[net].append(g.name)
    for v in succ.values():
        v.sort()
    return succ


def topological_order(n: Netlist) -> list[str]:
    """Gate names such that every gate follows the gates driving it.

    Ties are broken lexicographically, so the order is stable across runs.
    """
    succ = _successors(n)
    indeg = {g.name: 0 for g in n.gates}
    for g in n.gates:
        indeg[g.name] = sum(1 for net in set(g.inputs) if net in indeg)
    heap = [name for name, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        v = heapq.heappop(heap)
        order.append(v)
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(heap, w)
    if len(order) != len(n.gates):
        raise CycleError(f"combinational loop through {detect_loop(n)}")
    return order


def detect_loop(n: Netlist) -> list[str]:
    """Return a directed gate cycle, or an empty list if the netlist is acyclic.

    The witness starts at the lexicographically smallest gate that lies on
    a cycle and is the shortest cycle through it.
    """
    succ = _successors(n)
    pred: dict[str, list[str]] = {v: [] for v in succ}
    for v, ws in succ.items():
        for w in ws:
            pred[w].append(v)
    # peel off gates that cannot be on a cycle, from both ends
    alive = set(succ)
    for edges, rev in ((pred, succ), (succ, pred)):
        deg = {v: sum(1 for u in edges[v] if u in alive) for v in alive}
        queue = deque(v for v in sorted(alive) if deg[v] == 0)
        while queue:
            v = queue.popleft()
            alive.discard(v)
            for w in rev[v]:
                if w in alive:
                    deg[w] -= 1
                    if deg[w] == 0:
                        queue.append(w)
    for start in sorted(alive):
        parent = {start: None}
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for w in succ[v]:
                if w == start:
                    cycle = [v]
                    while parent[cycle[-1]] is not None:
                        cycle.append(parent[cycle[-1]])
                    return cycle[::-1]
                if w in alive and w not in parent:
                    parent[w] = v
                    queue.append(w)
    return []


def apply_swap(n: Netlist, s: Swap) -> Netlist:
    """Rewire the pins named by ``s`` between its two drivers."""
    if s.driver_a == s.driver_b:
        raise SwapError(f"swap would merge driver {s.driver_a!r} with itself")
    nets = set(n.nets)
    for d in (s.driver_a, s.driver_b):
        if d not in nets:
            raise SwapError(f"swap refers to unknown net {d!r}")
    pins = s.sinks_a + s.sinks_b
    if len(set(pins)) != len(pins):
        raise SwapError("a pin appears twice in the swap")
    if not pins:
        return n
    other = {s.driver_a: s.driver_b, s.driver_b: s.driver_a}
    moves: dict[str, dict[int, str]] = {}
    gm = n.gate_map
    for pin in pins:
        g = gm.get(pin.gate)
        if g is None or not 0 <= pin.index < len(g.inputs):
            raise SwapError(f"swap refers to unknown pin {pin}")
        cur = g.inputs[pin.index]
        if cur not in other:
            raise SwapError(f"pin {pin} is driven by {cur!r}, not by either swap driver")
        moves.setdefault(pin.gate, {})[pin.index] = other[cur]
    gates = []
    for g in n.gates:
        m = moves.get(g.name)
        if m:
            g = Gate(g.name, g.kind, tuple(m.get(i, net) for i, net in enumerate(g.inputs)))
        gates.append(g)
    return n.replace_gates(gates)


def transitive_fanout(n: Netlist, gate: str) -> set[str]:
    """Gates reachable from ``gate`` (exclusive) along driver-to-sink edges."""
    fo = n.fanout
    seen: set[str] = set()
    stack = [gate]
    while stack:
        v = stack.pop()
        for pin in fo.get(v, ()):
            if pin.gate not in seen:
                seen.add(pin.gate)
                stack.append(pin.gate)
    return seen
