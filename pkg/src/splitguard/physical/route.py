"""Sequential A* routing over a layered grid.

Every grid edge carries a soft capacity; crossing a full edge costs an
overflow penalty that grows with the overflow, and an edge used by
``hard_cap`` wires is blocked.  Planar steps cost 1 and vias 3.  Wires
are routed longest first by half-perimeter.  Within a wire, pins join
the growing tree in Prim order.  Each search is aimed at the pin's
spanning-tree partner but ends on the first tree node it reaches, so the
result is always a tree.

A wire with minimum layer ``L`` reaches its layer-1 pins through forced
via stacks and routes every trunk step on layers ``>= L``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..netlist import Netlist
from ._astar import INF, astar
from .layout import (NUM_LAYERS, CorrectionCell, PlacedCell, RoutedLayout, Segment, Via, Wire,
                     gate_pin)
from .place import Placement

VIA_COST = 3
CAPACITY = 2
OVERFLOW_PENALTY = 4
HARD_CAP = 8


class RoutingError(RuntimeError):
    def __init__(self, net: str, reason: str = "no path under capacity"):
        super().__init__(f"cannot route {net}: {reason}")
        self.net = net


@dataclass(frozen=True)
class WireSpec:
    name: str
    pins: tuple[str, ...]
    min_layer: int = 1


class Router:
    """Grid state shared by successive wires; usage persists between calls."""

    def __init__(self, cols: int, rows: int, layers: int = NUM_LAYERS, *,
                 capacity: int = CAPACITY, hard_cap: int = HARD_CAP):
        self.W, self.H, self.L = cols, rows, layers
        self.WH = cols * rows
        size = self.WH * layers
        # planar[n]: edge from n to its +x (odd layers) or +y neighbour; via[n]: n to one layer up
        self.planar = np.zeros(size, dtype=np.int64)
        self.via = np.zeros(size, dtype=np.int64)
        self._in_tree = np.zeros(size, dtype=np.bool_)
        self._dist = np.full(size, INF, dtype=np.int64)
        self._parent = np.zeros(size, dtype=np.int64)
        self.capacity = capacity
        self.hard_cap = hard_cap

    def node(self, x: int, y: int, layer: int) -> int:
        return (layer - 1) * self.WH + y * self.W + x

    def xyl(self, node: int) -> tuple[int, int, int]:
        l, rem = divmod(node, self.WH)
        y, x = divmod(rem, self.W)
        return x, y, l + 1

    def occupy(self, segments, vias) -> None:
        for s in segments:
            step = 1 if s.layer % 2 else self.W
            a = self.node(s.x1, s.y1, s.layer)
            for i in range(s.length):
                self.planar[a + i * step] += 1
        for v in vias:
            self.via[self.node(v.x, v.y, v.k)] += 1

    def _search(self, start: int, tree: set, lo: int, goal, name: str) -> list[int]:
        path = astar(self.planar, self.via, self._in_tree, self._dist, self._parent,
                     self.W, self.H, self.L, start, lo - 1, goal[0], goal[1],
                     self.capacity, self.hard_cap, OVERFLOW_PENALTY, VIA_COST)
        if not len(path):
            raise RoutingError(name)
        return path.tolist()

    def route_wire(self, spec: WireSpec, locate) -> Wire:
        """Route one wire; ``locate(ref)`` gives a pin's ``(x, y, layer)``."""
        pins = list(spec.pins)
        lo = spec.min_layer
        if len(pins) < 2:
            return Wire(spec.name, spec.pins, lo)
        xyl = [locate(p) for p in pins]
        planar_edges: set[int] = set()
        via_edges: set[int] = set()
        tree: set[int] = set()

        def access(i):
            """Entry node of pin ``i`` plus the via stack that reaches it."""
            x, y, layer = xyl[i]
            if layer >= lo:
                return self.node(x, y, layer), []
            return self.node(x, y, lo), [self.node(x, y, k) for k in range(layer, lo)]

        def add_stack(stack):
            for e in stack:
                if e not in via_edges:
                    via_edges.add(e)
                    self.via[e] += 1
                tree.add(e)
                self._in_tree[e] = True

        # Prim order over Manhattan distances, starting at the first (driver) pin.
        n = len(pins)
        done = [False] * n
        best = [abs(xyl[i][0] - xyl[0][0]) + abs(xyl[i][1] - xyl[0][1]) for i in range(n)]
        partner = [0] * n
        done[0] = True
        try:
            node0, stack0 = access(0)
            add_stack(stack0)
            tree.add(node0)
            self._in_tree[node0] = True
            for _ in range(n - 1):
                i = min((j for j in range(n) if not done[j]), key=lambda j: (best[j], j))
                done[i] = True
                xi, yi = xyl[i][0], xyl[i][1]
                goal = xyl[partner[i]][:2]
                for j in range(n):
                    if not done[j]:
                        d = abs(xyl[j][0] - xi) + abs(xyl[j][1] - yi)
                        if d < best[j]:
                            best[j] = d
                            partner[j] = i
                start, stack = access(i)
                if start not in tree:
                    path = self._search(start, tree, lo, goal, spec.name)
                    for a, b in zip(path, path[1:]):
                        e = min(a, b)
                        if abs(a - b) == self.WH:
                            via_edges.add(e)
                            self.via[e] += 1
                        else:
                            planar_edges.add(e)
                            self.planar[e] += 1
                    tree.update(path)
                    self._in_tree[path] = True
                add_stack(stack)
        finally:
            self._in_tree[list(tree)] = False
        return Wire(spec.name, spec.pins, lo, self._segments(planar_edges),
                    tuple(sorted(Via(*self._via_xyk(e)) for e in via_edges)))

    def _via_xyk(self, e: int):
        x, y, layer = self.xyl(e)
        return layer, x, y

    def _segments(self, edges: set[int]) -> tuple[Segment, ...]:
        runs: dict[tuple[int, int], list[int]] = {}
        for e in edges:
            x, y, layer = self.xyl(e)
            if layer % 2:
                runs.setdefault((layer, y), []).append(x)
            else:
                runs.setdefault((layer, -1 - x), []).append(y)
        out = []
        for (layer, key), coords in runs.items():
            coords.sort()
            start = prev = coords[0]
            for c in coords[1:] + [None]:
                if c is not None and c == prev + 1:
                    prev = c
                    continue
                if key >= 0:
                    out.append(Segment(layer, start, key, prev + 1, key))
                else:
                    x = -1 - key
                    out.append(Segment(layer, x, start, x, prev + 1))
                if c is not None:
                    start = prev = c
        return tuple(sorted(out))


def netlist_wires(n: Netlist, constraints=None, detours=(), cells=()) -> list[WireSpec]:
    """One wire per driven net, plus correction-cell detours.

    ``detours`` holds ``(net, pin_ref, cell)`` triples: the pin leaves the
    net's wire, the wire gains the cell's C pin, and a new wire joins the
    cell's Z pin to the pin.  Detour wires inherit the net's minimum layer.
    """
    constraints = dict(constraints or {})
    sinks: dict[str, list[str]] = {pi: [] for pi in n.inputs}
    sinks.update({g.name: [] for g in n.gates})
    for g in n.gates:
        for i, net in enumerate(g.inputs):
            sinks[net].append(gate_pin(g.name, i))
    for po in n.outputs:
        sinks[po].append("po:" + po)
    extra: dict[str, list[str]] = {}
    stubs = []
    cell_of = {c.id: c for c in cells}
    for net, pin, cell_id in detours:
        sinks[net].remove(pin)
        extra.setdefault(net, []).append(cell_of[cell_id].ref("C"))
        stubs.append(WireSpec(f"{cell_id}.Z", (cell_of[cell_id].ref("Z"), pin),
                              constraints.get(net, 1)))
    specs = []
    for net, pins in sinks.items():
        driver = "pi:" + net if net in n.inputs and net not in n.gate_map else gate_pin(net, "Y")
        specs.append(WireSpec(net, (driver, *pins, *extra.get(net, ())), constraints.get(net, 1)))
    return specs + stubs


def _hpwl(spec: WireSpec, locate) -> int:
    pts = [locate(p) for p in spec.pins]
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    return max(xs) - min(xs) + max(ys) - min(ys)


def route_specs(layout: RoutedLayout, specs, router: Router | None = None) -> RoutedLayout:
    """Route ``specs`` on top of whatever ``layout`` already holds."""
    if router is None:
        router = Router(layout.cols, layout.rows, layout.layers)
        for w in layout.wires:
            router.occupy(w.segments, w.vias)
    locate = layout.pin_location
    order = sorted(specs, key=lambda s: (-_hpwl(s, locate) if len(s.pins) > 1 else 0, s.name))
    wires = [router.route_wire(s, locate) for s in order]
    return layout.with_wires(list(layout.wires) + wires)


def route(p: Placement, n: Netlist, constraints=None, *, cells: tuple[CorrectionCell, ...] = (),
          detours=()) -> RoutedLayout:
    """Route every net of ``n`` on placement ``p``.

    ``constraints`` maps net names to a minimum layer.  ``cells`` and
    ``detours`` insert correction cells (see ``netlist_wires``).
    """
    loc = p.loc
    placed = tuple(PlacedCell(g.name, g.kind, *loc[g.name]) for g in n.gates)
    base = RoutedLayout(p.cols, p.rows, placed, p.pads, tuple(cells))
    return route_specs(base, netlist_wires(n, constraints, detours, cells))
