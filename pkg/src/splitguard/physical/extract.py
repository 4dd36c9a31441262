"""Turning pin connectivity back into a gate-level netlist."""

from __future__ import annotations

from ..netlist import ARITY, Gate, Netlist, NetlistError
from .layout import RoutedLayout, UnionFind, is_driver_ref, parse_ref, wire_components


class ExtractionError(NetlistError):
    pass


class FloatingPinError(ExtractionError):
    def __init__(self, pin: str):
        super().__init__(f"pin {pin} is not connected to any driver")
        self.pin = pin


class ShortError(ExtractionError):
    def __init__(self, drivers):
        drivers = sorted(drivers)
        super().__init__(f"drivers shorted together: {', '.join(drivers)}")
        self.drivers = drivers


def assemble(cells, inputs, outputs, groups, *, tie: str | None = None,
             name: str = "top") -> Netlist:
    """Build a netlist from groups of electrically connected pin references.

    ``cells`` lists ``(gate, kind)`` pairs in output order.  Every gate
    input and every output pad must share a group with exactly one
    driver.  With ``tie`` set, unconnected sinks are tied to that net
    instead of raising.  An output pad driven by something other than its
    own name gets a buffer named after the port; a gate already holding
    that name is renamed with a ``~`` suffix.
    """
    uf = UnionFind()
    for group in groups:
        group = list(group)
        for ref in group:
            uf.union(group[0], ref)
    driver_of: dict = {}
    for group in groups:
        for ref in group:
            if is_driver_ref(ref):
                root = uf.find(ref)
                owner = parse_ref(ref)[1]
                if driver_of.setdefault(root, owner) != owner:
                    raise ShortError({driver_of[root], owner})

    def net_of(ref: str) -> str:
        root = uf.find(ref)
        if root in driver_of:
            return driver_of[root]
        if tie is None:
            raise FloatingPinError(ref)
        return tie

    gates = [Gate(g, kind, tuple(net_of(f"g:{g}:{i}") for i in range(ARITY[kind])))
             for g, kind in cells]
    names = {g.name for g in gates}
    renames = {}
    buffers = []
    for po in outputs:
        net = net_of("po:" + po)
        if net == po:
            continue
        if po in inputs:
            raise ExtractionError(f"output {po} is also an input but is driven by {net}")
        if po in names:
            new = po + "~"
            while new in names:
                new += "~"
            names.add(new)
            renames[po] = new
        buffers.append((po, net))
    if renames:
        gates = [Gate(renames.get(g.name, g.name), g.kind,
                      tuple(renames.get(x, x) for x in g.inputs)) for g in gates]
    gates += [Gate(po, "BUF", (renames.get(net, net),)) for po, net in buffers]
    return Netlist(tuple(inputs), tuple(outputs), tuple(gates), name)


def extract_netlist(layout: RoutedLayout, name: str = "top") -> Netlist:
    """Nets are the wires' geometric components, joined through active cell arcs."""
    groups = []
    for w in layout.wires:
        uf = wire_components(layout, w)
        by_root: dict = {}
        for ref in w.pins:
            by_root.setdefault(uf.find(ref), []).append(ref)
        if len(by_root) > 1:
            main = max(by_root.values(), key=len)
            stray = next(r for refs in by_root.values() if refs is not main for r in refs)
            raise FloatingPinError(stray)
        groups += list(by_root.values())
    for cc in layout.ccells:
        for a, b in cc.arcs:
            groups.append([cc.ref(a), cc.ref(b)])
    cells = [(c.name, c.kind) for c in layout.cells]
    return assemble(cells, layout.inputs, layout.outputs, groups, name=name)
