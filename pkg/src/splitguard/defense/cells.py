"""Correction-cell insertion, the naive-lifting baseline, and BEOL restoration."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..netlist import Netlist
from ..physical.layout import TRUE_ARCS, CorrectionCell, RoutedLayout, gate_pin
from ..physical.place import Placement
from ..physical.route import WireSpec, route_specs
from .randomize import LedgerEntry, SwapLedger

DEFAULT_LIFT_LAYER = 6


class CellPlacementError(RuntimeError):
    pass


@dataclass(frozen=True)
class LiftPlan:
    """Minimum-layer constraints plus any correction cells and the pins they reroute.

    A detour ``(net, pin, cell)`` takes ``pin`` off ``net``'s wire: the
    net reaches the cell's C pin instead and the cell's Z pin feeds ``pin``.
    """

    constraints: dict[str, int] = field(default_factory=dict)
    cells: tuple[CorrectionCell, ...] = ()
    detours: tuple[tuple[str, str, str], ...] = ()

    @property
    def stubs(self) -> list[tuple[str, str]]:
        """Lifted connections into and out of each cell, as ``(from, to)`` pin pairs."""
        cell = {c.id: c for c in self.cells}
        out = []
        for net, pin, cid in self.detours:
            out += [(f"net:{net}", cell[cid].ref("C")), (cell[cid].ref("Z"), pin)]
        return out

    def route_args(self) -> dict:
        return {"constraints": self.constraints, "cells": self.cells, "detours": self.detours}


def naive_lift(n: Netlist, nets, layer: int) -> LiftPlan:
    """Constrain ``nets`` to ``layer`` and up without touching connectivity."""
    known = set(n.nets)
    missing = sorted(set(nets) - known)
    if missing:
        raise KeyError(f"unknown nets: {', '.join(missing)}")
    return LiftPlan({net: layer for net in sorted(set(nets))})


def _sink_points(n: Netlist, p: Placement, net: str) -> list[tuple[int, int]]:
    loc = p.loc
    pts = [loc[pin.gate] for pin in n.fanout[net]]
    if net in n.output_set:
        pts.append(p.pad_loc["po:" + net])
    return pts


def legalize_cell(x: int, y: int, taken: set, cols: int, rows: int) -> tuple[int, int]:
    """Nearest 2x2 footprint origin to ``(x, y)`` clear of ``taken`` sites."""
    if cols < 2 or rows < 2:
        raise CellPlacementError("die too small for a correction cell")
    x = min(max(x, 0), cols - 2)
    y = min(max(y, 0), rows - 2)
    for r in range(max(cols, rows)):
        ring = [(abs(dx) + abs(dy), y + dy, x + dx)
                for dx in range(-r, r + 1) for dy in range(-r, r + 1)
                if max(abs(dx), abs(dy)) == r]
        for _, cy, cx in sorted(ring):
            if 0 <= cx <= cols - 2 and 0 <= cy <= rows - 2 and \
                    not {(cx, cy), (cx + 1, cy), (cx, cy + 1), (cx + 1, cy + 1)} & taken:
                return cx, cy
    raise CellPlacementError("no legal site left for a correction cell")


def attach_correction_cells(n_rand: Netlist, ledger: SwapLedger, p: Placement,
                            layer: int = DEFAULT_LIFT_LAYER) -> tuple[LiftPlan, SwapLedger]:
    """Two cells per swap entry, each at the centroid of its driver's erroneous sinks.

    Every randomized net and every detour stub is lifted to ``layer``.
    Returns the plan and the ledger with cell pairs recorded.
    """
    taken: set[tuple[int, int]] = set()
    cells, detours, entries = [], [], []
    for i, e in enumerate(ledger.entries):
        s = e.swap
        if len(s.sinks_a) != 1 or len(s.sinks_b) != 1:
            raise ValueError("correction cells need single-sink swaps")
        ids = (f"cc{2 * i}", f"cc{2 * i + 1}")
        # In n_rand, driver_a feeds sinks_b and driver_b feeds sinks_a.
        for cid, driver, moved in ((ids[0], s.driver_a, s.sinks_b[0]),
                                   (ids[1], s.driver_b, s.sinks_a[0])):
            pts = _sink_points(n_rand, p, driver)
            cx = round(sum(q[0] for q in pts) / len(pts))
            cy = round(sum(q[1] for q in pts) / len(pts))
            cx, cy = legalize_cell(cx, cy, taken, p.cols, p.rows)
            cell = CorrectionCell(cid, cx, cy, layer)
            taken |= cell.footprint()
            cells.append(cell)
            detours.append((driver, gate_pin(moved.gate, moved.index), cid))
        entries.append(LedgerEntry(s, ids, layer))
    constraints = {net: layer for net in ledger.randomized_nets}
    plan = LiftPlan(dict(sorted(constraints.items())), tuple(cells), tuple(detours))
    return plan, replace(ledger, entries=tuple(entries))


def restore(layout: RoutedLayout, ledger: SwapLedger) -> RoutedLayout:
    """Switch every cell to its true arcs and wire each cell pair in the BEOL.

    Only wires at or above each entry's lift layer are added, so all
    geometry below it is left exactly as it was.
    """
    cells = dict(layout.ccell_map)
    specs = []
    for e in ledger.entries:
        if e.cell_pair is None:
            raise ValueError("ledger entry has no correction cells")
        a, b = (cells[c] for c in e.cell_pair)
        cells[a.id] = replace(a, arcs=TRUE_ARCS)
        cells[b.id] = replace(b, arcs=TRUE_ARCS)
        specs.append(WireSpec(f"{a.id}.Y", (a.ref("Y"), b.ref("D")), e.lift_layer))
        specs.append(WireSpec(f"{b.id}.Y", (b.ref("Y"), a.ref("D")), e.lift_layer))
    if not specs:
        return layout
    switched = layout.with_wires(layout.wires, [cells[c.id] for c in layout.ccells])
    return route_specs(switched, specs)
