"""Hint-driven proximity attack on a split view.

Sink vpins are matched to driver vpins by a minimum-cost assignment.  The
cost of a pair is their Manhattan distance, plus a penalty when the sink
lies behind the driver's dangling wire.  Drivers take at most
``fanout_cap`` sinks, and since a driver only climbs above the split when
its net continues there, the solver prefers assignments that leave no
driver vpin idle.  Loop repair then breaks any combinational cycle the
assignment implies, and the surviving links are turned into a netlist.
"""

from __future__ import annotations

import json
import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ..netlist import Netlist
from ..physical.extract import assemble
from ..physical.layout import is_driver_ref, parse_ref
from ..physical.split import SplitView
from .matching import min_cost_assignment

DEFAULT_FANOUT_CAP = 16
DEFAULT_CANDIDATES = 48
_CHUNK = 512


@dataclass(frozen=True)
class HintConfig:
    """Which hints the attacker uses.

    ``direction_penalty=None`` means a quarter of the die half-perimeter.
    ``candidates`` bounds how many of the cheapest drivers each sink vpin
    considers, which keeps the flow problem sparse.  ``cover_drivers``
    ranks the number of driver vpins in use above total distance.
    """

    use_proximity: bool = True
    use_loop_avoidance: bool = True
    fanout_cap: int | None = DEFAULT_FANOUT_CAP
    use_dangling_direction: bool = True
    direction_penalty: int | None = None
    candidates: int = DEFAULT_CANDIDATES
    cover_drivers: bool = True

    def __post_init__(self):
        if not self.use_proximity:
            raise ValueError("the proximity hint cannot be disabled")
        if self.fanout_cap is not None and self.fanout_cap < 1:
            raise ValueError("fanout cap must be positive")
        if self.candidates < 1:
            raise ValueError("need at least one candidate per vpin")

    def penalty(self, view: SplitView) -> int:
        if not self.use_dangling_direction:
            return 0
        if self.direction_penalty is not None:
            return self.direction_penalty
        return (view.cols + view.rows) // 4


@dataclass(frozen=True)
class AttackResult:
    """Outcome of a proximity attack; ``ccr`` is filled in by the scorer only."""

    assignment: dict[str, tuple[str, ...]]
    unassigned: tuple[str, ...]
    netlist: Netlist
    cost: int
    loop_repairs: int
    candidates: dict[str, tuple[str, ...]]
    elapsed: float = field(default=0.0, compare=False)
    ccr: float | None = None

    @property
    def driver_of(self) -> dict[str, str]:
        return {s: d for d, sinks in self.assignment.items() for s in sinks}

    def to_json(self, timing: bool = False) -> str:
        d = {
            "assignment": {k: list(v) for k, v in self.assignment.items()},
            "unassigned": list(self.unassigned),
            "cost": self.cost,
            "loop_repairs": self.loop_repairs,
            "candidates": {k: list(v) for k, v in self.candidates.items()},
            "ccr": None if self.ccr is None else round(self.ccr, 4),
        }
        if timing:
            d["elapsed"] = round(self.elapsed, 4)
        return json.dumps(d, indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str, netlist: Netlist) -> AttackResult:
        """Inverse of :meth:`to_json`; the recovered netlist travels separately."""
        d = json.loads(text)
        return cls({k: tuple(v) for k, v in d["assignment"].items()}, tuple(d["unassigned"]),
                   netlist, d["cost"], d["loop_repairs"],
                   {k: tuple(v) for k, v in d["candidates"].items()}, d.get("elapsed", 0.0),
                   d.get("ccr"))


def _pair_costs(sx, sy, dx, dy, ddir, penalty):
    cost = np.abs(sx[:, None] - dx[None, :]) + np.abs(sy[:, None] - dy[None, :])
    if penalty:
        behind = ((ddir[None, :] == 1) & (sx[:, None] < dx[None, :])) | \
                 ((ddir[None, :] == 2) & (sx[:, None] > dx[None, :])) | \
                 ((ddir[None, :] == 3) & (sy[:, None] < dy[None, :])) | \
                 ((ddir[None, :] == 4) & (sy[:, None] > dy[None, :]))
        cost = cost + penalty * behind
    return cost


def _candidate_lists(sinks, drivers, banned, k, penalty):
    """Cheapest ``k`` drivers per sink as ``[(cost, driver_index)]``, index-ordered ties."""
    code = {"E": 1, "W": 2, "N": 3, "S": 4}
    dx = np.array([d.x for d in drivers], dtype=np.int64)
    dy = np.array([d.y for d in drivers], dtype=np.int64)
    ddir = np.array([code.get(d.direction, 0) for d in drivers], dtype=np.int64)
    out = []
    big = np.iinfo(np.int64).max
    for lo in range(0, len(sinks), _CHUNK):
        chunk = sinks[lo:lo + _CHUNK]
        sx = np.array([s.x for s in chunk], dtype=np.int64)
        sy = np.array([s.y for s in chunk], dtype=np.int64)
        cost = _pair_costs(sx, sy, dx, dy, ddir, penalty)
        for r, s in enumerate(chunk):
            for j in banned.get(s.id, ()):
                cost[r, j] = big
        take = min(k, len(drivers))
        for r in range(len(chunk)):
            row = cost[r]
            if take < len(drivers):
                idx = np.argpartition(row, take - 1)[:take]
                cut = row[idx].max()
                idx = np.flatnonzero(row <= cut)
            else:
                idx = np.arange(len(drivers))
            idx = idx[row[idx] < big]
            order = np.lexsort((idx, row[idx]))[:take]
            out.append([(int(row[i]), int(i)) for i in idx[order]])
    return out


class _Graph:
    """Gate-level successor graph implied by the fixed FEOL pieces and the links."""

    def __init__(self, view: SplitView):
        self.source: dict[str, str] = {}
        self.sinks: dict[str, tuple[str, ...]] = {}
        for f in view.fragments:
            drv = next((r for r in f.pins if is_driver_ref(r)), None)
            if drv is not None:
                kind, owner, _ = parse_ref(drv)
                self.source[f.id] = owner if kind == "g" else ""
            self.sinks[f.id] = tuple(sorted({parse_ref(r)[1] for r in f.pins
                                             if r.startswith("g:") and not is_driver_ref(r)}))
        self.succ: dict[str, dict[str, int]] = {c.name: {} for c in view.cells}
        for fid, src in self.source.items():
            self._add(src, self.sinks[fid])

    def _add(self, src, gates, step=1):
        if not src:
            return
        row = self.succ[src]
        for g in gates:
            row[g] = row.get(g, 0) + step
            if not row[g]:
                del row[g]

    def link(self, frag: str, drv_frag: str, step: int = 1):
        self._add(self.source[drv_frag], self.sinks[frag], step)

    def reachable(self, starts) -> set[str]:
        seen = set(starts)
        queue = deque(seen)
        while queue:
            for w in self.succ[queue.popleft()]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return seen

    def find_cycle(self) -> list[str]:
        """Some directed cycle as a gate list, or ``[]``; deterministic."""
        color: dict[str, int] = {}
        for root in sorted(self.succ):
            if root in color:
                continue
            color[root] = 1
            path = [root]
            stack = [iter(sorted(self.succ[root]))]
            while stack:
                nxt = next(stack[-1], None)
                if nxt is None:
                    color[path.pop()] = 2
                    stack.pop()
                elif color.get(nxt) == 1:
                    return path[path.index(nxt):]
                elif nxt not in color:
                    color[nxt] = 1
                    path.append(nxt)
                    stack.append(iter(sorted(self.succ[nxt])))
        return []


def proximity_attack(view: SplitView, hints: HintConfig | None = None) -> AttackResult:
    """Reconnect ``view`` using physical hints only."""
    hints = hints or HintConfig()
    t0 = time.perf_counter()
    sinks = view.sink_vpins()
    drivers = view.driver_vpins()
    graph = _Graph(view)
    dfrag = [d.fragment for d in drivers]
    # A driver feeding its own sink gate is an immediate loop: never a candidate.
    banned: dict[str, set[int]] = {}
    if hints.use_loop_avoidance:
        for s in sinks:
            own = set(graph.sinks[s.fragment])
            bad = {j for j, f in enumerate(dfrag) if graph.source[f] in own}
            if bad:
                banned[s.id] = bad
    cands = _candidate_lists(sinks, drivers, banned, hints.candidates, hints.penalty(view)) \
        if drivers else [[] for _ in sinks]
    cap = hints.fanout_cap if hints.fanout_cap is not None else max(len(sinks), 1)
    bonus = 1 + sum(max((c for c, _ in cs), default=0) for cs in cands) \
        if hints.cover_drivers else 0
    match = min_cost_assignment(cands, [cap] * len(drivers), bonus)
    cost_of = [dict((d, c) for c, d in reversed(cs)) for cs in cands]

    repairs = 0
    if hints.use_loop_avoidance and sinks:
        repairs = _repair_loops(sinks, dfrag, cands, cost_of, match, cap, graph)

    assignment: dict[str, list[str]] = {}
    for i, j in enumerate(match):
        if j >= 0:
            assignment.setdefault(drivers[j].id, []).append(sinks[i].id)
    total = sum(cost_of[i][j] for i, j in enumerate(match) if j >= 0)
    netlist = _recover(view, sinks, dfrag, match, cost_of)
    return AttackResult(
        assignment={d: tuple(v) for d, v in sorted(assignment.items())},
        unassigned=tuple(s.id for s, j in zip(sinks, match) if j < 0),
        netlist=netlist,
        cost=total,
        loop_repairs=repairs,
        candidates={s.id: tuple(drivers[j].id for _, j in cs) for s, cs in zip(sinks, cands)},
        elapsed=time.perf_counter() - t0,
    )


def _fragment_links(sinks, dfrag, match, cost_of) -> dict[str, tuple[int, int]]:
    """Sink fragment -> (cost, sink index) of its cheapest assigned vpin."""
    best: dict[str, tuple[int, int]] = {}
    for i, j in enumerate(match):
        if j >= 0:
            key = (cost_of[i][j], i)
            f = sinks[i].fragment
            if f not in best or key < best[f]:
                best[f] = key
    return best


def _repair_loops(sinks, dfrag, cands, cost_of, match, cap, graph) -> int:
    """Break implied cycles in place; returns the number of links moved."""
    load = [0] * len(dfrag)
    for j in match:
        if j >= 0:
            load[j] += 1
    links = _fragment_links(sinks, dfrag, match, cost_of)
    for f, (_, i) in links.items():
        graph.link(f, dfrag[match[i]])
    vp_of: dict[str, list[int]] = {}
    for i, s in enumerate(sinks):
        vp_of.setdefault(s.fragment, []).append(i)
    gate_link: dict[tuple[str, str], list[str]] = {}

    def index_links():
        gate_link.clear()
        for f, (_, i) in links.items():
            src = graph.source[dfrag[match[i]]]
            for g in graph.sinks[f]:
                gate_link.setdefault((src, g), []).append(f)

    banned: set[tuple[int, str]] = set()
    repairs = 0
    limit = 10 * len(sinks)
    index_links()
    while True:
        cycle = graph.find_cycle()
        if not cycle:
            return repairs
        edges = list(zip(cycle, cycle[1:] + cycle[:1]))
        on_cycle = sorted({(links[f][0], f) for e in edges for f in gate_link.get(e, ())})
        if not on_cycle:
            raise RuntimeError("combinational loop inside the FEOL itself")
        _, frag = on_cycle[-1]
        old = dfrag[match[links[frag][1]]]
        graph.link(frag, old, -1)
        for i in vp_of[frag]:
            if match[i] >= 0 and dfrag[match[i]] == old:
                banned.add((i, old))
                load[match[i]] -= 1
                match[i] = -1
        if repairs < limit:
            reach = graph.reachable(graph.sinks[frag])
            for i in vp_of[frag]:
                if match[i] >= 0:
                    continue
                for _, j in cands[i]:
                    if load[j] < cap and (i, dfrag[j]) not in banned \
                            and graph.source[dfrag[j]] not in reach:
                        match[i] = j
                        load[j] += 1
                        break
        repairs += 1
        best = _fragment_links([sinks[i] for i in vp_of[frag]], dfrag,
                               [match[i] for i in vp_of[frag]],
                               [cost_of[i] for i in vp_of[frag]])
        if best:
            c, local = best[frag]
            i = vp_of[frag][local]
            links[frag] = (c, i)
            graph.link(frag, dfrag[match[i]])
        else:
            del links[frag]
        index_links()


def _recover(view, sinks, dfrag, match, cost_of) -> Netlist:
    fm = view.fragment_map
    groups = [list(f.pins) for f in view.fragments if f.pins]
    for f, (_, i) in sorted(_fragment_links(sinks, dfrag, match, cost_of).items()):
        d = fm[dfrag[match[i]]]
        src = next(r for r in d.pins if is_driver_ref(r))
        if fm[f].pins:
            groups.append([src, fm[f].pins[0]])
    tie = view.inputs[0] if view.inputs else None
    return assemble([(c.name, c.kind) for c in view.cells], view.inputs, view.outputs, groups,
                    tie=tie, name="recovered")
