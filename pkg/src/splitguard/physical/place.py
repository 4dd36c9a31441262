"""Connectivity-driven placement on a square site grid.

Global placement solves the quadratic wirelength system with pads fixed
(conjugate gradients), then repeats the solve with a growing pull toward
uniform-density targets from recursive bisection.  A row legalizer snaps
gates onto distinct sites, and a greedy pass of moves and pairwise swaps
toward each gate's weighted-median neighbour trims the remaining
wirelength.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, sparse
from scipy.sparse import linalg as splinalg

from ..netlist import Netlist
from .layout import Pad


class PlacementError(ValueError):
    pass


@dataclass(frozen=True)
class Placement:
    cols: int
    rows: int
    locations: tuple[tuple[str, int, int], ...]
    pads: tuple[Pad, ...]

    @property
    def loc(self) -> dict[str, tuple[int, int]]:
        return {g: (x, y) for g, x, y in self.locations}

    @property
    def pad_loc(self) -> dict[str, tuple[int, int]]:
        return {p.ref: (p.x, p.y) for p in self.pads}

    def to_text(self) -> str:
        lines = ["PLACEMENT 1", f"DIE {self.cols} {self.rows}"]
        lines += [f"CELL {g} {x} {y}" for g, x, y in self.locations]
        lines += [f"PAD {p.name} {p.direction} {p.x} {p.y}" for p in self.pads]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> Placement:
        cols = rows = 0
        locs, pads = [], []
        for line in text.splitlines():
            f = line.split()
            if not f:
                continue
            if f[0] == "DIE":
                cols, rows = int(f[1]), int(f[2])
            elif f[0] == "CELL":
                locs.append((f[1], int(f[2]), int(f[3])))
            elif f[0] == "PAD":
                pads.append(Pad(f[1], f[2], int(f[3]), int(f[4])))
        return cls(cols, rows, tuple(locs), tuple(pads))


def die_side(num_gates: int, utilization: float) -> int:
    if not 0 < utilization <= 1:
        raise PlacementError(f"infeasible utilization {utilization}")
    return max(2, math.ceil(math.sqrt(num_gates / utilization)))


def perimeter_sites(cols: int, rows: int) -> list[tuple[int, int]]:
    """Boundary sites clockwise from the origin: bottom, right, top, left."""
    out = [(x, 0) for x in range(cols)]
    out += [(cols - 1, y) for y in range(1, rows)]
    out += [(x, rows - 1) for x in range(cols - 2, -1, -1)]
    out += [(0, y) for y in range(rows - 2, 0, -1)]
    return out


def place_pads(n: Netlist, cols: int, rows: int) -> tuple[Pad, ...]:
    """Inputs spread over the first half of the boundary, outputs over the second."""
    ring = perimeter_sites(cols, rows)
    half = len(ring) // 2
    pads = []
    for names, direction, lo, span in ((n.inputs, "IN", 0, half),
                                       (n.outputs, "OUT", half, len(ring) - half)):
        for i, name in enumerate(names):
            x, y = ring[lo + int((i + 0.5) * span / len(names))]
            pads.append(Pad(name, direction, x, y))
    return tuple(pads)


def assign_pads(pads, targets, cols: int, rows: int) -> tuple[Pad, ...]:
    """Move each pad to a perimeter site near its target, at most ``ceil(pads/sites)`` per site.

    Minimizes the summed Manhattan distance with an exact assignment.
    """
    ring = perimeter_sites(cols, rows)
    if not pads:
        return ()
    per = -(-len(pads) // len(ring))
    slots = np.array([site for site in ring for _ in range(per)], dtype=float)
    t = np.asarray(targets, dtype=float)
    cost = np.abs(t[:, None, 0] - slots[None, :, 0]) + np.abs(t[:, None, 1] - slots[None, :, 1])
    rows_, cols_ = optimize.linear_sum_assignment(cost)
    out = list(pads)
    for r, c in zip(rows_, cols_):
        x, y = ring[c // per]
        out[r] = Pad(pads[r].name, pads[r].direction, x, y)
    return tuple(out)


def _spread_targets(x, y, cols, rows):
    """Uniform-density targets by recursive bisection.

    Each region is cut across its longer side; its cells are split at the
    matching quantile of that coordinate, so each half gets a share
    proportional to its area.  Small groups are spread evenly in place.
    """
    tx = np.empty(len(x))
    ty = np.empty(len(x))
    stack = [(np.arange(len(x)), 0.0, float(cols), 0.0, float(rows))]
    while stack:
        idx, x0, x1, y0, y1 = stack.pop()
        if not len(idx):
            continue
        w, h = x1 - x0, y1 - y0
        if len(idx) <= 2 or (w <= 1 and h <= 1):
            k = len(idx)
            if w >= h:
                order = idx[np.lexsort((y[idx], x[idx]))]
                tx[order] = x0 + (np.arange(k) + 0.5) / k * w
                ty[order] = (y0 + y1) / 2
            else:
                order = idx[np.lexsort((x[idx], y[idx]))]
                ty[order] = y0 + (np.arange(k) + 0.5) / k * h
                tx[order] = (x0 + x1) / 2
            continue
        if w >= h:
            cut = x0 + np.floor(w / 2) if w >= 2 else x0 + w / 2
            order = idx[np.lexsort((y[idx], x[idx]))]
            m = int(round(len(idx) * (cut - x0) / w))
            stack.append((order[:m], x0, cut, y0, y1))
            stack.append((order[m:], cut, x1, y0, y1))
        else:
            cut = y0 + np.floor(h / 2) if h >= 2 else y0 + h / 2
            order = idx[np.lexsort((x[idx], y[idx]))]
            m = int(round(len(idx) * (cut - y0) / h))
            stack.append((order[:m], x0, x1, y0, cut))
            stack.append((order[m:], x0, x1, cut, y1))
    return tx, ty


def legalize(names, tx, ty, cols: int, rows: int) -> dict[str, tuple[int, int]]:
    """Assign each gate a distinct site: nearest row with room, then packed in x order."""
    if len(names) > cols * rows:
        raise PlacementError("more gates than sites")
    members: list[list[int]] = [[] for _ in range(rows)]
    for i in sorted(range(len(names)), key=lambda i: (ty[i], tx[i], names[i])):
        r0 = min(rows - 1, max(0, int(ty[i])))
        for d in range(rows):
            for r in (r0 - d, r0 + d):
                if 0 <= r < rows and len(members[r]) < cols:
                    members[r].append(i)
                    break
            else:
                continue
            break
    out = {}
    for r, idx in enumerate(members):
        idx.sort(key=lambda i: (tx[i], names[i]))
        xs = []
        for i in idx:
            want = min(cols - 1, max(0, int(tx[i])))
            xs.append(max(want, xs[-1] + 1) if xs else want)
        limit = cols - 1
        for j in range(len(xs) - 1, -1, -1):
            xs[j] = min(xs[j], limit)
            limit = xs[j] - 1
        for i, x in zip(idx, xs):
            out[names[i]] = (x, r)
    return out


def _weighted_median(values, weights):
    order = sorted(zip(values, weights))
    half = sum(weights) / 2
    acc = 0.0
    for v, w in order:
        acc += w
        if acc >= half:
            return v
    return order[-1][0]


def refine(neighbors, xy, cols: int, rows: int, passes: int = 4) -> int:
    """Greedy detailed placement, in place; returns the number of accepted changes.

    ``neighbors[i]`` lists ``(j, None, w)`` for gate neighbours and
    ``(None, (x, y), w)`` for fixed pad positions, with connection weight
    ``w``.  Each gate tries the site at the weighted median of its
    neighbours and the eight around it, moving there if free or swapping
    with the occupant, whenever the weighted Manhattan length of the
    affected connections drops.
    """
    occ = {tuple(p): i for i, p in enumerate(xy)}

    def cost(i, at, other=None, other_at=None):
        total = 0.0
        for j, fixed, w in neighbors[i]:
            if fixed is None:
                fixed = other_at if j == other else xy[j]
            total += w * (abs(at[0] - fixed[0]) + abs(at[1] - fixed[1]))
        return total

    changed = 0
    for _ in range(passes):
        moved = 0
        for i in range(len(xy)):
            if not neighbors[i]:
                continue
            pts = [xy[j] if fixed is None else fixed for j, fixed, _ in neighbors[i]]
            ws = [w for _, _, w in neighbors[i]]
            mx = _weighted_median([p[0] for p in pts], ws)
            my = _weighted_median([p[1] for p in pts], ws)
            here = tuple(xy[i])
            base_i = cost(i, here)
            best = (-1e-9, None)
            for dy in (0, -1, 1):
                for dx in (0, -1, 1):
                    site = (mx + dx, my + dy)
                    if site == here or not (0 <= site[0] < cols and 0 <= site[1] < rows):
                        continue
                    h = occ.get(site)
                    delta = cost(i, site, h, here) - base_i
                    if h is not None:
                        delta += cost(h, here, i, site) - cost(h, site)
                    if delta < best[0]:
                        best = (delta, site)
            if best[1] is None:
                continue
            site = best[1]
            h = occ.pop(site, None)
            del occ[here]
            xy[i] = site
            occ[site] = i
            if h is not None:
                xy[h] = here
                occ[here] = h
            moved += 1
        changed += moved
        if moved * 100 < len(xy):
            break
    return changed


def _global(lap, pad_links, pads, x, y, cols, rows, iterations, anchor):
    """Quadratic placement with pads fixed, then spreading under growing anchors."""
    g = len(x)
    where = {p.ref: (p.x + 0.5, p.y + 0.5) for p in pads}
    px, py = np.zeros(g), np.zeros(g)
    for i, ref, w in pad_links:
        px[i] += w * where[ref][0]
        py[i] += w * where[ref][1]
    # A faint pull toward the start keeps components without pads well posed.
    eps = 1e-3
    ax, ay, w = x, y, eps
    for t in range(iterations + 1):
        m = (lap + sparse.identity(g) * w).tocsr()
        pre = sparse.diags(1 / m.diagonal())
        x = splinalg.cg(m, px + w * ax, x0=x, rtol=1e-6, maxiter=1000, M=pre)[0]
        y = splinalg.cg(m, py + w * ay, x0=y, rtol=1e-6, maxiter=1000, M=pre)[0]
        if t == iterations:
            break
        ax, ay = _spread_targets(x, y, cols, rows)
        w = eps + anchor * (t + 1)
    return x, y


def place(n: Netlist, *, utilization: float = 0.6, seed: int = 0,
          iterations: int = 12, anchor: float = 0.05, min_side: int = 2,
          refine_passes: int = 4, pin_weights=None) -> Placement:
    """Place ``n`` on a square die sized for ``utilization``.

    Pads start evenly spread (inputs, then outputs, around the boundary)
    and are moved once, after a first global placement, to the perimeter
    sites nearest the logic they connect to.  ``pin_weights`` maps
    ``(gate, input index)`` to a multiplier on the pull of the connection
    feeding that pin (default 1).
    """
    side = max(die_side(len(n.gates), utilization), min_side)
    cols = rows = side
    pads = place_pads(n, cols, rows)
    names = [g.name for g in n.gates]
    if not names:
        return Placement(cols, rows, (), pads)
    index = {g: i for i, g in enumerate(names)}
    weight = {tuple(k): float(w) for k, w in (pin_weights or {}).items()}

    rows_i, cols_i, vals = [], [], []
    pad_links = []
    for g in n.gates:
        for k, net in enumerate(g.inputs):
            w = weight.get((g.name, k), 1.0)
            if net in index:
                rows_i += [index[g.name], index[net]]
                cols_i += [index[net], index[g.name]]
                vals += [w, w]
            else:
                pad_links.append((index[g.name], "pi:" + net, w))
    for po in n.outputs:
        if po in index:
            pad_links.append((index[po], "po:" + po, 1.0))
    adj = sparse.csr_matrix((vals, (rows_i, cols_i)), shape=(len(names), len(names)))
    deg = np.asarray(adj.sum(axis=1)).ravel()
    for i, _, w in pad_links:
        deg[i] += w
    lap = sparse.diags(deg) - adj

    rng = np.random.default_rng(seed)
    x0 = rng.uniform(0, cols, len(names))
    y0 = rng.uniform(0, rows, len(names))
    x, y = _global(lap, pad_links, pads, x0, y0, cols, rows, iterations, anchor)
    linked: dict[str, list[int]] = {}
    for i, ref, _ in pad_links:
        linked.setdefault(ref, []).append(i)
    targets = []
    for p in pads:
        idx = linked.get(p.ref)
        targets.append((float(np.mean(x[idx])), float(np.mean(y[idx]))) if idx
                       else (cols / 2, rows / 2))
    pads = assign_pads(pads, targets, cols, rows)
    x, y = _global(lap, pad_links, pads, x0, y0, cols, rows, iterations, anchor)
    x, y = _spread_targets(x, y, cols, rows)

    locs = legalize(names, x, y, cols, rows)
    xy = [locs[g] for g in names]
    nbrs: list[list] = [[] for _ in names]
    for r, c, w in zip(rows_i, cols_i, vals):
        nbrs[r].append((c, None, w))
    pad_at = {p.ref: (p.x, p.y) for p in pads}
    for i, ref, w in pad_links:
        nbrs[i].append((None, pad_at[ref], w))
    # A lone gate stays where spreading put it, at the die centre.
    if len(names) > 1:
        refine(nbrs, xy, cols, rows, refine_passes)
    locs = dict(zip(names, xy))
    return Placement(cols, rows, tuple((g, *locs[g]) for g in names), pads)
