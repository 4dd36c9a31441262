"""Synthetic large designs with local, Rent-style connectivity.

Primary inputs sit evenly around the border of a virtual square grid,
as pads would, and gates occupy random cells inside it.
Gates are created in a random order, and each input comes from an earlier
node within Chebyshev radius ``r`` of the gate, where ``P(r) ~ r**(2p - 3)``
(the wire-length law that follows from Rent's rule with exponent ``p`` in
two dimensions).  Creation order is topological, so the netlist is
acyclic.  Inputs prefer nodes nobody reads yet, which
keeps dangling gates rare; the ones left over become outputs.
"""

from __future__ import annotations

import math

import numpy as np

from .netlist import Gate, Netlist

_KINDS_2 = ("AND2", "NAND2", "OR2", "NOR2", "XOR2", "XNOR2")


def synthesize(num_gates: int, *, rent: float = 0.6, seed: int = 0, terminals: float = 1.5,
               name: str | None = None) -> Netlist:
    """Random acyclic netlist of ``num_gates`` gates and about ``terminals * G**rent`` inputs."""
    if num_gates < 1:
        raise ValueError("need at least one gate")
    if not 0 < rent < 1:
        raise ValueError("Rent exponent must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    num_inputs = max(2, round(terminals * num_gates ** rent))
    total = num_inputs + num_gates
    side = max(3, math.ceil(math.sqrt(num_gates)) + 2)
    ring = [(x, 0) for x in range(side)] + [(side - 1, y) for y in range(1, side)]
    ring += [(x, side - 1) for x in range(side - 2, -1, -1)]
    ring += [(0, y) for y in range(side - 2, 0, -1)]
    pi_cells = [ring[int(i * len(ring) / num_inputs)] for i in range(num_inputs)]
    inner = rng.permutation((side - 2) ** 2)[:num_gates]
    xs = np.array([c[0] for c in pi_cells] + list(1 + inner % (side - 2)))
    ys = np.array([c[1] for c in pi_cells] + list(1 + inner // (side - 2)))
    radii = np.arange(1, side + 1, dtype=float)
    weights = radii ** (2 * rent - 3)
    weights /= weights.sum()

    names = [f"pi{i}" for i in range(num_inputs)] + [f"g{i}" for i in range(num_gates)]
    at: dict[tuple[int, int], int] = {}
    read = np.zeros(total, dtype=bool)

    def near(v: int, r: int) -> list[int]:
        x, y = int(xs[v]), int(ys[v])
        out = []
        for yy in range(max(0, y - r), min(side, y + r + 1)):
            for xx in range(max(0, x - r), min(side, x + r + 1)):
                u = at.get((xx, yy))
                if u is not None:
                    out.append(u)
        return out

    def source(v: int, avoid: int, prefer_unread: bool) -> int:
        r = 1 + int(rng.choice(side, p=weights))
        while True:
            pool = [u for u in near(v, r) if u != avoid]
            if pool:
                if prefer_unread:
                    fresh = [u for u in pool if not read[u]]
                    pool = fresh or pool
                u = pool[int(rng.integers(len(pool)))]
                read[u] = True
                return u
            r *= 2

    for v in range(num_inputs):
        at.setdefault((int(xs[v]), int(ys[v])), v)
    gates = []
    for i in range(num_gates):
        v = num_inputs + i
        a = source(v, -1, True)
        if rng.random() < 0.1:
            gates.append(Gate(names[v], "INV" if rng.random() < 0.7 else "BUF", (names[a],)))
        else:
            b = source(v, a, True)
            gates.append(Gate(names[v], _KINDS_2[int(rng.integers(len(_KINDS_2)))],
                              (names[a], names[b])))
        at[(int(xs[v]), int(ys[v]))] = v
    outputs = [names[num_inputs + i] for i in range(num_gates) if not read[num_inputs + i]]
    return Netlist(tuple(names[:num_inputs]), tuple(outputs), tuple(gates),
                   name or f"synth{num_gates}_s{seed}")
