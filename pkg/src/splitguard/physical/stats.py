"""Wirelength and via accounting, and driver-to-sink distance statistics."""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass

from ..netlist import Pin
from .layout import NUM_LAYERS, RoutedLayout
from .place import Placement


@dataclass(frozen=True)
class LayerStats:
    wirelength: tuple[int, ...]   # index i is layer M(i+1)
    vias: tuple[int, ...]         # index i is V(i+1)(i+2)

    @property
    def total_wirelength(self) -> int:
        return sum(self.wirelength)

    @property
    def total_vias(self) -> int:
        return sum(self.vias)

    def vias_above(self, k: int) -> int:
        """Vias from V(k)(k+1) upward."""
        return sum(self.vias[k - 1:])

    def wirelength_above(self, k: int) -> int:
        """Wirelength on layers strictly above ``k``."""
        return sum(self.wirelength[k:])

    def to_json(self) -> dict:
        out = {f"M{i + 1}": wl for i, wl in enumerate(self.wirelength)}
        out.update({f"V{i + 1}{i + 2}": v for i, v in enumerate(self.vias)})
        out["total_wirelength"] = self.total_wirelength
        out["total_vias"] = self.total_vias
        return out


def layer_stats(layout: RoutedLayout | None = None) -> LayerStats:
    layers = layout.layers if layout is not None else NUM_LAYERS
    wl = [0] * layers
    vias = [0] * (layers - 1)
    for w in layout.wires if layout is not None else ():
        for s in w.segments:
            wl[s.layer - 1] += s.length
        for v in w.vias:
            vias[v.k - 1] += 1
    return LayerStats(tuple(wl), tuple(vias))


@dataclass(frozen=True)
class DistanceStats:
    mean: float
    median: float
    stddev: float
    count: int

    def to_json(self) -> dict:
        return {"mean": self.mean, "median": self.median, "stddev": self.stddev,
                "count": self.count}


def summarize(values) -> DistanceStats:
    values = list(values)
    if not values:
        raise ValueError("no connections to measure")
    return DistanceStats(statistics.fmean(values), float(statistics.median(values)),
                         statistics.pstdev(values), len(values))


def _metric(metric: str):
    if metric == "manhattan":
        return lambda a, b: abs(a[0] - b[0]) + abs(a[1] - b[1])
    if metric == "euclidean":
        return lambda a, b: math.hypot(a[0] - b[0], a[1] - b[1])
    raise ValueError(f"unknown metric {metric!r}")


def connection_distances(p: Placement, connections, metric: str = "manhattan") -> list[float]:
    """Distances for ``(driver_net, sink)`` pairs; a sink is a ``Pin`` or a PO name."""
    loc = p.loc
    pads = p.pad_loc
    dist = _metric(metric)
    out = []
    for driver, sink in connections:
        a = loc[driver] if driver in loc else pads["pi:" + driver]
        b = loc[sink.gate] if isinstance(sink, Pin) else pads["po:" + sink]
        out.append(dist(a, b))
    return out


def net_connections(n, nets=None) -> list[tuple[str, object]]:
    """All driver-sink pairs of ``nets`` (every net when ``None``) in netlist ``n``."""
    wanted = None if nets is None else set(nets)
    out = []
    for net, pins in n.fanout.items():
        if wanted is None or net in wanted:
            out += [(net, pin) for pin in pins]
    for po in n.outputs:
        if wanted is None or po in wanted:
            out.append((po, po))
    return out


def distance_stats(p: Placement, connections, metric: str = "manhattan") -> DistanceStats:
    return summarize(connection_distances(p, connections, metric))
