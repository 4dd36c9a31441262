"""Cutting a layout at a split layer into the attacker's view and the hidden rest.

A *fragment* is a connected piece of one wire's geometry on layers up to
the split layer ``k``, together with the gate and pad pins it touches.
Wherever the wire climbs from layer ``k`` to ``k + 1`` the fragment gets
a vpin.  Fragments and vpins are numbered by position only, so nothing
in a ``SplitView`` names a net.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .layout import (NUM_LAYERS, CorrectionCell, Pad, PlacedCell, RoutedLayout, Segment,
                     UnionFind, Via, Wire, is_driver_ref, parse_ref)

DRIVER, SINK = "driver", "sink"
DIRECTIONS = ("N", "E", "S", "W", "NONE")


@dataclass(frozen=True)
class Fragment:
    id: str
    role: str
    pins: tuple[str, ...]
    segments: tuple[Segment, ...]
    vias: tuple[Via, ...]


@dataclass(frozen=True)
class VPin:
    id: str
    x: int
    y: int
    direction: str
    role: str
    fragment: str


@dataclass(frozen=True)
class SplitView:
    """Everything on layers ``<= split_layer``: the attacker's whole knowledge."""

    split_layer: int
    cols: int
    rows: int
    cells: tuple[PlacedCell, ...]
    pads: tuple[Pad, ...]
    fragments: tuple[Fragment, ...]
    vpins: tuple[VPin, ...]

    @cached_property
    def fragment_map(self) -> dict[str, Fragment]:
        return {f.id: f for f in self.fragments}

    @cached_property
    def cell_map(self) -> dict[str, PlacedCell]:
        return {c.name: c for c in self.cells}

    @property
    def inputs(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.pads if p.direction == "IN")

    @property
    def outputs(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.pads if p.direction == "OUT")

    def driver_vpins(self) -> list[VPin]:
        return [v for v in self.vpins if v.role == DRIVER]

    def sink_vpins(self) -> list[VPin]:
        """Sink-side vpins whose fragment reaches at least one pin."""
        fm = self.fragment_map
        return [v for v in self.vpins if v.role == SINK and fm[v.fragment].pins]

    def to_text(self) -> str:
        lines = ["SPLITVIEW 1",
                 f"DIE {self.cols} {self.rows} LAYERS {NUM_LAYERS} SPLIT {self.split_layer}"]
        lines += [f"CELL {c.name} {c.x} {c.y} {c.kind}" for c in self.cells]
        lines += [f"PAD {p.name} {p.direction} {p.x} {p.y}" for p in self.pads]
        for f in self.fragments:
            lines.append(f"FRAG {f.id} {f.role}")
            lines += [f"PIN {f.id} {r}" for r in f.pins]
            lines += [f"SEG {f.id} {s.layer} {s.x1} {s.y1} {s.x2} {s.y2}" for s in f.segments]
            lines += [f"VIA {f.id} {v.k} {v.x} {v.y}" for v in f.vias]
        lines += [f"VPIN {v.id} {v.x} {v.y} {v.direction} {v.role} {v.fragment}"
                  for v in self.vpins]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> SplitView:
        k = cols = rows = 0
        cells, pads, vpins = [], [], []
        frags: dict[str, dict] = {}
        for line in text.splitlines():
            f = line.split()
            if not f:
                continue
            tag = f[0]
            if tag == "DIE":
                cols, rows, k = int(f[1]), int(f[2]), int(f[6])
            elif tag == "CELL":
                cells.append(PlacedCell(f[1], f[4], int(f[2]), int(f[3])))
            elif tag == "PAD":
                pads.append(Pad(f[1], f[2], int(f[3]), int(f[4])))
            elif tag == "FRAG":
                frags[f[1]] = {"role": f[2], "pins": [], "segs": [], "vias": []}
            elif tag == "PIN":
                frags[f[1]]["pins"].append(f[2])
            elif tag == "SEG":
                frags[f[1]]["segs"].append(Segment(*map(int, f[2:7])))
            elif tag == "VIA":
                frags[f[1]]["vias"].append(Via(*map(int, f[2:5])))
            elif tag == "VPIN":
                vpins.append(VPin(f[1], int(f[2]), int(f[3]), f[4], f[5], f[6]))
        fr = tuple(Fragment(i, d["role"], tuple(d["pins"]), tuple(d["segs"]), tuple(d["vias"]))
                   for i, d in frags.items())
        return cls(k, cols, rows, tuple(cells), tuple(pads), fr, tuple(vpins))


@dataclass(frozen=True)
class BeolWire:
    name: str
    min_layer: int
    pins: tuple[str, ...]
    fragments: tuple[str, ...]
    segments: tuple[Segment, ...]
    vias: tuple[Via, ...]


@dataclass(frozen=True)
class BeolPart:
    """What the trusted fab holds: geometry above the split plus wire identities."""

    split_layer: int
    ccells: tuple[CorrectionCell, ...]
    wires: tuple[BeolWire, ...]


@dataclass(frozen=True)
class SplitTruth:
    """Defender-side answer key for a ``SplitView``."""

    net_of_fragment: dict[str, str]
    driver_fragment: dict[str, str]

    def true_driver(self, fragment: str) -> str | None:
        return self.driver_fragment.get(self.net_of_fragment.get(fragment))


def _direction(segments, x: int, y: int) -> str:
    best = None
    for s in segments:
        if (s.x1, s.y1) == (x, y) and s.length:
            d = "W" if s.y1 == s.y2 else "S"
        elif (s.x2, s.y2) == (x, y) and s.length:
            d = "E" if s.y1 == s.y2 else "N"
        else:
            continue
        if best is None or s.length > best[0]:
            best = (s.length, d)
    return best[1] if best else "NONE"


def _cut(layout: RoutedLayout, k: int):
    """Fragments of every wire, before numbering: a list of raw dicts."""
    raw = []
    for w in layout.wires:
        feol_segs = [s for s in w.segments if s.layer <= k]
        feol_vias = [v for v in w.vias if v.k < k]
        cut_vias = [v for v in w.vias if v.k == k]
        uf = UnionFind()
        for s in feol_segs:
            pts = s.points()
            uf.find((s.layer,) + pts[0])
            for a, b in zip(pts, pts[1:]):
                uf.union((s.layer,) + a, (s.layer,) + b)
        for v in feol_vias:
            uf.union((v.k, v.x, v.y), (v.k + 1, v.x, v.y))
        for v in cut_vias:
            uf.find((k, v.x, v.y))
        pins = []
        for ref in w.pins:
            x, y, layer = layout.pin_location(ref)
            if layer <= k:
                pins.append(ref)
                uf.union(("pin", ref), (layer, x, y))
        groups: dict = {}
        for node in list(uf.parent):
            groups.setdefault(uf.find(node), []).append(node)
        for root, members in groups.items():
            pts = [m for m in members if m[0] != "pin"]
            fpins = tuple(r for r in pins if uf.find(("pin", r)) == root)
            segs = tuple(sorted(s for s in feol_segs if uf.find((s.layer, s.x1, s.y1)) == root))
            vias = tuple(sorted(v for v in feol_vias if uf.find((v.k, v.x, v.y)) == root))
            ups = sorted((v.y, v.x) for v in cut_vias if uf.find((k, v.x, v.y)) == root)
            layer_k = [s for s in segs if s.layer == k]
            raw.append({
                "wire": w.name,
                "key": (min((p[2], p[1], p[0]) for p in pts), fpins),
                "pins": fpins,
                "segments": segs,
                "vias": vias,
                "role": DRIVER if any(is_driver_ref(r) for r in fpins) else SINK,
                "vpins": [(x, y, _direction(layer_k, x, y)) for y, x in ups],
            })
    raw.sort(key=lambda r: r["key"])
    width = len(str(max(len(raw) - 1, 0)))
    for i, r in enumerate(raw):
        r["id"] = f"f{i:0{width}d}"
    return raw


def _view(layout: RoutedLayout, k: int, raw) -> SplitView:
    frags = tuple(Fragment(r["id"], r["role"], r["pins"], r["segments"], r["vias"]) for r in raw)
    vp = sorted((y, x, r["id"], d, r["role"]) for r in raw for x, y, d in r["vpins"])
    width = len(str(max(len(vp) - 1, 0)))
    vpins = tuple(VPin(f"v{i:0{width}d}", x, y, d, role, fid)
                  for i, (y, x, fid, d, role) in enumerate(vp))
    return SplitView(k, layout.cols, layout.rows, layout.cells, layout.pads, frags, vpins)


def split(layout: RoutedLayout, k: int) -> SplitView:
    if not 1 <= k < layout.layers:
        raise ValueError(f"split layer must lie in 1..{layout.layers - 1}")
    return _view(layout, k, _cut(layout, k))


def beol_part(layout: RoutedLayout, k: int) -> BeolPart:
    raw = _cut(layout, k)
    by_wire: dict[str, list[str]] = {}
    for r in raw:
        by_wire.setdefault(r["wire"], []).append(r["id"])
    wires = tuple(BeolWire(w.name, w.min_layer, w.pins, tuple(by_wire.get(w.name, ())),
                           tuple(s for s in w.segments if s.layer > k),
                           tuple(v for v in w.vias if v.k >= k))
                  for w in layout.wires)
    return BeolPart(k, layout.ccells, wires)


def merge(view: SplitView, beol: BeolPart) -> RoutedLayout:
    """Reassemble the full layout from its two halves."""
    fm = view.fragment_map
    wires = []
    for bw in beol.wires:
        segs = list(bw.segments)
        vias = list(bw.vias)
        for fid in bw.fragments:
            segs += fm[fid].segments
            vias += fm[fid].vias
        wires.append(Wire(bw.name, bw.pins, bw.min_layer, tuple(sorted(segs)), tuple(sorted(vias))))
    return RoutedLayout(view.cols, view.rows, view.cells, view.pads, beol.ccells, tuple(wires))


def electrical_nets(layout: RoutedLayout) -> dict[str, str]:
    """Map each wire to the driver of its electrical net (gate or PI name).

    Wires join through shared pins and through the active arcs of the
    correction cells.  Wires with no driver map to ``""``.
    """
    uf = UnionFind()
    for w in layout.wires:
        for r in w.pins:
            uf.union(("w", w.name), r)
        uf.find(("w", w.name))
    for cc in layout.ccells:
        for a, b in cc.arcs:
            uf.union(cc.ref(a), cc.ref(b))
    driver_of_root = {}
    for w in layout.wires:
        for r in w.pins:
            if is_driver_ref(r):
                driver_of_root[uf.find(r)] = parse_ref(r)[1]
    return {w.name: driver_of_root.get(uf.find(("w", w.name)), "") for w in layout.wires}


def split_with_truth(layout: RoutedLayout, k: int) -> tuple[SplitView, SplitTruth]:
    raw = _cut(layout, k)
    view = _view(layout, k, raw)
    net = electrical_nets(layout)
    net_of_fragment = {r["id"]: net[r["wire"]] for r in raw}
    driver_fragment = {net[r["wire"]]: r["id"] for r in raw if r["role"] == DRIVER}
    return view, SplitTruth(net_of_fragment, driver_fragment)

