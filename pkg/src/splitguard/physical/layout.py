"""Layout data model: placed cells, pads, correction cells and routed wires.

Coordinates are integer site indices; one site is one routing track in
each direction.  Layers are numbered 1..10, odd layers run horizontally
and even layers vertically.  A ``Via(k, x, y)`` joins layer ``k`` to
``k + 1``.

Pins are referenced by string:

* ``g:<gate>:Y`` output of a gate, ``g:<gate>:<i>`` its ``i``-th input
* ``pi:<name>`` / ``po:<name>`` primary input / output pads
* ``cc:<cell>:<C|D|Y|Z>`` correction-cell pins

Gate and pad pins land on layer 1 over their site; correction-cell pins
sit on the cell's own layer.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property

NUM_LAYERS = 10

ERRONEOUS_ARCS = (("C", "Z"), ("D", "Y"))
TRUE_ARCS = (("C", "Y"), ("D", "Z"))
CELL_PIN_OFFSETS = {"C": (0, 0), "D": (1, 0), "Y": (0, 1), "Z": (1, 1)}


class LayoutError(ValueError):
    pass


class LayoutFormatError(LayoutError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def is_horizontal(layer: int) -> bool:
    return layer % 2 == 1


@dataclass(frozen=True, order=True)
class Segment:
    layer: int
    x1: int
    y1: int
    x2: int
    y2: int

    def __post_init__(self):
        if self.x1 > self.x2 or self.y1 > self.y2:
            raise LayoutError(f"segment endpoints not normalized: {self}")
        if self.x1 != self.x2 and self.y1 != self.y2:
            raise LayoutError(f"segment is not axis-aligned: {self}")
        if is_horizontal(self.layer) and self.y1 != self.y2 or \
                not is_horizontal(self.layer) and self.x1 != self.x2:
            raise LayoutError(f"segment against preferred direction of M{self.layer}: {self}")

    @property
    def length(self) -> int:
        return self.x2 - self.x1 + self.y2 - self.y1

    def points(self):
        if self.x1 == self.x2:
            return [(self.x1, y) for y in range(self.y1, self.y2 + 1)]
        return [(x, self.y1) for x in range(self.x1, self.x2 + 1)]


@dataclass(frozen=True, order=True)
class Via:
    k: int
    x: int
    y: int


@dataclass(frozen=True)
class PlacedCell:
    name: str
    kind: str
    x: int
    y: int


@dataclass(frozen=True)
class Pad:
    name: str
    direction: str  # "IN" or "OUT"
    x: int
    y: int

    @property
    def ref(self) -> str:
        return ("pi:" if self.direction == "IN" else "po:") + self.name


@dataclass(frozen=True)
class CorrectionCell:
    """Two-in, two-out connector on a high layer; active arcs pick the wiring."""

    id: str
    x: int
    y: int
    layer: int
    arcs: tuple[tuple[str, str], ...] = ERRONEOUS_ARCS

    def pin_xy(self, pin: str) -> tuple[int, int]:
        dx, dy = CELL_PIN_OFFSETS[pin]
        return self.x + dx, self.y + dy

    def footprint(self) -> set[tuple[int, int]]:
        return {self.pin_xy(p) for p in CELL_PIN_OFFSETS}

    def ref(self, pin: str) -> str:
        return f"cc:{self.id}:{pin}"


@dataclass(frozen=True)
class Wire:
    name: str
    pins: tuple[str, ...]
    min_layer: int = 1
    segments: tuple[Segment, ...] = ()
    vias: tuple[Via, ...] = ()

    @property
    def wirelength(self) -> int:
        return sum(s.length for s in self.segments)


def gate_pin(gate: str, index: int | str) -> str:
    return f"g:{gate}:{index}"


def parse_ref(ref: str) -> tuple[str, str, str | None]:
    """Split a pin reference into ``(kind, owner, pin)``."""
    kind, _, rest = ref.partition(":")
    if kind in ("pi", "po"):
        return kind, rest, None
    if kind in ("g", "cc"):
        owner, _, pin = rest.rpartition(":")
        return kind, owner, pin
    raise LayoutError(f"bad pin reference {ref!r}")


def is_driver_ref(ref: str) -> bool:
    return ref.startswith("pi:") or ref.startswith("g:") and ref.endswith(":Y")


@dataclass(frozen=True)
class RoutedLayout:
    cols: int
    rows: int
    cells: tuple[PlacedCell, ...]
    pads: tuple[Pad, ...]
    ccells: tuple[CorrectionCell, ...] = ()
    wires: tuple[Wire, ...] = ()
    layers: int = NUM_LAYERS

    @cached_property
    def cell_map(self) -> dict[str, PlacedCell]:
        return {c.name: c for c in self.cells}

    @cached_property
    def ccell_map(self) -> dict[str, CorrectionCell]:
        return {c.id: c for c in self.ccells}

    @cached_property
    def pad_map(self) -> dict[str, Pad]:
        return {p.ref: p for p in self.pads}

    @cached_property
    def wire_map(self) -> dict[str, Wire]:
        return {w.name: w for w in self.wires}

    @property
    def inputs(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.pads if p.direction == "IN")

    @property
    def outputs(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.pads if p.direction == "OUT")

    def pin_location(self, ref: str) -> tuple[int, int, int]:
        kind, owner, pin = parse_ref(ref)
        if kind == "g":
            c = self.cell_map[owner]
            return c.x, c.y, 1
        if kind == "cc":
            cc = self.ccell_map[owner]
            x, y = cc.pin_xy(pin)
            return x, y, cc.layer
        p = self.pad_map[ref]
        return p.x, p.y, 1

    def with_wires(self, wires, ccells=None) -> RoutedLayout:
        ccells = self.ccells if ccells is None else tuple(ccells)
        return replace(self, wires=tuple(sorted(wires, key=lambda w: w.name)), ccells=ccells)

    def feol_signature(self, below: int) -> tuple:
        """All geometry on layers ``< below``, for FEOL comparisons."""
        out = []
        for w in self.wires:
            segs = tuple(s for s in w.segments if s.layer < below)
            vias = tuple(v for v in w.vias if v.k + 1 < below)
            if segs or vias:
                out.append((w.name, segs, vias))
        return tuple(out)


def _arcs_text(arcs) -> str:
    return ",".join(f"{a}>{b}" for a, b in arcs)


def write_layout(layout: RoutedLayout) -> str:
    lines = ["LAYOUT 1", f"DIE {layout.cols} {layout.rows} LAYERS {layout.layers} SPLIT -"]
    for c in layout.cells:
        lines.append(f"CELL {c.name} {c.x} {c.y} {c.kind}")
    for p in layout.pads:
        lines.append(f"PAD {p.name} {p.direction} {p.x} {p.y}")
    for cc in layout.ccells:
        lines.append(f"CCELL {cc.id} {cc.x} {cc.y} {cc.layer} {_arcs_text(cc.arcs)}")
    for w in layout.wires:
        lines.append(f"WIRE {w.name} {w.min_layer}")
        lines += [f"PIN {w.name} {r}" for r in w.pins]
        lines += [f"SEG {w.name} {s.layer} {s.x1} {s.y1} {s.x2} {s.y2}" for s in w.segments]
        lines += [f"VIA {w.name} {v.k} {v.x} {v.y}" for v in w.vias]
    return "\n".join(lines) + "\n"


def read_layout(text: str) -> RoutedLayout:
    cols = rows = None
    layers = NUM_LAYERS
    cells, pads, ccells = [], [], []
    wires: dict[str, dict] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        f = raw.split()
        if not f or f[0].startswith("#") or f[0] == "LAYOUT":
            continue
        try:
            tag = f[0]
            if tag == "DIE":
                cols, rows, layers = int(f[1]), int(f[2]), int(f[4])
            elif tag == "CELL":
                cells.append(PlacedCell(f[1], f[4], int(f[2]), int(f[3])))
            elif tag == "PAD":
                pads.append(Pad(f[1], f[2], int(f[3]), int(f[4])))
            elif tag == "CCELL":
                arcs = tuple(tuple(a.split(">")) for a in f[5].split(",")) if len(f) > 5 else ()
                ccells.append(CorrectionCell(f[1], int(f[2]), int(f[3]), int(f[4]), arcs))
            elif tag == "WIRE":
                wires[f[1]] = {"min": int(f[2]), "pins": [], "segs": [], "vias": []}
            elif tag == "PIN":
                wires[f[1]]["pins"].append(f[2])
            elif tag == "SEG":
                wires[f[1]]["segs"].append(Segment(*map(int, f[2:7])))
            elif tag == "VIA":
                wires[f[1]]["vias"].append(Via(*map(int, f[2:5])))
            else:
                raise LayoutFormatError(f"unknown record {tag!r}", lineno)
        except (IndexError, KeyError, ValueError) as exc:
            if isinstance(exc, LayoutFormatError):
                raise
            raise LayoutFormatError(f"malformed record: {raw.strip()!r}", lineno) from None
    if cols is None:
        raise LayoutFormatError("missing DIE record", 1)
    ws = tuple(Wire(name, tuple(d["pins"]), d["min"], tuple(d["segs"]), tuple(d["vias"]))
               for name, d in wires.items())
    return RoutedLayout(cols, rows, tuple(cells), tuple(pads), tuple(ccells), ws, layers)


class UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, a):
        parent = self.parent
        root = a
        while parent.setdefault(root, root) != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb



def wire_components(layout: RoutedLayout, wire: Wire) -> UnionFind:
    """Union-find over a wire's grid points and pins, built from its geometry."""
    uf = UnionFind()
    for s in wire.segments:
        pts = s.points()
        for a, b in zip(pts, pts[1:]):
            uf.union((s.layer,) + a, (s.layer,) + b)
        if len(pts) == 1:
            uf.find((s.layer,) + pts[0])
    for v in wire.vias:
        uf.union((v.k, v.x, v.y), (v.k + 1, v.x, v.y))
    for ref in wire.pins:
        x, y, layer = layout.pin_location(ref)
        uf.union(ref, (layer, x, y))
    return uf


def check_layout(layout: RoutedLayout) -> None:
    """Raise ``LayoutError`` unless every wire is one connected tree over its pins."""
    sites = set()
    for c in layout.cells:
        if not (0 <= c.x < layout.cols and 0 <= c.y < layout.rows):
            raise LayoutError(f"cell {c.name} outside the die")
        if (c.x, c.y) in sites:
            raise LayoutError(f"cell {c.name} overlaps another cell")
        sites.add((c.x, c.y))
    taken = set()
    for cc in layout.ccells:
        fp = cc.footprint()
        if any(not (0 <= x < layout.cols and 0 <= y < layout.rows) for x, y in fp):
            raise LayoutError(f"correction cell {cc.id} outside the die")
        if fp & taken:
            raise LayoutError(f"correction cell {cc.id} overlaps another correction cell")
        taken |= fp
    for w in layout.wires:
        for s in w.segments:
            if not (1 <= s.layer <= layout.layers):
                raise LayoutError(f"wire {w.name} uses layer {s.layer}")
            if s.layer < w.min_layer:
                raise LayoutError(f"wire {w.name} has a trunk segment below M{w.min_layer}")
        uf = wire_components(layout, w)
        roots = {uf.find(r) for r in w.pins}
        roots |= {uf.find((s.layer, s.x1, s.y1)) for s in w.segments}
        if len(roots) > 1:
            raise LayoutError(f"wire {w.name} is not connected")
        nodes = {n for n in uf.parent if isinstance(n, tuple)}
        edges = sum(s.length for s in w.segments) + len(w.vias)
        if nodes and edges != len(nodes) - 1:
            raise LayoutError(f"wire {w.name} is not a tree")
