"""Routing-centric candidate enumeration: how many drivers fit in a bounding box."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from ..physical.split import SplitTruth, SplitView

DEFAULT_BBOXES = (15, 30, 45)


@dataclass(frozen=True)
class BBoxRow:
    bbox: int
    expected_list_size: float
    match_in_list: float | None = None


@dataclass(frozen=True)
class CroutingReport:
    num_vpins: int
    num_sink_vpins: int
    rows: tuple[BBoxRow, ...]

    def to_json(self) -> str:
        return json.dumps({
            "num_vpins": self.num_vpins,
            "num_sink_vpins": self.num_sink_vpins,
            "bboxes": [{"bbox": r.bbox,
                        "expected_list_size": round(r.expected_list_size, 4),
                        "match_in_list": None if r.match_in_list is None
                        else round(r.match_in_list, 4)} for r in self.rows],
        }, indent=1) + "\n"


def _distances(sinks, drivers):
    sx = np.array([s.x for s in sinks], dtype=np.int64)[:, None]
    sy = np.array([s.y for s in sinks], dtype=np.int64)[:, None]
    dx = np.array([d.x for d in drivers], dtype=np.int64)[None, :]
    dy = np.array([d.y for d in drivers], dtype=np.int64)[None, :]
    return np.abs(sx - dx) + np.abs(sy - dy)


def crouting_attack(view: SplitView, bboxes=DEFAULT_BBOXES) -> CroutingReport:
    """For each sink vpin, the candidates are the driver vpins whose bounding box
    with it has half-perimeter at most ``bbox``.  ``match_in_list`` is left
    empty: only the scorer can fill it.
    """
    bboxes = tuple(int(b) for b in bboxes)
    if not bboxes:
        raise ValueError("need at least one bounding box size")
    if any(b < 0 for b in bboxes):
        raise ValueError("bounding box sizes must be non-negative")
    sinks, drivers = view.sink_vpins(), view.driver_vpins()
    counts = {b: 0 for b in bboxes}
    for lo in range(0, len(sinks), 512):
        if not drivers:
            break
        dist = _distances(sinks[lo:lo + 512], drivers)
        for b in bboxes:
            counts[b] += int((dist <= b).sum())
    n = len(sinks)
    rows = tuple(BBoxRow(b, counts[b] / n if n else 0.0) for b in bboxes)
    return CroutingReport(len(view.vpins), n, rows)


def score_crouting(report: CroutingReport, view: SplitView, truth: SplitTruth) -> CroutingReport:
    """Fill in the share of sink vpins whose true driver has a vpin inside the box."""
    sinks, drivers = view.sink_vpins(), view.driver_vpins()
    if len(sinks) != report.num_sink_vpins:
        raise ValueError("report does not belong to this view")
    by_frag: dict[str, list[int]] = {}
    for j, d in enumerate(drivers):
        by_frag.setdefault(d.fragment, []).append(j)
    best = []
    for s in sinks:
        idx = by_frag.get(truth.true_driver(s.fragment), [])
        best.append(min((abs(s.x - drivers[j].x) + abs(s.y - drivers[j].y) for j in idx),
                        default=None))
    n = len(sinks)
    rows = tuple(replace(r, match_in_list=sum(1 for d in best if d is not None and d <= r.bbox) / n
                         if n else 0.0) for r in report.rows)
    return replace(report, rows=rows)
