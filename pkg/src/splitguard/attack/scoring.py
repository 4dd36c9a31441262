"""Defender-side scoring of attack results against the hidden truth."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..physical.split import SplitTruth, SplitView
from .proximity import AttackResult


@dataclass(frozen=True)
class CcrScore:
    """Per-net rate: nets with every sink vpin on the true driver.  ``None`` if nothing was scored."""

    per_net: float | None
    per_sink: float | None
    num_nets: int
    num_sinks: int

    def to_json(self) -> dict:
        r = lambda v: None if v is None else round(v, 4)  # noqa: E731
        return {"ccr": r(self.per_net), "ccr_per_sink": r(self.per_sink),
                "num_nets": self.num_nets, "num_sinks": self.num_sinks}


def score_ccr(result: AttackResult, view: SplitView, truth: SplitTruth,
              protected_nets=None) -> CcrScore:
    """Score ``result`` over the nets in ``protected_nets`` (all nets when ``None``).

    Only nets with at least one sink vpin in the view are counted.
    """
    sinks = view.sink_vpins()
    got = result.driver_of
    if set(got) | set(result.unassigned) != {s.id for s in sinks} \
            or len(got) + len(result.unassigned) != len(sinks):
        raise ValueError("attack result does not cover this view's sink vpins")
    vfrag = {v.id: v.fragment for v in view.vpins}
    wanted = None if protected_nets is None else set(protected_nets)
    per_net: dict[str, bool] = {}
    hits = total = 0
    for s in sinks:
        net = truth.net_of_fragment.get(s.fragment)
        if not net or (wanted is not None and net not in wanted):
            continue
        d = got.get(s.id)
        ok = d is not None and vfrag[d] == truth.driver_fragment.get(net)
        per_net[net] = per_net.get(net, True) and ok
        hits += ok
        total += 1
    nets = len(per_net)
    return CcrScore(sum(per_net.values()) / nets if nets else None,
                    hits / total if total else None, nets, total)


@dataclass(frozen=True)
class SolutionSpace:
    full: float
    confined: float | None


def solution_space(num_two_pin_nets: int, mean_list_size: float | None = None) -> SolutionSpace:
    """log10 of the matchings among ``n`` two-pin nets: ``n!`` unconstrained, ``m**n`` confined.

    A candidate list can never hold more drivers than exist, so the confined
    count is capped at the unconstrained one.
    """
    n = num_two_pin_nets
    if n < 0 or (mean_list_size is not None and mean_list_size < 0):
        raise ValueError("counts must be non-negative")
    full = math.lgamma(n + 1) / math.log(10)
    confined = None
    if mean_list_size is not None:
        confined = 0.0 if n == 0 else (min(n * math.log10(mean_list_size), full)
                                       if mean_list_size > 0 else -math.inf)
    return SolutionSpace(full, confined)
