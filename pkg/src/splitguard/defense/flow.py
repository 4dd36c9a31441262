"""The complete protection flow with the wirelength-budget loop."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..netlist import Netlist
from ..physical.layout import RoutedLayout
from ..physical.place import Placement, place
from ..physical.route import route
from ..physical.stats import layer_stats
from ..sim import DEFAULT_PATTERNS, OER_TARGET
from .cells import DEFAULT_LIFT_LAYER, LiftPlan, attach_correction_cells, restore
from .randomize import SwapLedger, randomize

LARGE_DESIGN = 10_000
# Placement weight of swapped connections: lifted nets pay for two via
# stacks, so the placer keeps their FEOL ends close.
SWAP_PULL = 8.0


def default_budget(n: Netlist) -> float:
    """Allowed wirelength overhead: 20% for small designs, 5% from 10k gates."""
    return 0.05 if len(n.gates) >= LARGE_DESIGN else 0.20


@dataclass(frozen=True)
class Protection:
    randomized: Netlist
    ledger: SwapLedger
    placement: Placement
    plan: LiftPlan
    erroneous: RoutedLayout
    restored: RoutedLayout
    rounds: int
    baseline_wirelength: int

    @property
    def wirelength_overhead(self) -> float:
        wl = layer_stats(self.restored).total_wirelength
        return wl / self.baseline_wirelength - 1 if self.baseline_wirelength else 0.0


def protected_placement(n_rand: Netlist, ledger: SwapLedger, *, seed: int = 0,
                        utilization: float = 0.6, pull: float = SWAP_PULL) -> Placement:
    """Place the randomized netlist with swapped connections weighted by ``pull``.

    The die grows if needed so that correction cells cover at most half of it.
    """
    side = math.ceil(math.sqrt(2 * 4 * 2 * len(ledger.entries)))
    weights = {tuple(pin): pull for e in ledger.entries for pin in e.swap.sinks_a + e.swap.sinks_b}
    return place(n_rand, utilization=utilization, seed=seed, min_side=side, pin_weights=weights)


def build_protected(n_rand: Netlist, ledger: SwapLedger, *, lift_layer: int, seed: int,
                    utilization: float, pull: float = SWAP_PULL):
    """Place the randomized netlist, insert cells, route, and restore."""
    p = protected_placement(n_rand, ledger, seed=seed, utilization=utilization, pull=pull)
    plan, ledger = attach_correction_cells(n_rand, ledger, p, lift_layer)
    erroneous = route(p, n_rand, **plan.route_args())
    return p, plan, ledger, erroneous, restore(erroneous, ledger)


def protect(n: Netlist, *, seed: int = 0, lift_layer: int = DEFAULT_LIFT_LAYER,
            oer_target: float = OER_TARGET, num_patterns: int = DEFAULT_PATTERNS,
            max_swaps: int | None = None, exempt=(), utilization: float = 0.6,
            budget: float | None = None, max_rounds: int = 4,
            baseline_wirelength: int | None = None, pull: float = SWAP_PULL) -> Protection:
    """Randomize, lay out with correction cells, and restore.

    After the first round, further rounds each add half again as many
    swaps, as long as the restored layout's wirelength stays within
    ``(1 + budget)`` of the unprotected layout's.  The last round within
    budget is kept; the first round is always kept.
    """
    if budget is None:
        budget = default_budget(n)
    if baseline_wirelength is None:
        baseline_wirelength = layer_stats(route(place(n, utilization=utilization, seed=seed),
                                                n)).total_wirelength
    limit = (1 + budget) * baseline_wirelength
    kw = dict(oer_target=oer_target, num_patterns=num_patterns, seed=seed, exempt=exempt,
              max_swaps=max_swaps)
    n_rand, ledger = randomize(n, **kw)
    built = build_protected(n_rand, ledger, lift_layer=lift_layer, seed=seed,
                            utilization=utilization, pull=pull)
    best = (n_rand, built)
    rounds = 1
    while rounds < max_rounds and layer_stats(best[1][4]).total_wirelength <= limit:
        prev = best[1][2]
        n_more, more = randomize(n, ledger=prev, min_swaps=max(1, len(prev.entries) // 2), **kw)
        if len(more.entries) <= len(prev.entries):
            break
        cand = build_protected(n_more, more, lift_layer=lift_layer, seed=seed,
                               utilization=utilization, pull=pull)
        if layer_stats(cand[4]).total_wirelength > limit:
            break
        best = (n_more, cand)
        rounds += 1
    n_rand, (p, plan, ledger, erroneous, restored) = best
    return Protection(n_rand, ledger, p, plan, erroneous, restored, rounds, baseline_wirelength)
