"""OER-driven netlist randomization by pairwise sink swapping."""

from __future__ import annotations

import bisect
import json
import random
from dataclasses import dataclass

from ..netlist import Gate, Netlist, Pin, Swap, apply_swap, detect_loop
from ..sim import DEFAULT_PATTERNS, OER_TARGET, PatternSet, score

SCREEN_PATTERNS = 4096


@dataclass(frozen=True)
class LedgerEntry:
    swap: Swap
    cell_pair: tuple[str, str] | None = None
    lift_layer: int | None = None

    def to_json(self) -> dict:
        d = {"swap": self.swap.to_json()}
        if self.cell_pair is not None:
            d["cell_pair"] = list(self.cell_pair)
            d["lift_layer"] = self.lift_layer
        return d

    @classmethod
    def from_json(cls, d: dict) -> LedgerEntry:
        pair = d.get("cell_pair")
        return cls(Swap.from_json(d["swap"]), tuple(pair) if pair else None, d.get("lift_layer"))


@dataclass(frozen=True)
class SwapLedger:
    """The defender's secret: every swap applied, plus its correction-cell pair."""

    entries: tuple[LedgerEntry, ...] = ()
    oer_achieved: float = 0.0
    seed: int = 0
    reached_target: bool = False
    stop_reason: str = ""
    num_patterns: int = 0

    @property
    def swaps(self) -> tuple[Swap, ...]:
        return tuple(e.swap for e in self.entries)

    @property
    def randomized_nets(self) -> list[str]:
        out = []
        for e in self.entries:
            out += [e.swap.driver_a, e.swap.driver_b]
        return out

    def moved_connections(self) -> list[tuple[str, Pin]]:
        """True (driver, sink pin) pairs that randomization redirected."""
        out = []
        for e in self.entries:
            s = e.swap
            out += [(s.driver_a, p) for p in s.sinks_a]
            out += [(s.driver_b, p) for p in s.sinks_b]
        return out

    def to_json(self) -> str:
        return json.dumps({
            "seed": self.seed,
            "oer_achieved": round(self.oer_achieved, 6),
            "reached_target": self.reached_target,
            "stop_reason": self.stop_reason,
            "num_patterns": self.num_patterns,
            "entries": [e.to_json() for e in self.entries],
        }, indent=1)

    @classmethod
    def from_json(cls, text: str) -> SwapLedger:
        d = json.loads(text)
        return cls(tuple(LedgerEntry.from_json(e) for e in d["entries"]), d["oer_achieved"],
                   d["seed"], d.get("reached_target", False), d.get("stop_reason", ""),
                   d.get("num_patterns", 0))


def undo_swaps(n_rand: Netlist, ledger: SwapLedger) -> Netlist:
    """Apply the ledger's swaps in reverse order, recovering the original wiring."""
    for e in reversed(ledger.entries):
        n_rand = apply_swap(n_rand, e.swap)
    return n_rand


class _Rewirer:
    """Mutable view of gate inputs used while searching for swaps."""

    def __init__(self, n: Netlist):
        self.inputs = {g.name: list(g.inputs) for g in n.gates}
        self.fanout: dict[str, set[str]] = {net: set() for net in n.nets}
        for g in n.gates:
            for net in g.inputs:
                self.fanout[net].add(g.name)

    def move(self, pin: Pin, new: str) -> str:
        ins = self.inputs[pin.gate]
        old = ins[pin.index]
        ins[pin.index] = new
        if old not in ins:
            self.fanout[old].discard(pin.gate)
        self.fanout[new].add(pin.gate)
        return old

    def reaches(self, src: str, dst: str) -> bool:
        """Whether gate ``dst`` is ``src`` or lies in its transitive fanout."""
        if src == dst:
            return True
        seen = {src}
        stack = [src]
        while stack:
            for w in self.fanout[stack.pop()]:
                if w == dst:
                    return True
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return False

    def netlist(self, like: Netlist) -> Netlist:
        return like.replace_gates(Gate(g.name, g.kind, tuple(self.inputs[g.name]))
                                  for g in like.gates)


def randomize(n: Netlist, *, oer_target: float = OER_TARGET, max_swaps: int | None = None,
              num_patterns: int = DEFAULT_PATTERNS, seed: int = 0, exempt=(),
              ledger: SwapLedger | None = None, min_swaps: int = 0,
              max_retries: int = 100, restarts: int = 1000) -> tuple[Netlist, SwapLedger]:
    """Swap single sinks between random driver pairs until OER reaches ``oer_target``.

    ``n`` is the original netlist.  When ``ledger`` is given, randomization
    resumes from the netlist that ledger describes and keeps its entries,
    and at least ``min_swaps`` new swaps are added.

    Swaps that would close a combinational loop are rejected and resampled,
    at most ``max_retries`` times per accepted swap.  A pin moves at most
    once.  Nets not yet randomized are preferred; a net is reused only when
    fewer than two fresh ones remain.  If the candidates run out before the
    target is met the search restarts, up to ``restarts`` times, and the
    best attempt is kept.  Missing the target is reported in the ledger.
    """
    if detect_loop(n):
        raise ValueError("cannot randomize a cyclic netlist")
    patterns = PatternSet.for_budget(n.inputs, num_patterns, seed)
    rng = random.Random(seed)
    best = None
    for _ in range(restarts + 1):
        result = _attempt(n, patterns, rng, oer_target, max_swaps, set(exempt), ledger,
                          min_swaps, max_retries)
        if best is None or result[1].oer_achieved > best[1].oer_achieved:
            best = result
        if result[1].stop_reason in ("target reached", "max_swaps reached"):
            break
    current, entries, oer, reason = best[0], best[1].entries, best[1].oer_achieved, \
        best[1].stop_reason
    return current, SwapLedger(entries, oer, seed, oer >= oer_target, reason,
                               patterns.num_patterns)


def _attempt(n, patterns, rng, oer_target, max_swaps, exempt, ledger, min_swaps, max_retries):
    entries = list(ledger.entries) if ledger else []
    work = _Rewirer(n)
    for e in entries:
        s = e.swap
        for pin in s.sinks_a:
            work.move(pin, s.driver_b)
        for pin in s.sinks_b:
            work.move(pin, s.driver_a)
    used = {net for e in entries for net in (e.swap.driver_a, e.swap.driver_b)}
    moved = {p for e in entries for p in e.swap.sinks_a + e.swap.sinks_b}

    screen_words = -(-SCREEN_PATTERNS // 64)
    screen = patterns
    if patterns.num_words > screen_words:
        screen = PatternSet(patterns.inputs, patterns.bits[:, :screen_words],
                            screen_words * 64, patterns.seed)
    limit = max_swaps if max_swaps is not None else len(n.nets)

    def movable(net):
        return sorted(p for g in work.fanout[net] for p in
                      (Pin(g, i) for i, x in enumerate(work.inputs[g]) if x == net)
                      if p not in moved and p.gate not in exempt)

    # Movable-pin counts change only on the two nets of an accepted swap, so
    # the candidate pools are kept sorted and updated in place.
    count = {net: len(movable(net)) for net in work.fanout}
    eligible = sorted(net for net in work.fanout if net not in exempt and count[net])
    fresh = [net for net in eligible if net not in used]

    def drop(pool, net):
        i = bisect.bisect_left(pool, net)
        if i < len(pool) and pool[i] == net:
            del pool[i]

    current = work.netlist(n)
    oer = score(n, current, patterns).oer if entries else 0.0
    reason = ""
    new_swaps = 0
    while True:
        if oer >= oer_target and new_swaps >= min_swaps:
            reason = "target reached"
            break
        if len(entries) >= limit:
            reason = "max_swaps reached"
            break
        pool = fresh if len(fresh) >= 2 else eligible
        if len(pool) < 2:
            reason = "no eligible nets left"
            break
        accepted = None
        for _ in range(max_retries + 1):
            a, b = rng.sample(pool, 2)
            pa = rng.choice(movable(a))
            pb = rng.choice(movable(b))
            work.move(pa, b)
            work.move(pb, a)
            loop = (b in work.inputs and work.reaches(pa.gate, b)) or \
                   (a in work.inputs and work.reaches(pb.gate, a))
            if not loop:
                accepted = Swap(a, (pa,), b, (pb,))
                break
            work.move(pb, b)
            work.move(pa, a)
        if accepted is None:
            reason = "loop retries exhausted"
            break
        entries.append(LedgerEntry(accepted))
        used |= {a, b}
        moved |= {pa, pb}
        for net in (a, b):
            drop(fresh, net)
            count[net] -= 1
            if not count[net]:
                drop(eligible, net)
        new_swaps += 1
        if new_swaps < min_swaps:
            continue
        current = work.netlist(n)
        if screen is patterns:
            oer = score(n, current, patterns).oer
        else:
            oer = score(n, current, screen).oer
            if oer >= oer_target:
                oer = score(n, current, patterns).oer
    if reason != "target reached":
        current = work.netlist(n)
        oer = score(n, current, patterns).oer if entries else 0.0
    return current, SwapLedger(tuple(entries), oer, 0, oer >= oer_target, reason)
