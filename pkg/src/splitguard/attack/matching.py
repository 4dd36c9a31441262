"""Minimum-cost assignment of sinks to capacitated drivers.

Successive shortest paths with Johnson potentials.  Sinks are inserted one
at a time.  Each insertion augments along the cheapest alternating path to
a driver with spare capacity; when none is reachable, the new sink may
instead push out an earlier sink if that lowers the total cost.  Either
step cancels the cheapest cycle through the new sink, so every prefix of
sinks holds a minimum-cost maximum assignment.  Costs must be integers so
reduced costs stay exact.
"""

from __future__ import annotations

from heapq import heappop, heappush


def min_cost_assignment(candidates, capacity, bonus: int = 0) -> list[int]:
    """Assign sinks to drivers at minimum total cost.

    ``candidates[s]`` is a list of ``(cost, driver)`` pairs for sink ``s``;
    ``capacity[d]`` bounds how many sinks driver ``d`` may take.  The
    number of assigned sinks is maximized first.  A positive ``bonus`` is
    subtracted once for every driver that receives at least one sink, so
    with a large enough bonus the solver also maximizes the number of
    drivers in use before minimizing cost.  Returns each sink's driver, or
    ``-1`` for sinks left out.
    """
    ns, nd = len(candidates), len(capacity)
    cost = [dict() for _ in range(ns)]
    for s, cand in enumerate(candidates):
        for c, d in cand:
            if d not in cost[s] or c < cost[s][d]:
                cost[s][d] = c
    adj = [sorted(cost[s].items(), key=lambda t: (t[1], t[0])) for s in range(ns)]
    match = [-1] * ns
    members: list[set[int]] = [set() for _ in range(nd)]
    pot_s = [0] * ns
    pot_d = [0] * nd
    pot_t = -bonus
    for s0 in range(ns):
        if not adj[s0]:
            continue
        pot_s[s0] = max(pot_d[d] - c for d, c in adj[s0])
        # Node keys: sinks are s, drivers are ns + d, the super target is -1.
        dist = {s0: 0}
        parent: dict[int, int] = {}
        done = {}
        heap = [(0, s0)]
        target = None
        while heap:
            du, u = heappop(heap)
            if u in done or du > dist.get(u, du):
                continue
            done[u] = du
            if u == -1:
                target = du
                break
            if u < ns:
                for d, c in adj[u]:
                    if match[u] == d:
                        continue
                    v = ns + d
                    nd_ = du + c + pot_s[u] - pot_d[d]
                    if v not in done and nd_ < dist.get(v, nd_ + 1):
                        dist[v] = nd_
                        parent[v] = u
                        heappush(heap, (nd_, v))
            else:
                d = u - ns
                for s in members[d]:
                    nd_ = du - cost[s][d] + pot_d[d] - pot_s[s]
                    if s not in done and nd_ < dist.get(s, nd_ + 1):
                        dist[s] = nd_
                        parent[s] = u
                        heappush(heap, (nd_, s))
                if len(members[d]) < capacity[d]:
                    nd_ = du + pot_d[d] - pot_t - (bonus if not members[d] else 0)
                    if nd_ < dist.get(-1, nd_ + 1):
                        dist[-1] = nd_
                        parent[-1] = u
                        heappush(heap, (nd_, -1))
        if target is None:
            # No spare capacity reachable: let s0 displace an earlier sink when
            # that lowers the total cost (a negative cycle through s0).
            best = None
            for u, du in done.items():
                if 0 <= u < ns and u != s0:
                    actual = du - pot_s[s0] + pot_s[u]
                    if actual < 0 and (best is None or (actual, u) < best):
                        best = (actual, u)
            if best is None:
                continue
            target = max(done.values())
            end = best[1]
        else:
            end = -1
        for u, du in done.items():
            if u == -1:
                continue
            if u < ns:
                pot_s[u] += du - target
            else:
                pot_d[u - ns] += du - target
        v = parent[end]
        if end != -1:
            members[match[end]].discard(end)
            match[end] = -1
        # Walk back to s0, shifting each sink on the path to the next driver.
        while True:
            d = v - ns
            s = parent[v]
            old = match[s]
            if old >= 0:
                members[old].discard(s)
            match[s] = d
            members[d].add(s)
            if s == s0:
                break
            v = parent[s]
    return match


def assignment_cost(candidates, match, bonus: int = 0) -> int:
    """Total cost of ``match`` under ``candidates`` (unassigned sinks cost 0)."""
    total = -bonus * len({d for d in match if d >= 0})
    for s, d in enumerate(match):
        if d >= 0:
            total += min(c for c, dd in candidates[s] if dd == d)
    return total
