"""Compiled A* kernel for the grid router."""

from __future__ import annotations

import heapq

import numpy as np
from numba import njit

INF = np.iinfo(np.int64).max // 4


@njit(cache=True)
def astar(planar, via, in_tree, dist, parent, W, H, L, start, lo, gx, gy,
          cap, hard, pen, via_cost):
    """Cheapest path from ``start`` to any node with ``in_tree`` set.

    Returns the node path from the reached tree node back to ``start``, or
    an empty array when every route is blocked.  ``dist`` must be all INF on
    entry and is restored before returning.
    """
    WH = W * H
    touched = [start]
    dist[start] = 0
    parent[start] = -1
    sx = start % W
    sy = (start % WH) // W
    heap = [(abs(sx - gx) + abs(sy - gy), 0, start)]
    found = -1
    nbr = np.empty(6, np.int64)
    use = np.empty(6, np.int64)
    base = np.empty(6, np.int64)
    while len(heap) > 0:
        item = heapq.heappop(heap)
        g = -item[1]
        u = item[2]
        if g > dist[u]:
            continue
        if in_tree[u]:
            found = u
            break
        l = u // WH
        rem = u - l * WH
        y = rem // W
        x = rem - y * W
        k = 0
        if l % 2 == 0:
            if x > 0:
                nbr[k] = u - 1
                use[k] = planar[u - 1]
                base[k] = 1
                k += 1
            if x < W - 1:
                nbr[k] = u + 1
                use[k] = planar[u]
                base[k] = 1
                k += 1
        else:
            if y > 0:
                nbr[k] = u - W
                use[k] = planar[u - W]
                base[k] = 1
                k += 1
            if y < H - 1:
                nbr[k] = u + W
                use[k] = planar[u]
                base[k] = 1
                k += 1
        if l < L - 1:
            nbr[k] = u + WH
            use[k] = via[u]
            base[k] = via_cost
            k += 1
        if l > lo:
            nbr[k] = u - WH
            use[k] = via[u - WH]
            base[k] = via_cost
            k += 1
        for i in range(k):
            if use[i] >= hard:
                continue
            ng = g + base[i]
            if use[i] >= cap:
                ng += pen * (use[i] - cap + 1)
            v = nbr[i]
            if ng < dist[v]:
                if dist[v] == INF:
                    touched.append(v)
                dist[v] = ng
                parent[v] = u
                vr = v % WH
                vy = vr // W
                vx = vr - vy * W
                heapq.heappush(heap, (ng + abs(vx - gx) + abs(vy - gy), -ng, v))
    path = []
    u = found
    while u != -1:
        path.append(u)
        u = parent[u]
    for t in touched:
        dist[t] = INF
    return np.array(path, dtype=np.int64)
