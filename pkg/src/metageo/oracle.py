"""Breadth-first search in Cayley graphs, used as ground truth for word lengths.

``neighbors(state)`` must return the states reached by right-multiplying
with every generator letter.  The generating set is closed under inverses,
so the graph is undirected and a search from the target can be run with the
same function.
"""

from __future__ import annotations

from collections import deque
from typing import Callable, Hashable, Iterable, TypeVar

from .errors import CapExceededError

S = TypeVar("S", bound=Hashable)


def bfs_ball(start: S, neighbors: Callable[[S], Iterable[S]], radius: int, cap: int) -> dict[S, int]:
    dist = {start: 0}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        d = dist[x]
        if d == radius:
            continue
        for y in neighbors(x):
            if y not in dist:
                dist[y] = d + 1
                if len(dist) > cap:
                    raise CapExceededError(f"BFS exceeded {cap} states before radius {radius}")
                queue.append(y)
    return dist


def bidirectional_distance(start: S, target: S, neighbors: Callable[[S], Iterable[S]],
                           radius: int, cap: int) -> int | None:
    """Graph distance between two states, or ``None`` if it exceeds ``radius``.

    Whole layers are expanded from the smaller side.  The first layer that
    touches the other side's visited set yields the exact distance: any
    shorter path would have met one layer earlier.
    """
    if start == target:
        return 0
    sides = [{start: 0}, {target: 0}]
    frontiers = [[start], [target]]
    depth = [0, 0]
    while depth[0] + depth[1] < radius and frontiers[0] and frontiers[1]:
        i = 0 if len(frontiers[0]) <= len(frontiers[1]) else 1
        mine, other = sides[i], sides[1 - i]
        nxt = []
        best = None
        for x in frontiers[i]:
            for y in neighbors(x):
                if y in mine:
                    continue
                mine[y] = depth[i] + 1
                nxt.append(y)
                if y in other:
                    total = depth[i] + 1 + other[y]
                    best = total if best is None else min(best, total)
        if len(sides[0]) + len(sides[1]) > cap:
            raise CapExceededError(f"bidirectional BFS exceeded {cap} states")
        if best is not None:
            return best if best <= radius else None
        depth[i] += 1
        frontiers[i] = nxt
    return None
