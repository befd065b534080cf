"""Minimum walks (TSP paths) on finite subsets of the integer lattice.

A walk starts at ``start``, visits every target exactly once in some order
and finishes at ``end``; its length is measured in the L1 (Manhattan) metric.
``order`` in a solution always indexes into ``WalkInstance.targets``.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .caps import default_caps
from .errors import CapExceededError, InvalidInstanceError

log = logging.getLogger(__name__)

Point = tuple[int, ...]

APPROX_VARIANTS = ("nearest-neighbor+2opt", "mst-shortcut")


def manhattan(x: Sequence[int], y: Sequence[int]) -> int:
    if len(x) != len(y):
        raise ValueError(f"dimension mismatch: {len(x)} vs {len(y)}")
    return sum(abs(a - b) for a, b in zip(x, y))


@dataclass(frozen=True)
class WalkInstance:
    start: Point
    targets: tuple[Point, ...]
    end: Point

    def __post_init__(self):
        object.__setattr__(self, "start", tuple(self.start))
        object.__setattr__(self, "end", tuple(self.end))
        object.__setattr__(self, "targets", tuple(tuple(t) for t in self.targets))
        dim = len(self.start)
        if len(self.end) != dim or any(len(t) != dim for t in self.targets):
            raise InvalidInstanceError("all points of a walk instance must share one dimension")
        if len(set(self.targets)) != len(self.targets):
            raise InvalidInstanceError("walk targets must be pairwise distinct")

    @property
    def dim(self) -> int:
        return len(self.start)

    def translated(self, v: Sequence[int]) -> WalkInstance:
        def shift(p):
            return tuple(a + b for a, b in zip(p, v))
        return WalkInstance(shift(self.start), tuple(shift(t) for t in self.targets), shift(self.end))


@dataclass(frozen=True)
class WalkSolution:
    order: tuple[int, ...]
    length: int


def walk_length(inst: WalkInstance, order: Sequence[int]) -> int:
    stops = [inst.start] + [inst.targets[i] for i in order] + [inst.end]
    return sum(manhattan(p, q) for p, q in zip(stops, stops[1:]))


def _distance_data(inst: WalkInstance):
    pts = np.asarray(inst.targets, dtype=np.int64).reshape(len(inst.targets), inst.dim)
    start = np.asarray(inst.start, dtype=np.int64)
    end = np.asarray(inst.end, dtype=np.int64)
    dt = np.abs(pts[:, None, :] - pts[None, :, :]).sum(axis=2)
    ds = np.abs(pts - start).sum(axis=1)
    de = np.abs(pts - end).sum(axis=1)
    return dt, ds, de


def exact_walk_held_karp(inst: WalkInstance, cap: int | None = None) -> WalkSolution:
    """Bitmask dynamic program; ties go to the lexicographically smallest order.

    ``cost[mask, j]`` is the cheapest way to finish the walk from target ``j``
    when the targets in ``mask`` (``j`` among them) are already visited.  The
    optimal order is then rebuilt greedily from the start, always taking the
    smallest index that stays on an optimal completion.
    """
    cap = default_caps().walk_targets if cap is None else cap
    n = len(inst.targets)
    if n > cap:
        raise CapExceededError(f"Held-Karp cap is {cap} targets, instance has {n}")
    if n == 0:
        return WalkSolution((), manhattan(inst.start, inst.end))
    dt, ds, de = _distance_data(inst)

    full = (1 << n) - 1
    big = np.int64(1) << 40
    cost = np.full((1 << n, n), big, dtype=np.int64)
    cost[full, :] = de
    masks = np.arange(1 << n, dtype=np.int64)
    popcount = np.bitwise_count(masks)
    for level in range(n - 1, 0, -1):
        level_masks = masks[popcount == level]
        for k in range(n):
            bit = np.int64(1) << k
            m = level_masks[(level_masks & bit) == 0]
            if m.size == 0:
                continue
            cand = dt[:, k][None, :] + cost[m | bit, k][:, None]
            cost[m] = np.minimum(cost[m], cand)

    first = ds + cost[1 << np.arange(n), np.arange(n)]
    best = int(first.min())

    order: list[int] = []
    mask = 0
    spent = 0
    prev_dist = ds
    while len(order) < n:
        for k in range(n):
            if mask & (1 << k):
                continue
            if spent + int(prev_dist[k]) + int(cost[mask | (1 << k), k]) == best:
                spent += int(prev_dist[k])
                mask |= 1 << k
                order.append(k)
                prev_dist = dt[k]
                break
        else:  # pragma: no cover - the DP guarantees some k matches
            raise AssertionError("Held-Karp reconstruction failed")
    return WalkSolution(tuple(order), best)


@lru_cache(maxsize=16)
def _permutation_table(n: int) -> np.ndarray:
    table = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    table.setflags(write=False)
    return table


def permutation_bruteforce(inst: WalkInstance, cap: int | None = None) -> WalkSolution:
    """Minimum over every visiting order; first optimum in lexicographic order wins."""
    cap = default_caps().bruteforce_targets if cap is None else cap
    n = len(inst.targets)
    if n > cap:
        raise CapExceededError(f"brute-force cap is {cap} targets, instance has {n}")
    if n == 0:
        return WalkSolution((), manhattan(inst.start, inst.end))
    dt, ds, de = _distance_data(inst)
    perms = _permutation_table(n)
    total = ds[perms[:, 0]] + de[perms[:, -1]]
    for i in range(n - 1):
        total = total + dt[perms[:, i], perms[:, i + 1]]
    i = int(np.argmin(total))
    return WalkSolution(tuple(int(x) for x in perms[i]), int(total[i]))


def exact_walk_line(inst: WalkInstance) -> WalkSolution:
    """Closed-form optimum on the line: sweep to one extreme, then the other, then stop."""
    if inst.dim != 1:
        raise InvalidInstanceError(f"line solver needs dimension 1, got {inst.dim}")
    s, e = inst.start[0], inst.end[0]
    xs = [t[0] for t in inst.targets]
    lo = min(xs + [s, e])
    hi = max(xs + [s, e])
    left_first = (s - lo) + (hi - e)
    right_first = (hi - s) + (e - lo)
    length = (hi - lo) + min(left_first, right_first)
    idx = range(len(xs))
    if left_first <= right_first:
        order = sorted((i for i in idx if xs[i] <= s), key=lambda i: -xs[i])
        order += sorted((i for i in idx if xs[i] > s), key=lambda i: xs[i])
    else:
        order = sorted((i for i in idx if xs[i] >= s), key=lambda i: xs[i])
        order += sorted((i for i in idx if xs[i] < s), key=lambda i: -xs[i])
    sol = WalkSolution(tuple(order), length)
    assert walk_length(inst, sol.order) == length
    return sol


def _nearest_neighbor_order(inst: WalkInstance) -> list[int]:
    left = list(range(len(inst.targets)))
    order = []
    here = inst.start
    while left:
        nxt = min(left, key=lambda i: (manhattan(here, inst.targets[i]), i))
        left.remove(nxt)
        order.append(nxt)
        here = inst.targets[nxt]
    return order


def two_opt(inst: WalkInstance, order: list[int]) -> list[int]:
    """Segment reversal with both endpoints pinned, until no move improves."""
    seq = [inst.start] + [inst.targets[i] for i in order] + [inst.end]
    idx = [-1] + list(order) + [-1]
    n = len(order)
    improved = True
    while improved:
        improved = False
        for i in range(1, n):
            for j in range(i + 1, n + 1):
                a, b, c, d = seq[i - 1], seq[i], seq[j], seq[j + 1]
                if manhattan(a, c) + manhattan(b, d) < manhattan(a, b) + manhattan(c, d):
                    seq[i:j + 1] = seq[i:j + 1][::-1]
                    idx[i:j + 1] = idx[i:j + 1][::-1]
                    improved = True
    return idx[1:-1]


def _mst_shortcut_order(inst: WalkInstance) -> list[int]:
    # node 0 = start, 1..n = targets, n+1 = end
    pts = [inst.start, *inst.targets, inst.end]
    m = len(pts)
    parent = [-1] * m
    in_tree = [False] * m
    dist = [float("inf")] * m
    dist[0] = 0
    for _ in range(m):
        u = min((i for i in range(m) if not in_tree[i]), key=lambda i: (dist[i], i))
        in_tree[u] = True
        for v in range(m):
            if not in_tree[v]:
                d = manhattan(pts[u], pts[v])
                if d < dist[v]:
                    dist[v], parent[v] = d, u
    children: dict[int, list[int]] = {i: [] for i in range(m)}
    for v in range(1, m):
        children[parent[v]].append(v)

    end_path = set()
    v = m - 1
    while v != -1:
        end_path.add(v)
        v = parent[v]

    preorder = []
    stack = [0]
    while stack:
        u = stack.pop()
        preorder.append(u)
        # the child leading to ``end`` is visited last, so the walk finishes near it
        kids = sorted(children[u], key=lambda c: (c in end_path, c))
        stack.extend(reversed(kids))
    return [u - 1 for u in preorder if 0 < u < m - 1]


def approx_walk(inst: WalkInstance, variant: str = "nearest-neighbor+2opt") -> WalkSolution:
    if variant == "nearest-neighbor+2opt":
        order = two_opt(inst, _nearest_neighbor_order(inst))
    elif variant == "mst-shortcut":
        order = _mst_shortcut_order(inst)
    else:
        raise ValueError(f"unknown approximation variant {variant!r}; choose from {APPROX_VARIANTS}")
    return WalkSolution(tuple(order), walk_length(inst, order))


def solve_walk(inst: WalkInstance, solver: str = "exact", cap: int | None = None) -> WalkSolution:
    """Dispatch on a solver name: ``exact``, ``line-exact``, ``heuristic`` or ``mst``.

    ``exact`` falls back to the heuristic, with a warning, above the cap.
    """
    if solver == "exact":
        cap = default_caps().walk_targets if cap is None else cap
        if len(inst.targets) > cap:
            log.warning("walk with %d targets exceeds exact cap %d; using 2-opt heuristic",
                        len(inst.targets), cap)
            return approx_walk(inst)
        return exact_walk_held_karp(inst, cap)
    if solver == "line-exact":
        return exact_walk_line(inst)
    if solver == "heuristic":
        return approx_walk(inst, "nearest-neighbor+2opt")
    if solver == "mst":
        return approx_walk(inst, "mst-shortcut")
    raise ValueError(f"unknown walk solver {solver!r}")


def instance_from_json(data: dict) -> WalkInstance:
    try:
        return WalkInstance(tuple(data["start"]), tuple(tuple(t) for t in data["targets"]),
                            tuple(data["end"]))
    except (KeyError, TypeError) as exc:
        raise InvalidInstanceError(f"bad walk instance: {exc}") from None


def instance_to_json(inst: WalkInstance) -> dict:
    return {"start": list(inst.start), "targets": [list(t) for t in inst.targets],
            "end": list(inst.end)}


def solution_to_json(sol: WalkSolution) -> dict:
    return {"length": sol.length, "order": list(sol.order)}


def solution_from_json(data: dict) -> WalkSolution:
    return WalkSolution(tuple(data["order"]), int(data["length"]))


def random_instance(rng, n_targets: int, dim: int = 2, span: int = 10) -> WalkInstance:
    """Seeded instance with distinct targets drawn from ``[-span, span]^dim``.

    ``rng`` is a :class:`random.Random`.
    """
    def point():
        return tuple(rng.randint(-span, span) for _ in range(dim))
    targets: list[Point] = []
    seen = set()
    while len(targets) < n_targets:
        p = point()
        if p not in seen:
            seen.add(p)
            targets.append(p)
    return WalkInstance(point(), tuple(targets), point())
