"""Rectilinear Steiner trees and group Steiner trees on the lattice graph Z^r.

Trees are returned as sets of positively oriented unit lattice edges.  The
exact solvers run Dreyfus-Wagner: on the Hanan grid of the terminals for
plain Steiner trees, and on the bounding-box lattice with every group
contracted to a single node for group Steiner trees.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .caps import default_caps
from .errors import CapExceededError, InvalidInstanceError
from .lattice_tsp import Point, manhattan


@dataclass(frozen=True, order=True)
class LatticeEdge:
    """Unit edge from ``base`` to ``base + e_axis`` (``axis`` is 1-based)."""

    base: Point
    axis: int

    @property
    def head(self) -> Point:
        return tuple(c + (1 if i == self.axis - 1 else 0) for i, c in enumerate(self.base))

    @property
    def endpoints(self) -> tuple[Point, Point]:
        return self.base, self.head


def edge_between(p: Point, q: Point) -> LatticeEdge:
    diff = [b - a for a, b in zip(p, q)]
    nonzero = [i for i, d in enumerate(diff) if d != 0]
    if len(nonzero) != 1 or abs(diff[nonzero[0]]) != 1:
        raise ValueError(f"{p} and {q} are not lattice neighbours")
    axis = nonzero[0]
    return LatticeEdge(p if diff[axis] == 1 else q, axis + 1)


def segment_edges(p: Point, q: Point) -> list[LatticeEdge]:
    """Unit edges of an axis-parallel segment."""
    diff = [i for i, (a, b) in enumerate(zip(p, q)) if a != b]
    if not diff:
        return []
    if len(diff) != 1:
        raise ValueError(f"{p}-{q} is not axis-parallel")
    axis = diff[0]
    lo, hi = sorted((p[axis], q[axis]))
    return [LatticeEdge(p[:axis] + (c,) + p[axis + 1:], axis + 1) for c in range(lo, hi)]


def staircase_edges(p: Point, q: Point) -> list[LatticeEdge]:
    """Unit edges of the monotone path from p to q that finishes axis 1 first, then axis 2, ..."""
    edges = []
    here = tuple(p)
    for axis in range(len(p)):
        nxt = here[:axis] + (q[axis],) + here[axis + 1:]
        edges += segment_edges(here, nxt)
        here = nxt
    return edges


@dataclass(frozen=True)
class TreeResult:
    edges: tuple[LatticeEdge, ...]
    total_length: int

    @classmethod
    def from_edges(cls, edges: Iterable[LatticeEdge]) -> TreeResult:
        unique = tuple(sorted(set(edges)))
        return cls(unique, len(unique))


EMPTY_TREE = TreeResult((), 0)


@dataclass(frozen=True)
class SteinerInstance:
    terminals: tuple[Point, ...]

    def __post_init__(self):
        object.__setattr__(self, "terminals", tuple(sorted({tuple(t) for t in self.terminals})))
        if not self.terminals:
            raise InvalidInstanceError("a Steiner instance needs at least one terminal")
        if len({len(t) for t in self.terminals}) != 1:
            raise InvalidInstanceError("terminals must share one dimension")

    @property
    def dim(self) -> int:
        return len(self.terminals[0])


@dataclass(frozen=True)
class GroupSteinerInstance:
    groups: tuple[tuple[Point, ...], ...]

    def __post_init__(self):
        groups = tuple(tuple(sorted({tuple(p) for p in g})) for g in self.groups)
        object.__setattr__(self, "groups", groups)
        if any(not g for g in groups):
            raise InvalidInstanceError("every group must be nonempty")
        if len({len(p) for g in groups for p in g}) > 1:
            raise InvalidInstanceError("all group vertices must share one dimension")
        seen: set[Point] = set()
        for g in groups:
            if seen.intersection(g):
                raise InvalidInstanceError("groups must be pairwise disjoint")
            seen.update(g)
            if not is_connected_vertex_set(g):
                raise InvalidInstanceError(f"group {g} is not connected in the lattice")

    @property
    def dim(self) -> int:
        return len(self.groups[0][0]) if self.groups else 0


class UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y) -> bool:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        if ry < rx:
            rx, ry = ry, rx
        self.parent[ry] = rx
        return True

    def groups(self) -> dict:
        out: dict = {}
        for x in list(self.parent):
            out.setdefault(self.find(x), []).append(x)
        return out


def lattice_neighbors(p: Point) -> list[Point]:
    out = []
    for i in range(len(p)):
        for d in (-1, 1):
            out.append(p[:i] + (p[i] + d,) + p[i + 1:])
    return out


def is_connected_vertex_set(vertices: Sequence[Point]) -> bool:
    vs = set(vertices)
    if not vs:
        return True
    start = next(iter(vs))
    seen = {start}
    stack = [start]
    while stack:
        p = stack.pop()
        for q in lattice_neighbors(p):
            if q in vs and q not in seen:
                seen.add(q)
                stack.append(q)
    return len(seen) == len(vs)


def induced_edge_count(vertices: Sequence[Point]) -> int:
    vs = set(vertices)
    return sum(1 for p in vs for i in range(len(p))
               if p[:i] + (p[i] + 1,) + p[i + 1:] in vs)


def connects(edges: Iterable[LatticeEdge], groups: Iterable[Iterable[Point]]) -> bool:
    """True iff the edges together with the (internally connected) groups form one component."""
    uf = UnionFind()
    required = []
    for g in groups:
        g = list(g)
        required.extend(g)
        for p in g:
            uf.union(g[0], p)
    for e in edges:
        uf.union(e.base, e.head)
    return len({uf.find(p) for p in required}) <= 1


def _check(result: TreeResult, groups) -> TreeResult:
    if not connects(result.edges, groups):
        raise AssertionError("solver returned a tree that does not connect its terminals")
    return result


def dreyfus_wagner(n: int, adj: Sequence[Sequence[tuple[int, int]]],
                   terminals: Sequence[int]) -> tuple[int, list[tuple[int, int]]]:
    """Minimum Steiner tree in a graph with positive integer weights.

    ``adj[u]`` lists ``(v, weight)`` pairs.  Returns the tree weight and its
    graph edges.  ``best[S, v]`` is the cheapest tree spanning the terminal
    subset ``S`` plus vertex ``v``; each subset is first assembled from two
    complementary halves meeting at ``v`` and then relaxed along shortest
    paths with Dijkstra.
    """
    k = len(terminals)
    if k <= 1:
        return 0, []
    full = (1 << k) - 1
    inf = np.int64(1) << 50
    best = np.full((1 << k, n), inf, dtype=np.int64)
    split = np.zeros((1 << k, n), dtype=np.int64)
    pred = np.full((1 << k, n), -1, dtype=np.int64)

    for s in range(1, full + 1):
        low = s & -s
        if s == low:
            best[s, terminals[low.bit_length() - 1]] = 0
        else:
            row = np.full(n, inf, dtype=np.int64)
            how = np.zeros(n, dtype=np.int64)
            sub = (s - 1) & s
            while sub:
                if sub & low:
                    cand = best[sub] + best[s ^ sub]
                    better = cand < row
                    row = np.where(better, cand, row)
                    how = np.where(better, sub, how)
                sub = (sub - 1) & s
            best[s] = row
            split[s] = how

        dist = best[s].tolist()
        back = [-1] * n
        heap = [(d, v) for v, d in enumerate(dist) if d < inf]
        heapq.heapify(heap)
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            for v, w in adj[u]:
                nd = d + w
                if nd < dist[v]:
                    dist[v] = nd
                    back[v] = u
                    heapq.heappush(heap, (nd, v))
        best[s] = dist
        pred[s] = back

    root = terminals[0]
    total = int(best[full, root])
    edges: list[tuple[int, int]] = []
    stack = [(full, root)]
    while stack:
        s, v = stack.pop()
        u = int(pred[s, v])
        if u >= 0:
            edges.append((u, v))
            stack.append((s, u))
        elif s & (s - 1):
            sub = int(split[s, v])
            stack.append((sub, v))
            stack.append((s ^ sub, v))
    return total, edges


def hanan_grid(terminals: Sequence[Point]) -> list[Point]:
    dim = len(terminals[0])
    coords = [sorted({t[i] for t in terminals}) for i in range(dim)]
    return list(itertools.product(*coords))


def rsmt_exact(inst: SteinerInstance, cap: int | None = None) -> TreeResult:
    """Minimum rectilinear Steiner tree, searched over the Hanan grid."""
    cap = default_caps().steiner_terminals if cap is None else cap
    terms = inst.terminals
    if len(terms) > cap:
        raise CapExceededError(f"exact Steiner cap is {cap} terminals, instance has {len(terms)}")
    if len(terms) == 1:
        return EMPTY_TREE
    dim = inst.dim
    coords = [sorted({t[i] for t in terms}) for i in range(dim)]
    nodes = list(itertools.product(*coords))
    index = {p: i for i, p in enumerate(nodes)}
    adj: list[list[tuple[int, int]]] = [[] for _ in nodes]
    for p, i in index.items():
        for axis in range(dim):
            pos = coords[axis].index(p[axis])
            if pos + 1 < len(coords[axis]):
                q = p[:axis] + (coords[axis][pos + 1],) + p[axis + 1:]
                j = index[q]
                w = q[axis] - p[axis]
                adj[i].append((j, w))
                adj[j].append((i, w))
    total, graph_edges = dreyfus_wagner(len(nodes), adj, [index[t] for t in terms])
    edges = [e for u, v in graph_edges for e in segment_edges(nodes[u], nodes[v])]
    result = TreeResult.from_edges(edges)
    assert result.total_length == total
    return _check(result, [[t] for t in terms])


def _prim(points: Sequence[Point]) -> list[tuple[int, int, int]]:
    """MST edges ``(child, parent, weight)`` in the order Prim adds them; ties keep the lower index."""
    m = len(points)
    in_tree = [False] * m
    dist = [float("inf")] * m
    parent = [-1] * m
    dist[0] = 0
    out = []
    for _ in range(m):
        u = min((i for i in range(m) if not in_tree[i]), key=lambda i: (dist[i], i))
        in_tree[u] = True
        if parent[u] >= 0:
            out.append((u, parent[u], int(dist[u])))
        for v in range(m):
            if not in_tree[v]:
                d = manhattan(points[u], points[v])
                if d < dist[v]:
                    dist[v], parent[v] = d, u
    return out


def mst_weight(inst: SteinerInstance) -> int:
    return sum(w for _, _, w in _prim(inst.terminals))


def mst_terminals_approx(inst: SteinerInstance) -> TreeResult:
    """Manhattan MST on the terminals, each edge laid out as a staircase from child to parent.

    Overlapping staircases are merged, so ``total_length`` can fall below
    :func:`mst_weight`; it never exceeds it.
    """
    terms = inst.terminals
    edges = [e for child, parent, _ in _prim(terms)
             for e in staircase_edges(terms[child], terms[parent])]
    return _check(TreeResult.from_edges(edges), [[t] for t in terms])


def _box(points: Sequence[Point], margin: int) -> list[Point]:
    dim = len(points[0])
    lo = [min(p[i] for p in points) - margin for i in range(dim)]
    hi = [max(p[i] for p in points) + margin for i in range(dim)]
    return list(itertools.product(*(range(a, b + 1) for a, b in zip(lo, hi))))


def box_size(inst: GroupSteinerInstance, margin: int = 1) -> int:
    points = [p for g in inst.groups for p in g]
    dim = len(points[0])
    size = 1
    for i in range(dim):
        size *= max(p[i] for p in points) - min(p[i] for p in points) + 1 + 2 * margin
    return size


def group_steiner_exact(inst: GroupSteinerInstance, box_margin: int = 1,
                        max_vertices: int | None = None,
                        max_groups: int | None = None) -> TreeResult:
    """Fewest lattice edges that, added to the groups, connect them all.

    Works on the bounding box of the groups grown by ``box_margin``.  Each
    group collapses to one node, which makes this a plain Steiner problem on
    the contracted graph.
    """
    caps = default_caps()
    max_vertices = caps.group_vertices if max_vertices is None else max_vertices
    max_groups = caps.group_terminals if max_groups is None else max_groups
    k = len(inst.groups)
    if k <= 1:
        return EMPTY_TREE
    if k > max_groups:
        raise CapExceededError(f"group Steiner cap is {max_groups} groups, instance has {k}")
    size = box_size(inst, box_margin)
    if size > max_vertices:
        raise CapExceededError(f"group Steiner box has {size} vertices, cap is {max_vertices}")

    label: dict[Point, int] = {}
    for i, g in enumerate(inst.groups):
        for p in g:
            label[p] = i
    points = _box([p for g in inst.groups for p in g], box_margin)
    in_box = set(points)
    n = k
    for p in points:
        if p not in label:
            label[p] = n
            n += 1

    witness: dict[tuple[int, int], LatticeEdge] = {}
    for p in points:
        for axis in range(len(p)):
            q = p[:axis] + (p[axis] + 1,) + p[axis + 1:]
            if q not in in_box:
                continue
            a, b = label[p], label[q]
            if a == b:
                continue
            key = (min(a, b), max(a, b))
            if key not in witness:
                witness[key] = LatticeEdge(p, axis + 1)
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for a, b in sorted(witness):
        adj[a].append((b, 1))
        adj[b].append((a, 1))

    total, graph_edges = dreyfus_wagner(n, adj, list(range(k)))
    result = TreeResult.from_edges(witness[(min(u, v), max(u, v))] for u, v in graph_edges)
    assert result.total_length == total
    return _check(result, inst.groups)


def representative_reduction(inst: GroupSteinerInstance) -> SteinerInstance:
    return SteinerInstance(tuple(min(g) for g in inst.groups))


def group_steiner_via_representatives(inst: GroupSteinerInstance, inner: str = "exact",
                                      cap: int | None = None) -> TreeResult:
    """Steiner tree on one representative per group (``inner`` is ``exact`` or ``mst``)."""
    if len(inst.groups) <= 1:
        return EMPTY_TREE
    reps = representative_reduction(inst)
    if inner == "exact":
        result = rsmt_exact(reps, cap)
    elif inner == "mst":
        result = mst_terminals_approx(reps)
    else:
        raise ValueError(f"unknown inner Steiner solver {inner!r}")
    return _check(result, inst.groups)


def tree_to_json(t: TreeResult) -> dict:
    return {"length": t.total_length,
            "edges": [{"base": list(e.base), "axis": e.axis} for e in t.edges]}


def tree_from_json(data: dict) -> TreeResult:
    edges = [LatticeEdge(tuple(e["base"]), int(e["axis"])) for e in data["edges"]]
    result = TreeResult.from_edges(edges)
    if result.total_length != data["length"]:
        raise InvalidInstanceError("tree length does not match its edge count")
    return result


def instance_from_json(data: dict) -> SteinerInstance | GroupSteinerInstance:
    try:
        if "terminals" in data:
            return SteinerInstance(tuple(tuple(t) for t in data["terminals"]))
        if "groups" in data:
            return GroupSteinerInstance(tuple(tuple(tuple(p) for p in g) for g in data["groups"]))
    except TypeError as exc:
        raise InvalidInstanceError(f"bad Steiner instance: {exc}") from None
    raise InvalidInstanceError("Steiner instance needs a 'terminals' or 'groups' key")


def instance_to_json(inst: SteinerInstance | GroupSteinerInstance) -> dict:
    if isinstance(inst, SteinerInstance):
        return {"terminals": [list(t) for t in inst.terminals]}
    return {"groups": [[list(p) for p in g] for g in inst.groups]}


def random_terminals(rng, n: int, dim: int = 2, span: int = 6) -> SteinerInstance:
    pts: set[Point] = set()
    while len(pts) < n:
        pts.add(tuple(rng.randint(0, span) for _ in range(dim)))
    return SteinerInstance(tuple(pts))


def random_groups(rng, n_groups: int, dim: int = 2, span: int = 8,
                  max_group_size: int = 4) -> GroupSteinerInstance:
    """Seeded disjoint groups, each grown as a random lattice animal."""
    taken: set[Point] = set()
    groups = []
    while len(groups) < n_groups:
        seed = tuple(rng.randint(0, span) for _ in range(dim))
        if seed in taken:
            continue
        group = [seed]
        target = rng.randint(1, max_group_size)
        for _ in range(4 * target):
            if len(group) >= target:
                break
            q = rng.choice(lattice_neighbors(rng.choice(group)))
            if q not in taken and q not in group:
                group.append(q)
        blocked = {q for p in taken for q in lattice_neighbors(p)} | taken
        if blocked.intersection(group):
            continue
        taken.update(group)
        groups.append(tuple(group))
    return GroupSteinerInstance(tuple(groups))
