"""Free metabelian groups F/F'' encoded as integer flows on the lattice Z^r.

A word over ``x1..xr`` traces a path in the Cayley graph of Z^r starting at
the origin.  Counting each traversal of a unit edge +1 forwards and -1
backwards gives a flow; together with the endpoint of the path this pair
determines the element of F/F''.

The geodesic length of ``w`` is the total absolute flow plus twice the size
of the smallest set of extra edges joining all support components, the
origin and the endpoint into one connected piece.  Every support edge is
then walked |flow| times in its net direction and every extra edge once each
way, which is a balanced connected multigraph and so carries an Euler path.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Mapping

from .caps import default_caps
from .errors import InvalidInstanceError
from .lattice_tsp import Point
from .oracle import bfs_ball, bidirectional_distance
from .steiner import (
    GroupSteinerInstance,
    LatticeEdge,
    TreeResult,
    UnionFind,
    group_steiner_exact,
    group_steiner_via_representatives,
)
from .words import METABELIAN, Alphabet, Generator, Letter, Word

INNER_SOLVERS = ("exact", "mst")


@dataclass(frozen=True)
class Flow:
    """Nonzero edge values (sorted by edge) and the endpoint of the path."""

    values: tuple[tuple[LatticeEdge, int], ...]
    endpoint: Point
    rank: int

    @classmethod
    def from_mapping(cls, values: Mapping[LatticeEdge, int], endpoint: Point, rank: int) -> Flow:
        return cls(tuple(sorted((e, v) for e, v in values.items() if v != 0)), tuple(endpoint), rank)

    @property
    def as_dict(self) -> dict[LatticeEdge, int]:
        return dict(self.values)

    @property
    def origin(self) -> Point:
        return (0,) * self.rank

    def total(self) -> int:
        return sum(abs(v) for _, v in self.values)

    def translated(self, shift: Point) -> Flow:
        moved = {LatticeEdge(tuple(a + b for a, b in zip(e.base, shift)), e.axis): v
                 for e, v in self.values}
        return Flow.from_mapping(moved, tuple(a + b for a, b in zip(self.endpoint, shift)), self.rank)


def identity_flow(rank: int) -> Flow:
    return Flow((), (0,) * rank, rank)


def _step(values: dict, here: list[int], axis: int, sign: int) -> None:
    if sign == 1:
        e = LatticeEdge(tuple(here), axis + 1)
        here[axis] += 1
    else:
        here[axis] -= 1
        e = LatticeEdge(tuple(here), axis + 1)
    v = values.get(e, 0) + sign
    if v:
        values[e] = v
    else:
        values.pop(e, None)


def compute_flow(w: Word, rank: int) -> Flow:
    values: dict[LatticeEdge, int] = {}
    here = [0] * rank
    for pos, letter in enumerate(w.letters):
        g = letter.generator
        if g.kind != METABELIAN or g.index > rank:
            raise InvalidInstanceError(f"letter {pos} ({letter}) is not a generator of rank {rank}")
        _step(values, here, g.index - 1, letter.sign)
    return Flow.from_mapping(values, tuple(here), rank)


def combine(f: Flow, g: Flow) -> Flow:
    """Flow of the concatenated path: ``g`` is shifted to start at ``f``'s endpoint."""
    values = f.as_dict
    for e, v in g.translated(f.endpoint).values:
        values[e] = values.get(e, 0) + v
    endpoint = tuple(a + b for a, b in zip(f.endpoint, g.endpoint))
    return Flow.from_mapping(values, endpoint, f.rank)


def net_flow(f: Flow) -> dict[Point, int]:
    """Outflow minus inflow at every vertex touched by the support."""
    net: dict[Point, int] = defaultdict(int)
    for e, v in f.values:
        net[e.base] += v
        net[e.head] -= v
    return net


def check_kirchhoff(f: Flow) -> bool:
    """Conservation everywhere except a unit source at the origin and sink at the endpoint."""
    net = net_flow(f)
    expected: dict[Point, int] = defaultdict(int)
    if f.endpoint != f.origin:
        expected[f.origin] += 1
        expected[f.endpoint] -= 1
    points = set(net) | set(expected)
    return all(net.get(p, 0) == expected.get(p, 0) for p in points)


def metabelian_equal(u: Word, v: Word, rank: int) -> bool:
    return compute_flow(u, rank) == compute_flow(v, rank)


@dataclass(frozen=True)
class SupportGraph:
    components: tuple[tuple[Point, ...], ...]
    edge_counts: tuple[int, ...]


def support_components(f: Flow) -> SupportGraph:
    uf = UnionFind()
    for e, _ in f.values:
        uf.union(e.base, e.head)
    for p in (f.origin, f.endpoint):
        uf.find(p)
    comps = sorted(tuple(sorted(members)) for members in uf.groups().values())
    where = {p: i for i, c in enumerate(comps) for p in c}
    counts = [0] * len(comps)
    for e, _ in f.values:
        counts[where[e.base]] += 1
    return SupportGraph(tuple(comps), tuple(counts))


def _groups(f: Flow) -> GroupSteinerInstance:
    return GroupSteinerInstance(support_components(f).components)


def connecting_tree_exact(f: Flow, box_margin: int = 1) -> TreeResult:
    return group_steiner_exact(_groups(f), box_margin)


def geodesic_length_exact(w: Word, rank: int, box_margin: int = 1) -> int:
    f = compute_flow(w, rank)
    return f.total() + 2 * connecting_tree_exact(f, box_margin).total_length


@dataclass(frozen=True)
class ApproxLength:
    estimate: int
    exact_flow_term: int
    tree_length: int


def geodesic_length_2approx(w: Word, rank: int, inner: str = "exact") -> ApproxLength:
    """Flow total plus twice a Steiner tree through one chosen vertex per component."""
    if inner not in INNER_SOLVERS:
        raise ValueError(f"unknown inner solver {inner!r}; choose from {INNER_SOLVERS}")
    f = compute_flow(w, rank)
    tree = group_steiner_via_representatives(_groups(f), inner)
    return ApproxLength(f.total() + 2 * tree.total_length, f.total(), tree.total_length)


def _euler_word(f: Flow, tree: TreeResult) -> Word:
    out: dict[Point, list[tuple[Point, Letter]]] = defaultdict(list)

    def arc(e: LatticeEdge, sign: int):
        gen = Generator(METABELIAN, e.axis)
        if sign > 0:
            out[e.base].append((e.head, Letter(gen, 1)))
        else:
            out[e.head].append((e.base, Letter(gen, -1)))

    for e, v in f.values:
        for _ in range(abs(v)):
            arc(e, 1 if v > 0 else -1)
    for e in tree.edges:
        arc(e, 1)
        arc(e, -1)
    for arcs in out.values():
        # popped from the end, so reverse order gives smallest-first traversal
        arcs.sort(key=lambda a: (a[0], a[1]), reverse=True)

    # Hierholzer, starting at the origin; the flow makes the origin the unique
    # vertex with surplus outflow, or the graph is balanced
    stack: list[tuple[Point, Letter | None]] = [(f.origin, None)]
    letters: list[Letter] = []
    while stack:
        v, via = stack[-1]
        if out.get(v):
            nxt, letter = out[v].pop()
            stack.append((nxt, letter))
        else:
            stack.pop()
            if via is not None:
                letters.append(via)
    letters.reverse()
    if any(out.values()):  # pragma: no cover - connectivity is checked by the tree solver
        raise AssertionError("support plus tree is not connected")
    return Word(tuple(letters), reduced=False, alphabet=Alphabet.metabelian(f.rank))


def geodesic_word_metabelian(w: Word, rank: int, inner: str = "exact") -> Word:
    """An explicit word for the element of ``w`` realising a connecting-tree bound.

    ``inner`` is ``exact`` or ``mst`` (the tree through one representative per
    component, whose length is :func:`geodesic_length_2approx`), or ``group``
    (the minimum connecting tree, giving a geodesic).
    """
    f = compute_flow(w, rank)
    if inner == "group":
        tree = connecting_tree_exact(f)
    elif inner in INNER_SOLVERS:
        tree = group_steiner_via_representatives(_groups(f), inner)
    else:
        raise ValueError(f"unknown inner solver {inner!r}")
    return _euler_word(f, tree)


def _neighbors(f: Flow) -> list[Flow]:
    out = []
    for axis in range(f.rank):
        for sign in (1, -1):
            values = f.as_dict
            here = list(f.endpoint)
            _step(values, here, axis, sign)
            out.append(Flow.from_mapping(values, tuple(here), f.rank))
    return out


def metabelian_ball(rank: int, radius: int, cap: int | None = None) -> dict[Flow, int]:
    """Word-metric distance of every element within ``radius`` of the identity."""
    cap = default_caps().bfs_states if cap is None else cap
    return bfs_ball(identity_flow(rank), _neighbors, radius, cap)


def bfs_geodesic_oracle_metabelian(w: Word, rank: int, radius: int,
                                   cap: int | None = None) -> int | None:
    """Exact length of ``w`` in F/F'' by breadth-first search; ``None`` beyond ``radius``."""
    cap = default_caps().bfs_states if cap is None else cap
    return bidirectional_distance(identity_flow(rank), compute_flow(w, rank), _neighbors,
                                  radius, cap)


def flow_to_json(f: Flow) -> dict:
    return {"rank": f.rank, "endpoint": list(f.endpoint),
            "edges": [{"base": list(e.base), "axis": e.axis, "value": v} for e, v in f.values]}


def flow_from_json(data: dict) -> Flow:
    values = {LatticeEdge(tuple(e["base"]), int(e["axis"])): int(e["value"]) for e in data["edges"]}
    return Flow.from_mapping(values, tuple(data["endpoint"]), int(data["rank"]))
