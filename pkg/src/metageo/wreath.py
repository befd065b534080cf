"""Lamplighter-style groups ``A wr Z^r`` with a finitely generated abelian lamp group A.

An element is a finite lamp configuration (lattice point -> element of A) and
a cursor position.  Reading a word left to right: ``b_i^{+-1}`` moves the
cursor one step along axis i, ``a_j^{+-1}`` multiplies the lamp under the
cursor by the j-th generator of A (or its inverse).

The geodesic length of an element is the sum of the lamp lengths plus the
length of the shortest walk that leaves the origin, stops at every lit
position and ends at the cursor.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping

from .caps import default_caps
from .errors import InvalidInstanceError, ParseError
from .lattice_tsp import Point, WalkInstance, WalkSolution, solve_walk
from .oracle import bfs_ball, bidirectional_distance
from .words import LAMP, TRANSLATION, Alphabet, Generator, Letter, Word

AElement = tuple[int, ...]

WALK_SOLVERS = ("exact", "line-exact", "heuristic", "mst")


@dataclass(frozen=True)
class GroupSpec:
    """``A wr Z^base_rank`` with ``A = Z_m1 x ... x Z_mk x Z^lamp_free_rank``.

    Lamp generators ``a1..ak`` are the torsion factors in order, followed by
    the free factors.
    """

    base_rank: int
    lamp_moduli: tuple[int, ...] = ()
    lamp_free_rank: int = 0

    def __post_init__(self):
        object.__setattr__(self, "lamp_moduli", tuple(self.lamp_moduli))
        if self.base_rank < 1:
            raise ValueError("base rank must be >= 1")
        if any(m < 2 for m in self.lamp_moduli):
            raise ValueError("lamp moduli must be >= 2")
        if self.lamp_free_rank < 0:
            raise ValueError("lamp free rank must be >= 0")
        if not self.lamp_moduli and self.lamp_free_rank == 0:
            raise ValueError("lamp group must be nontrivial")

    @property
    def lamp_rank(self) -> int:
        return len(self.lamp_moduli) + self.lamp_free_rank

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet.of(a=self.lamp_rank, b=self.base_rank)

    @property
    def origin(self) -> Point:
        return (0,) * self.base_rank

    def identity_lamp(self) -> AElement:
        return (0,) * self.lamp_rank

    def reduce_lamp(self, values: Iterable[int]) -> AElement:
        values = tuple(values)
        k = len(self.lamp_moduli)
        return tuple(v % m for v, m in zip(values[:k], self.lamp_moduli)) + values[k:]

    def __str__(self):
        factors = [f"Z{m}" for m in self.lamp_moduli] + ["Z"] * self.lamp_free_rank
        return f"{'x'.join(factors)} wr Z^{self.base_rank}"


_SPEC = re.compile(r"^\s*(\S+)\s+wr\s+Z\^(\d+)\s*$")


def parse_group_spec(text: str) -> GroupSpec:
    """Parse ``Z2 wr Z^2``, ``Z3xZ wr Z^1`` and the like."""
    m = _SPEC.match(text)
    if m is None:
        raise ParseError(f"group spec must look like 'Z2 wr Z^2', got {text!r}")
    moduli = []
    free = 0
    for factor in m.group(1).split("x"):
        if factor == "Z":
            free += 1
        elif re.fullmatch(r"Z\d+", factor):
            moduli.append(int(factor[1:]))
        else:
            raise ParseError(f"bad lamp factor {factor!r} in {text!r}")
    try:
        return GroupSpec(int(m.group(2)), tuple(moduli), free)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


@dataclass(frozen=True)
class WreathElement:
    """Normal form: lit positions (sorted, no identity values) and the cursor."""

    support: tuple[tuple[Point, AElement], ...]
    cursor: Point

    @classmethod
    def from_lamps(cls, lamps: Mapping[Point, AElement], cursor: Point) -> WreathElement:
        items = sorted((tuple(p), tuple(v)) for p, v in lamps.items() if any(v))
        return cls(tuple(items), tuple(cursor))

    @property
    def lamps(self) -> dict[Point, AElement]:
        return dict(self.support)

    @property
    def positions(self) -> tuple[Point, ...]:
        return tuple(p for p, _ in self.support)


def identity(spec: GroupSpec) -> WreathElement:
    return WreathElement((), spec.origin)


def _check_word(w: Word, spec: GroupSpec) -> None:
    for pos, letter in enumerate(w.letters):
        g = letter.generator
        if g.kind == LAMP:
            ok = g.index <= spec.lamp_rank
        elif g.kind == TRANSLATION:
            ok = g.index <= spec.base_rank
        else:
            ok = False
        if not ok:
            raise InvalidInstanceError(f"letter {pos} ({letter}) is not a generator of {spec}")


def _lamp_step(spec: GroupSpec, value: AElement, index: int, sign: int) -> AElement:
    v = list(value)
    v[index - 1] += sign
    return spec.reduce_lamp(v)


def evaluate(w: Word, spec: GroupSpec) -> WreathElement:
    """Run the cursor state machine over ``w``."""
    _check_word(w, spec)
    cursor = list(spec.origin)
    lamps: dict[Point, AElement] = {}
    zero = spec.identity_lamp()
    for letter in w.letters:
        g = letter.generator
        if g.kind == TRANSLATION:
            cursor[g.index - 1] += letter.sign
        else:
            here = tuple(cursor)
            lamps[here] = _lamp_step(spec, lamps.get(here, zero), g.index, letter.sign)
    return WreathElement.from_lamps(lamps, tuple(cursor))


def normal_form(w: Word, spec: GroupSpec) -> WreathElement:
    """Collect ``w`` into conjugates of lamp elements times a final translation.

    The word is cut into alternating blocks ``h1 c1 h2 c2 ... hk ck h'`` with
    each ``hi`` a translation and each ``ci`` a product of lamp letters.  Then
    ``w = c1^{u1} ... ck^{uk} b`` with ``ui = (h1 ... hi)^{-1}`` and
    ``b = h1 ... hk h'``; the conjugate ``ci^{ui}`` is the lamp ``ci`` placed at
    ``ui^{-1}``.  Conjugates at the same position commute past everything in
    between and are multiplied together; identity results are dropped.
    """
    _check_word(w, spec)
    r = spec.base_rank
    blocks: list[tuple[str, list[int]]] = []
    for letter in w.letters:
        g = letter.generator
        kind = "h" if g.kind == TRANSLATION else "c"
        if not blocks or blocks[-1][0] != kind:
            size = r if kind == "h" else spec.lamp_rank
            blocks.append((kind, [0] * size))
        blocks[-1][1][g.index - 1] += letter.sign

    conjugates: list[tuple[Point, list[int]]] = []
    prefix = [0] * r
    for kind, vec in blocks:
        if kind == "h":
            prefix = [p + v for p, v in zip(prefix, vec)]
        else:
            u = tuple(-p for p in prefix)
            conjugates.append((u, vec))
    b = tuple(prefix)

    merged: dict[Point, list[int]] = {}
    for u, c in conjugates:
        acc = merged.setdefault(u, [0] * spec.lamp_rank)
        for i, x in enumerate(c):
            acc[i] += x
    lamps = {tuple(-x for x in u): spec.reduce_lamp(c) for u, c in merged.items()}
    return WreathElement.from_lamps(lamps, b)


def multiply(g: WreathElement, h: WreathElement, spec: GroupSpec) -> WreathElement:
    """Group law: ``(f, b)(f', b') = (f . b(f'), b + b')``."""
    lamps = dict(g.lamps)
    zero = spec.identity_lamp()
    for p, v in h.support:
        q = tuple(a + c for a, c in zip(p, g.cursor))
        lamps[q] = spec.reduce_lamp(a + c for a, c in zip(lamps.get(q, zero), v))
    cursor = tuple(a + c for a, c in zip(g.cursor, h.cursor))
    return WreathElement.from_lamps(lamps, cursor)


def inverse(g: WreathElement, spec: GroupSpec) -> WreathElement:
    lamps = {tuple(a - c for a, c in zip(p, g.cursor)): spec.reduce_lamp(-x for x in v)
             for p, v in g.support}
    return WreathElement.from_lamps(lamps, tuple(-c for c in g.cursor))


def lamp_geodesic_length(a: AElement, spec: GroupSpec) -> int:
    k = len(spec.lamp_moduli)
    a = spec.reduce_lamp(a)
    torsion = sum(min(e, m - e) for e, m in zip(a[:k], spec.lamp_moduli))
    return torsion + sum(abs(e) for e in a[k:])


def lamp_word(a: AElement, spec: GroupSpec) -> list[Letter]:
    """A shortest word in the lamp generators for ``a``."""
    k = len(spec.lamp_moduli)
    a = spec.reduce_lamp(a)
    letters = []
    for i, e in enumerate(a):
        gen = Generator(LAMP, i + 1)
        if i < k:
            m = spec.lamp_moduli[i]
            count, sign = (e, 1) if e <= m - e else (m - e, -1)
        else:
            count, sign = abs(e), (1 if e >= 0 else -1)
        letters.extend([Letter(gen, sign)] * count)
    return letters


def walk_instance(g: WreathElement, spec: GroupSpec) -> WalkInstance:
    return WalkInstance(spec.origin, g.positions, g.cursor)


def _walk(g: WreathElement, spec: GroupSpec, solver: str, cap: int | None) -> WalkSolution:
    if solver not in WALK_SOLVERS:
        raise ValueError(f"unknown walk solver {solver!r}; choose from {WALK_SOLVERS}")
    if solver == "line-exact" and spec.base_rank != 1:
        raise InvalidInstanceError(f"line-exact solver needs base rank 1, got {spec.base_rank}")
    return solve_walk(walk_instance(g, spec), solver, cap)


def geodesic_length_wreath(g: WreathElement, spec: GroupSpec, solver: str = "exact",
                           cap: int | None = None) -> int:
    lamp_total = sum(lamp_geodesic_length(v, spec) for _, v in g.support)
    return lamp_total + _walk(g, spec, solver, cap).length


def _moves(src: Point, dst: Point) -> list[Letter]:
    out = []
    for axis, (s, d) in enumerate(zip(src, dst)):
        sign = 1 if d >= s else -1
        out.extend([Letter(Generator(TRANSLATION, axis + 1), sign)] * abs(d - s))
    return out


def geodesic_word_wreath(g: WreathElement, spec: GroupSpec, solver: str = "exact",
                         cap: int | None = None) -> Word:
    """Walk the solver's order, moving axis by axis between stops and lighting each lamp."""
    sol = _walk(g, spec, solver, cap)
    letters: list[Letter] = []
    here = spec.origin
    for i in sol.order:
        pos, value = g.support[i]
        letters += _moves(here, pos)
        letters += lamp_word(value, spec)
        here = pos
    letters += _moves(here, g.cursor)
    return Word(tuple(letters), reduced=True, alphabet=spec.alphabet)


def _neighbors(g: WreathElement, spec: GroupSpec) -> Iterable[WreathElement]:
    for letter in spec.alphabet.letters():
        gen = letter.generator
        if gen.kind == TRANSLATION:
            c = list(g.cursor)
            c[gen.index - 1] += letter.sign
            yield WreathElement(g.support, tuple(c))
        else:
            lamps = g.lamps
            lamps[g.cursor] = _lamp_step(spec, lamps.get(g.cursor, spec.identity_lamp()),
                                         gen.index, letter.sign)
            yield WreathElement.from_lamps(lamps, g.cursor)


def wreath_ball(spec: GroupSpec, radius: int, cap: int | None = None) -> dict[WreathElement, int]:
    """Word-metric distance of every element within ``radius`` of the identity."""
    cap = default_caps().bfs_states if cap is None else cap
    return bfs_ball(identity(spec), lambda g: _neighbors(g, spec), radius, cap)


def bfs_geodesic_oracle_wreath(g: WreathElement, spec: GroupSpec, radius: int,
                               cap: int | None = None) -> int | None:
    """Exact word-metric length of ``g`` by breadth-first search.

    Returns ``None`` when the length exceeds ``radius``.
    """
    cap = default_caps().bfs_states if cap is None else cap
    return bidirectional_distance(identity(spec), g, lambda x: _neighbors(x, spec), radius, cap)


def element_to_json(g: WreathElement) -> dict:
    return {"support": [{"position": list(p), "value": list(v)} for p, v in g.support],
            "cursor": list(g.cursor)}


def element_from_json(data: dict, spec: GroupSpec) -> WreathElement:
    lamps = {tuple(item["position"]): spec.reduce_lamp(item["value"]) for item in data["support"]}
    return WreathElement.from_lamps(lamps, tuple(data["cursor"]))


def random_element(spec: GroupSpec, rng, n_lamps: int, span: int = 4) -> WreathElement:
    """Seeded random element with up to ``n_lamps`` lit positions in ``[-span, span]^r``."""
    lamps = {}
    for _ in range(n_lamps):
        p = tuple(rng.randint(-span, span) for _ in range(spec.base_rank))
        v = [rng.randrange(m) for m in spec.lamp_moduli]
        v += [rng.randint(-3, 3) for _ in range(spec.lamp_free_rank)]
        lamps[p] = spec.reduce_lamp(v)
    cursor = tuple(rng.randint(-span, span) for _ in range(spec.base_rank))
    return WreathElement.from_lamps(lamps, cursor)

