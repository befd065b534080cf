"""Words over finite generator alphabets: parsing, formatting, free reduction.

Tokens are ``NAMEINDEX`` with an optional ``^-1`` (``x1``, ``b2^-1``).  Powers
are written out as repeated letters, so the length of a word is simply its
number of tokens.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .errors import AlphabetMismatchError, ParseError

LAMP = "lamp"
TRANSLATION = "translation"
METABELIAN = "metabelian"

KIND_BY_NAME = {"a": LAMP, "b": TRANSLATION, "x": METABELIAN}
NAME_BY_KIND = {kind: name for name, kind in KIND_BY_NAME.items()}

_TOKEN = re.compile(r"^([A-Za-z]+)(\d+)(?:\^(-?\d+))?$")


@dataclass(frozen=True, order=True)
class Generator:
    kind: str
    index: int

    def __post_init__(self):
        if self.kind not in NAME_BY_KIND:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if self.index < 1:
            raise ValueError(f"generator index must be >= 1, got {self.index}")

    @property
    def name(self) -> str:
        return f"{NAME_BY_KIND[self.kind]}{self.index}"


@dataclass(frozen=True, order=True)
class Letter:
    generator: Generator
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError(f"letter sign must be +1 or -1, got {self.sign}")

    def inverse(self) -> Letter:
        return Letter(self.generator, -self.sign)

    def __str__(self):
        return self.generator.name if self.sign == 1 else f"{self.generator.name}^-1"


@dataclass(frozen=True)
class Alphabet:
    """Generator names with their ranks, e.g. ``(("a", 1), ("b", 2))``."""

    ranks: tuple[tuple[str, int], ...]

    @classmethod
    def metabelian(cls, rank: int) -> Alphabet:
        return cls((("x", rank),))

    @classmethod
    def of(cls, **ranks: int) -> Alphabet:
        return cls(tuple(sorted(ranks.items())))

    def rank(self, name: str) -> int | None:
        for n, r in self.ranks:
            if n == name:
                return r
        return None

    def generators(self) -> list[Generator]:
        return [Generator(KIND_BY_NAME[n], i) for n, r in self.ranks for i in range(1, r + 1)]

    def letters(self) -> list[Letter]:
        """All letters in a fixed order: ``g1, g1^-1, g2, g2^-1, ...``."""
        return [Letter(g, s) for g in self.generators() for s in (1, -1)]

    def __contains__(self, gen: Generator) -> bool:
        r = self.rank(NAME_BY_KIND[gen.kind])
        return r is not None and 1 <= gen.index <= r


@dataclass(frozen=True)
class Word:
    """A finite sequence of letters.

    Equality compares letter sequences only; ``reduced`` records whether the
    sequence is known to be freely reduced.
    """

    letters: tuple[Letter, ...] = ()
    reduced: bool = field(default=False, compare=False)
    alphabet: Alphabet | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.letters, tuple):
            object.__setattr__(self, "letters", tuple(self.letters))

    def __len__(self):
        return len(self.letters)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def __str__(self):
        return format_word(self)


def parse_word(text: str, alphabet: Alphabet) -> Word:
    letters = []
    for pos, token in enumerate(text.split()):
        m = _TOKEN.match(token)
        if m is None:
            raise ParseError(f"malformed token {token!r}", pos)
        name, digits, exponent = m.groups()
        if name not in KIND_BY_NAME or alphabet.rank(name) is None:
            raise ParseError(f"unknown generator name {name!r} in {token!r}", pos)
        index = int(digits)
        if index == 0:
            raise ParseError(f"index 0 is invalid in {token!r}", pos)
        rank = alphabet.rank(name)
        if index > rank:
            raise ParseError(f"index {index} exceeds rank {rank} of {name!r}", pos)
        if exponent is None or exponent == "1":
            sign = 1
        elif exponent == "-1":
            sign = -1
        else:
            raise ParseError(f"exponent must be 1 or -1, got {exponent!r}", pos)
        letters.append(Letter(Generator(KIND_BY_NAME[name], index), sign))
    return Word(tuple(letters), reduced=False, alphabet=alphabet)


def format_word(w: Word) -> str:
    return " ".join(str(letter) for letter in w.letters)


def free_reduce(w: Word) -> Word:
    stack: list[Letter] = []
    for letter in w.letters:
        if stack and stack[-1].generator == letter.generator and stack[-1].sign == -letter.sign:
            stack.pop()
        else:
            stack.append(letter)
    return Word(tuple(stack), reduced=True, alphabet=w.alphabet)


def invert(w: Word) -> Word:
    return Word(tuple(letter.inverse() for letter in reversed(w.letters)), reduced=w.reduced,
                alphabet=w.alphabet)


def concat(u: Word, v: Word) -> Word:
    if u.alphabet is not None and v.alphabet is not None and u.alphabet != v.alphabet:
        raise AlphabetMismatchError(f"cannot concatenate words over {u.alphabet} and {v.alphabet}")
    alphabet = u.alphabet if u.alphabet is not None else v.alphabet
    return free_reduce(Word(u.letters + v.letters, alphabet=alphabet))


def is_reduced(w: Word) -> bool:
    return all(not (a.generator == b.generator and a.sign == -b.sign)
               for a, b in zip(w.letters, w.letters[1:]))


def read_words(lines: Iterable[str], alphabet: Alphabet) -> Iterator[Word]:
    """Parse a word stream: ``#`` lines are skipped, a blank line is the identity."""
    for line in lines:
        line = line.rstrip("\n")
        if line.lstrip().startswith("#"):
            continue
        yield parse_word(line, alphabet)


def read_word_file(path: str | Path, alphabet: Alphabet) -> list[Word]:
    with open(path, encoding="utf-8") as fh:
        return list(read_words(fh, alphabet))


def enumerate_reduced_words(alphabet: Alphabet, max_length: int) -> Iterator[Word]:
    """Every freely reduced word of length <= max_length, shortest first."""
    letters = alphabet.letters()
    frontier: list[tuple[Letter, ...]] = [()]
    for length in range(max_length + 1):
        for letters_seq in frontier:
            yield Word(letters_seq, reduced=True, alphabet=alphabet)
        if length == max_length:
            break
        frontier = [seq + (x,) for seq in frontier for x in letters
                    if not seq or seq[-1] != x.inverse()]


def random_reduced_word(alphabet: Alphabet, length: int, rng) -> Word:
    """A uniformly random freely reduced word of exactly ``length`` letters.

    ``rng`` is a :class:`random.Random`.
    """
    letters = alphabet.letters()
    out: list[Letter] = []
    while len(out) < length:
        x = rng.choice(letters)
        if out and out[-1] == x.inverse():
            continue
        out.append(x)
    return Word(tuple(out), reduced=True, alphabet=alphabet)


def random_word(alphabet: Alphabet, length: int, rng) -> Word:
    letters = alphabet.letters()
    return Word(tuple(rng.choice(letters) for _ in range(length)), alphabet=alphabet)
