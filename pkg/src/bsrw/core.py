"""Presentations, push-right normal forms and exact arithmetic in BS(p, q).

An element is stored as

    b^{r0} a^{e1} b^{r1} a^{e2} ... a^{en} b^{rn}

where every interior exponent is a Euclidean remainder: the b-power in front
of an ``a`` lies in [0, |q|) and the b-power in front of an ``A`` lies in
[0, p).  Only the trailing exponent ``rn`` is unbounded.  Dropping it gives
the coset ``gB``, i.e. a vertex of the Bass-Serre tree.

Right multiplication by a single letter touches only the end of the word,
so products are computed by pushing letters one at a time onto a stack of
``(sign, shift)`` edges.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .errors import PresentationMismatch, ZeroParameter


class GroupClass(str, Enum):
    AMENABLE = "Amenable"
    POSPOS = "PosPos"
    POSNEG = "PosNeg"
    EQUALABS = "EqualAbs"


@dataclass(frozen=True)
class Presentation:
    """A presentation BS(p, q) together with its normalized equivalent.

    ``swapped`` records the substitution a -> a^-1 (BS(p,q) ~ BS(q,p)) and
    ``negated`` records b -> b^-1 (BS(p,q) ~ BS(-p,-q)).
    """

    p: int
    q: int
    group_class: GroupClass
    normalized: tuple[int, int]
    swapped: bool
    negated: bool

    def translate(self, word: str | Sequence[tuple[str, int]]) -> list[tuple[str, int]]:
        """Rewrite a word over the original generators in normalized generators."""
        tokens = parse_word(word) if isinstance(word, str) else list(word)
        out = []
        for gen, exp in tokens:
            if gen == "a" and self.swapped:
                exp = -exp
            elif gen == "b" and self.negated:
                exp = -exp
            out.append((gen, exp))
        return out


def classify(p: int, q: int) -> Presentation:
    if p == 0 or q == 0:
        raise ZeroParameter(f"BS({p},{q}): parameters must be nonzero")
    small = min(abs(p), abs(q))
    candidates = [
        (p, q, False, False),
        (q, p, True, False),
        (-p, -q, False, True),
        (-q, -p, True, True),
    ]
    for np_, nq, swapped, negated in candidates:
        if np_ == small:
            break
    if small == 1:
        cls = GroupClass.AMENABLE
    elif np_ == abs(nq):
        cls = GroupClass.EQUALABS
    elif nq > 0:
        cls = GroupClass.POSPOS
    else:
        cls = GroupClass.POSNEG
    return Presentation(p, q, cls, (np_, nq), swapped, negated)


# ---------------------------------------------------------------- words

_LETTER = re.compile(r"([aAbB])(?:\^(-?\d+))?")
_RUN = re.compile(r"(?:[aAbB](?:\^-?\d+)?)+")


def parse_word(text: str) -> list[tuple[str, int]]:
    """Parse ``"a b^2 A B^-3"`` into ``[("a", 1), ("b", 2), ("a", -1), ("b", 3)]``.

    Tokens may also be run together without spaces when they carry no
    exponent (``"abA"``).
    """
    tokens = []
    for chunk in text.split():
        if _RUN.fullmatch(chunk) is None:
            raise ValueError(f"bad token {chunk!r} in word {text!r}")
        for letter, exp in _LETTER.findall(chunk):
            sign = -1 if letter.isupper() else 1
            tokens.append((letter.lower(), sign * (int(exp) if exp else 1)))
    return tokens


def format_word(tokens: Iterable[tuple[str, int]]) -> str:
    parts = []
    for gen, exp in tokens:
        if exp == 0:
            continue
        letter = gen if exp > 0 else gen.upper()
        parts.append(letter if abs(exp) == 1 else f"{letter}^{abs(exp)}")
    return " ".join(parts)


def word_length_of(tokens: Iterable[tuple[str, int]]) -> int:
    return sum(abs(e) for _, e in tokens)


# ---------------------------------------------------------- stack pushes

def push_a(signs: list, shifts: list, tail: int, e: int, p: int, q: int) -> int:
    """Right-multiply the stacked element (signs, shifts, tail) by a^e, e = +-1.

    Mutates the lists in place and returns the new trailing exponent.
    """
    if e == 1:
        m, other = (q if q > 0 else -q), p
        if signs and signs[-1] == -1 and tail % m == 0:
            signs.pop()
            return shifts.pop() + (tail // q) * other
        s = tail % m
        signs.append(1)
        shifts.append(s)
        return ((tail - s) // q) * other
    if signs and signs[-1] == 1 and tail % p == 0:
        signs.pop()
        return shifts.pop() + (tail // p) * q
    s = tail % p
    signs.append(-1)
    shifts.append(s)
    return ((tail - s) // p) * q


@dataclass(frozen=True)
class NormalForm:
    """Canonical element of BS(p, q) with (p, q) normalized.

    ``edges[i] = (sign, shift)`` is the i-th a-letter together with the
    b-exponent immediately before it; ``tail`` is the final b-exponent.
    """

    p: int
    q: int
    edges: tuple[tuple[int, int], ...]
    tail: int

    @property
    def r0(self) -> int:
        return self.edges[0][1] if self.edges else self.tail

    @property
    def syllables(self) -> list[tuple[int, int]]:
        """(sign, following b-exponent) pairs, matching the r0 + syllable layout."""
        out = []
        for i, (sign, _) in enumerate(self.edges):
            nxt = self.edges[i + 1][1] if i + 1 < len(self.edges) else self.tail
            out.append((sign, nxt))
        return out

    @property
    def syllable_count(self) -> int:
        return len(self.edges)

    @property
    def level(self) -> int:
        return sum(s for s, _ in self.edges)

    def is_identity(self) -> bool:
        return not self.edges and self.tail == 0

    def to_tokens(self) -> list[tuple[str, int]]:
        tokens = []
        for sign, shift in self.edges:
            tokens.append(("b", shift))
            tokens.append(("a", sign))
        tokens.append(("b", self.tail))
        return tokens

    def to_word(self) -> str:
        return format_word(self.to_tokens())

    def __str__(self) -> str:
        if not self.edges:
            return f"b^{self.tail}"
        parts = []
        for sign, shift in self.edges:
            parts.append(f"b^{shift}")
            parts.append("a" if sign == 1 else "A")
        parts.append(f"b^{self.tail}")
        return " ".join(parts)

    def __mul__(self, other: "NormalForm") -> "NormalForm":
        return multiply(self, other)

    def __invert__(self) -> "NormalForm":
        return invert(self)


def _check_same(g: NormalForm, h: NormalForm) -> None:
    if g.p != h.p or g.q != h.q:
        raise PresentationMismatch(f"BS({g.p},{g.q}) vs BS({h.p},{h.q})")


def _fold(p, q, signs, shifts, tail, tokens) -> NormalForm:
    for gen, exp in tokens:
        if gen == "b":
            tail += exp
        else:
            step = 1 if exp > 0 else -1
            for _ in range(abs(exp)):
                tail = push_a(signs, shifts, tail, step, p, q)
    return NormalForm(p, q, tuple(zip(signs, shifts)), tail)


def multiply(g: NormalForm, h: NormalForm) -> NormalForm:
    _check_same(g, h)
    if not h.edges:
        return NormalForm(g.p, g.q, g.edges, g.tail + h.tail)
    signs = [s for s, _ in g.edges]
    shifts = [r for _, r in g.edges]
    return _fold(g.p, g.q, signs, shifts, g.tail, h.to_tokens())


def invert(g: NormalForm) -> NormalForm:
    tokens = [(gen, -exp) for gen, exp in reversed(g.to_tokens())]
    return _fold(g.p, g.q, [], [], 0, tokens)


def is_identity(g: NormalForm) -> bool:
    return g.is_identity()


def check_normal_form(g: NormalForm) -> list[str]:
    """Return a list of violated invariants (empty when g is canonical)."""
    problems = []
    aq = abs(g.q)
    for i, (sign, shift) in enumerate(g.edges):
        bound = aq if sign == 1 else g.p
        if not 0 <= shift < bound:
            problems.append(f"edge {i}: shift {shift} outside [0,{bound})")
        if sign not in (1, -1):
            problems.append(f"edge {i}: bad sign {sign}")
        if i > 0 and shift == 0 and g.edges[i - 1][0] == -sign:
            problems.append(f"edge {i}: pinch")
    return problems


class BSGroup:
    """BS(p, q) for a normalized pair (p >= 1, |q| >= p)."""

    def __init__(self, p: int, q: int):
        pres = classify(p, q)
        if pres.normalized != (p, q):
            raise ValueError(
                f"BS({p},{q}) is not normalized; use BSGroup.from_parameters "
                f"(normalized pair is {pres.normalized})"
            )
        self.p = p
        self.q = q
        self.presentation = pres
        self.group_class = pres.group_class

    @classmethod
    def from_parameters(cls, p: int, q: int) -> "BSGroup":
        np_, nq = classify(p, q).normalized
        return cls(np_, nq)

    def __repr__(self) -> str:
        return f"BSGroup({self.p}, {self.q})"

    def __eq__(self, other) -> bool:
        return isinstance(other, BSGroup) and (self.p, self.q) == (other.p, other.q)

    def __hash__(self) -> int:
        return hash((self.p, self.q))

    @property
    def identity(self) -> NormalForm:
        return NormalForm(self.p, self.q, (), 0)

    def element(self, edges: Sequence[tuple[int, int]] = (), tail: int = 0) -> NormalForm:
        return NormalForm(self.p, self.q, tuple(edges), tail)

    def b_power(self, k: int) -> NormalForm:
        return NormalForm(self.p, self.q, (), k)

    def reduce(self, word: str | Iterable[tuple[str, int]]) -> NormalForm:
        tokens = parse_word(word) if isinstance(word, str) else word
        return _fold(self.p, self.q, [], [], 0, tokens)

    def generators(self) -> dict[str, NormalForm]:
        return {x: self.reduce(x) for x in "aAbB"}

    multiply = staticmethod(multiply)
    invert = staticmethod(invert)
    is_identity = staticmethod(is_identity)


def reduce(word: str | Iterable[tuple[str, int]], p: int, q: int) -> NormalForm:
    return BSGroup(p, q).reduce(word)
