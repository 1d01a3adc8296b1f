"""Level, Bass-Serre tree, hyperbolic and Euclidean projections."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import GroupClass, NormalForm, classify, push_a
from .errors import NotAdjacent, WrongClass


def level(g: NormalForm) -> int:
    return g.level


# ------------------------------------------------------------------ tree

@dataclass(frozen=True)
class TreeVertex:
    """The coset gB, identified by the edge path from the base vertex B."""

    p: int
    q: int
    path: tuple[tuple[int, int], ...]

    @property
    def level(self) -> int:
        return sum(s for s, _ in self.path)

    @property
    def depth(self) -> int:
        return len(self.path)

    def representative(self) -> NormalForm:
        return NormalForm(self.p, self.q, self.path, 0)

    def __str__(self) -> str:
        return format_path(self.path) or "B"


def project_tree(g: NormalForm) -> TreeVertex:
    return TreeVertex(g.p, g.q, g.edges)


def base_vertex(p: int, q: int) -> TreeVertex:
    return TreeVertex(p, q, ())


def _child(v: TreeVertex, shift: int, sign: int) -> TreeVertex:
    signs = [s for s, _ in v.path]
    shifts = [r for _, r in v.path]
    push_a(signs, shifts, shift, sign, v.p, v.q)
    return TreeVertex(v.p, v.q, tuple(zip(signs, shifts)))


def tree_neighbours(v: TreeVertex) -> list[TreeVertex]:
    """The |q| vertices one level up followed by the p vertices one level down."""
    up = [_child(v, j, 1) for j in range(abs(v.q))]
    down = [_child(v, j, -1) for j in range(v.p)]
    return up + down


def format_path(path: Sequence[tuple[int, int]]) -> str:
    return " ".join(("u" if s == 1 else "d") + str(r) for s, r in path)


def parse_path(text: str) -> tuple[tuple[int, int], ...]:
    out = []
    for tok in text.split():
        if tok[0] not in "ud" or not tok[1:].isdigit():
            raise ValueError(f"bad end token {tok!r}")
        out.append((1 if tok[0] == "u" else -1, int(tok[1:])))
    return tuple(out)


@dataclass(frozen=True)
class TreeEnd:
    """A reduced edge path from B, recorded to finite depth."""

    edges: tuple[tuple[int, int], ...]
    truncated: bool = True

    @property
    def depth(self) -> int:
        return len(self.edges)

    def prefix(self, depth: int) -> "TreeEnd":
        return TreeEnd(self.edges[:depth], self.truncated or depth < len(self.edges))

    def __str__(self) -> str:
        return format_path(self.edges)

    @classmethod
    def parse(cls, text: str, truncated: bool = True) -> "TreeEnd":
        return cls(parse_path(text), truncated)


def _adjacent(u: TreeVertex, v: TreeVertex) -> bool:
    a, b = u.path, v.path
    if len(b) == len(a) + 1:
        return b[:-1] == a
    if len(a) == len(b) + 1:
        return a[:-1] == b
    return False


def end_prefix(v_path: Sequence[TreeVertex]) -> TreeEnd:
    """Cancel backtracking in a walk of adjacent vertices and return the reduced path."""
    if not v_path:
        return TreeEnd((), True)
    first = v_path[0]
    stack = [TreeVertex(first.p, first.q, first.path[:i]) for i in range(len(first.path) + 1)]
    for prev, cur in zip(v_path, v_path[1:]):
        if not _adjacent(prev, cur):
            raise NotAdjacent(f"{prev} and {cur} are not adjacent")
        if len(stack) >= 2 and stack[-2] == cur:
            stack.pop()
        else:
            stack.append(cur)
    return TreeEnd(tuple(v.path[-1] for v in stack[1:]), True)


# ------------------------------------------------------------ hyperbolic

@dataclass(frozen=True)
class HypPoint:
    """Image of i under the affine (possibly reflecting) map of an element.

    The point is B + A*i; ``sign`` is -1 when the map reverses orientation.
    """

    A: Fraction
    B: Fraction
    sign: int = 1

    def __str__(self) -> str:
        return (f"A={self.A.numerator}/{self.A.denominator} "
                f"B={self.B.numerator}/{self.B.denominator} s={self.sign:+d}")

    @classmethod
    def parse(cls, text: str) -> "HypPoint":
        fields = dict(part.split("=", 1) for part in text.split())
        return cls(Fraction(fields["A"]), Fraction(fields["B"]), int(fields["s"]))


@dataclass(frozen=True)
class AffineMap:
    """z -> A*z + B when sign = +1, z -> A*(-conj z) + B when sign = -1."""

    A: Fraction
    B: Fraction
    sign: int = 1

    def compose(self, inner: "AffineMap") -> "AffineMap":
        """self after inner."""
        return AffineMap(self.A * inner.A, self.sign * self.A * inner.B + self.B,
                         self.sign * inner.sign)

    def at_i(self) -> HypPoint:
        return HypPoint(self.A, self.B, self.sign)


def a_sign(q: int) -> int:
    return -1 if q < 0 else 1


def _fold_affine(g: NormalForm) -> AffineMap:
    p, aq, sigma = g.p, abs(g.q), a_sign(g.q)
    up, down = Fraction(aq, p), Fraction(p, aq)
    A, B, s = Fraction(1), Fraction(0), 1
    for eps, shift in g.edges:
        if shift:
            B += s * A * shift
        A *= up if eps == 1 else down
        s *= sigma
    if g.tail:
        B += s * A * g.tail
    return AffineMap(A, B, s)


def _require_hyp(p: int, q: int) -> None:
    cls = classify(p, q).group_class
    if cls not in (GroupClass.POSPOS, GroupClass.POSNEG):
        raise WrongClass(f"no hyperbolic projection for {cls.value} BS({p},{q})")


def affine_map(g: NormalForm) -> AffineMap:
    _require_hyp(g.p, g.q)
    return _fold_affine(g)


def project_hyp(g: NormalForm) -> HypPoint:
    return affine_map(g).at_i()


# ------------------------------------------------------------- Euclidean

@dataclass(frozen=True)
class PlanePoint:
    x: int
    y: int
    sign: int = 1


@dataclass(frozen=True)
class EuclidMap:
    """(x, y) -> (sign*x + tx, y + ty)."""

    tx: int
    ty: int
    sign: int = 1

    def compose(self, inner: "EuclidMap") -> "EuclidMap":
        return EuclidMap(self.sign * inner.tx + self.tx, inner.ty + self.ty,
                         self.sign * inner.sign)

    def at_origin(self) -> PlanePoint:
        return PlanePoint(self.tx, self.ty, self.sign)


def _fold_euclid(g: NormalForm) -> EuclidMap:
    sigma = a_sign(g.q)
    tx, s = 0, 1
    for eps, shift in g.edges:
        tx += s * shift
        s *= sigma
    tx += s * g.tail
    return EuclidMap(tx, g.level, s)


def euclid_map(g: NormalForm) -> EuclidMap:
    cls = classify(g.p, g.q).group_class
    if cls is not GroupClass.EQUALABS:
        raise WrongClass(f"no Euclidean projection for {cls.value} BS({g.p},{g.q})")
    return _fold_euclid(g)


def project_euclid(g: NormalForm) -> PlanePoint:
    return euclid_map(g).at_origin()
