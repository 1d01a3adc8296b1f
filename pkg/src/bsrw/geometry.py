"""Metrics on the projections, word-metric balls and the discrete hyperbolic plane."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .core import BSGroup, NormalForm, classify, invert, multiply, push_a
from .errors import (
    CapExceeded,
    MembershipError,
    PresentationMismatch,
    TruncationError,
)
from .projections import (
    HypPoint,
    PlanePoint,
    TreeEnd,
    TreeVertex,
    _fold_affine,
    _fold_euclid,
)

GOLDEN_LOG = math.log((3 + math.sqrt(5)) / 2)
DEFAULT_BALL_CAP = 12


@dataclass(frozen=True)
class MetricConstants:
    ell_a: float
    ell_b: float
    c: int

    @classmethod
    def for_group(cls, p: int, q: int) -> "MetricConstants":
        p, q = classify(p, q).normalized
        ell_a = math.log(abs(q) / p)
        return cls(ell_a, GOLDEN_LOG, (p + abs(q) + 2) // 2)

    @property
    def lipschitz(self) -> float:
        return max(self.ell_a, self.ell_b)


# ------------------------------------------------------------ distances

def _arcosh_one_plus(x: Fraction) -> float:
    """arcosh(1 + x) for exact x >= 0, accurate for tiny and huge x."""
    if x == 0:
        return 0.0
    if x.numerator.bit_length() - x.denominator.bit_length() > 500:
        # arcosh(1 + x) = ln(2x) + O(1/x)
        return math.log(2) + math.log(x.numerator) - math.log(x.denominator)
    xf = float(x)
    return math.log1p(xf + math.sqrt(xf * (xf + 2)))


def hyp_cosh_excess(z1: HypPoint, z2: HypPoint) -> Fraction:
    """cosh(d_hyp) - 1, exactly."""
    dB, dA = z1.B - z2.B, z1.A - z2.A
    return (dB * dB + dA * dA) / (2 * z1.A * z2.A)


def d_hyp(z1: HypPoint, z2: HypPoint) -> float:
    return _arcosh_one_plus(hyp_cosh_excess(z1, z2))


def d_eucl(z1: PlanePoint, z2: PlanePoint) -> float:
    return math.hypot(z1.x - z2.x, z1.y - z2.y)


def _same(u, v) -> None:
    if (u.p, u.q) != (v.p, v.q):
        raise PresentationMismatch(f"BS({u.p},{u.q}) vs BS({v.p},{v.q})")


def d_tree(u: TreeVertex, v: TreeVertex) -> int:
    _same(u, v)
    return multiply(invert(u.representative()), v.representative()).syllable_count


def d_tree_paths(u: TreeVertex, v: TreeVertex) -> int:
    """Tree distance from the root paths (length of the symmetric difference)."""
    common = 0
    for x, y in zip(u.path, v.path):
        if x != y:
            break
        common += 1
    return len(u.path) + len(v.path) - 2 * common


def common_prefix(x: Sequence, y: Sequence) -> int:
    n = 0
    for s, t in zip(x, y):
        if s != t:
            break
        n += 1
    return n


def d_ends(x: TreeEnd, y: TreeEnd) -> float:
    k = common_prefix(x.edges, y.edges)
    if k == len(x.edges) or k == len(y.edges):
        if x.depth == y.depth and not x.truncated and not y.truncated:
            return 0.0
        if x.truncated or y.truncated:
            raise TruncationError(
                f"ends agree on all {k} recorded edges; divergence point unknown")
    return 2.0 ** (-k)


def cayley_transform(z: HypPoint) -> tuple[float, float]:
    w = (complex(z.B, z.A) - 1j) / (complex(z.B, z.A) + 1j)
    return (w.real, w.imag)


def point_of(g: NormalForm):
    """HypPoint for p != |q|, PlanePoint for p == |q|, no class checks."""
    if g.p == abs(g.q):
        return _fold_euclid(g).at_origin()
    return _fold_affine(g).at_i()


def horosphere_count(p: int, q: int, radius: float) -> int:
    """Number of b^k with d_hyp(i, pi(b^k)) <= radius, enumerated outward in |k|."""
    i_pt = HypPoint(Fraction(1), Fraction(0))
    count, k = 1, 1
    while d_hyp(i_pt, HypPoint(Fraction(1), Fraction(k))) <= radius + 1e-12:
        count += 2
        k += 1
    return count


# ------------------------------------------------------------------ balls

@dataclass
class Ball:
    radius: int
    elements: list[NormalForm]
    distance: dict[NormalForm, int]
    growth: list[int]

    def rows(self) -> list[tuple[int, int]]:
        return list(enumerate(self.growth))


def _right_mult_letter(g: NormalForm, letter: str) -> NormalForm:
    if letter == "b":
        return NormalForm(g.p, g.q, g.edges, g.tail + 1)
    if letter == "B":
        return NormalForm(g.p, g.q, g.edges, g.tail - 1)
    signs = [s for s, _ in g.edges]
    shifts = [r for _, r in g.edges]
    tail = push_a(signs, shifts, g.tail, 1 if letter == "a" else -1, g.p, g.q)
    return NormalForm(g.p, g.q, tuple(zip(signs, shifts)), tail)


def neighbours(g: NormalForm) -> list[NormalForm]:
    return [_right_mult_letter(g, x) for x in "abAB"]


def bfs_ball(group: BSGroup, radius: int) -> Ball:
    start = group.identity
    dist = {start: 0}
    order = [start]
    frontier = [start]
    growth = [1]
    for r in range(1, radius + 1):
        nxt = []
        for g in frontier:
            for h in neighbours(g):
                if h not in dist:
                    dist[h] = r
                    nxt.append(h)
        order.extend(nxt)
        growth.append(growth[-1] + len(nxt))
        frontier = nxt
    return Ball(radius, order, dist, growth)


def ball(group: BSGroup, radius: int, cap: int = DEFAULT_BALL_CAP) -> Ball:
    if radius > cap:
        raise CapExceeded(f"ball radius {radius} exceeds cap {cap}")
    return bfs_ball(group, radius)


# ----------------------------------------------------- hyperbolic plane

@dataclass(frozen=True)
class PlanePath:
    """Finite window of an ascending tree path through B.

    ``up_shifts[i]`` labels the edge from v(i) to v(i+1); ``down_shifts[i]``
    labels the edge from v(-i) down to v(-i-1).  The window covers
    v(-len(down_shifts)) .. v(len(up_shifts)).
    """

    p: int
    q: int
    up_shifts: tuple[int, ...] = ()
    down_shifts: tuple[int, ...] = ()

    def __post_init__(self):
        for j in self.up_shifts:
            if not 0 <= j < abs(self.q):
                raise ValueError(f"up shift {j} outside [0,{abs(self.q)})")
        for j in self.down_shifts:
            if not 0 <= j < self.p:
                raise ValueError(f"down shift {j} outside [0,{self.p})")

    @classmethod
    def straight(cls, p: int, q: int, depth: int) -> "PlanePath":
        return cls(p, q, (0,) * depth, (0,) * depth)

    @property
    def window(self) -> tuple[int, int]:
        return (-len(self.down_shifts), len(self.up_shifts))

    def position(self, path: Sequence[tuple[int, int]]) -> int | None:
        """Index of the vertex on v, or None if the vertex is not in the window."""
        if not path:
            return 0
        sign = path[0][0]
        shifts = self.up_shifts if sign == 1 else self.down_shifts
        if len(path) > len(shifts):
            return None
        for i, (s, r) in enumerate(path):
            if s != sign or r != shifts[i]:
                return None
        return sign * len(path)

    def vertex(self, index: int) -> TreeVertex:
        if index >= 0:
            path = tuple((1, r) for r in self.up_shifts[:index])
        else:
            path = tuple((-1, r) for r in self.down_shifts[:-index])
        return TreeVertex(self.p, self.q, path)


def plane_bfs(g: NormalForm, v: PlanePath, radius: int) -> dict[NormalForm, int]:
    """Distances from g inside the subgraph G_v, up to ``radius``."""
    if v.position(g.edges) is None:
        raise MembershipError(f"{g} does not project onto the path window")
    dist = {g: 0}
    frontier = [g]
    for r in range(1, radius + 1):
        nxt = []
        for x in frontier:
            for letter in "abAB":
                y = _right_mult_letter(x, letter)
                if y in dist:
                    continue
                if letter in "aA" and v.position(y.edges) is None:
                    continue
                dist[y] = r
                nxt.append(y)
        frontier = nxt
    return dist


def plane_distance(g: NormalForm, h: NormalForm, v: PlanePath, cap: int) -> int | None:
    if v.position(h.edges) is None:
        raise MembershipError(f"{h} does not project onto the path window")
    if v.position(g.edges) is None:
        raise MembershipError(f"{g} does not project onto the path window")
    seen = {g}
    frontier = [g]
    if g == h:
        return 0
    for r in range(1, cap + 1):
        nxt = []
        for x in frontier:
            for letter in "abAB":
                y = _right_mult_letter(x, letter)
                if y in seen:
                    continue
                if letter in "aA" and v.position(y.edges) is None:
                    continue
                if y == h:
                    return r
                seen.add(y)
                nxt.append(y)
        frontier = nxt
    return None


@dataclass
class AuditReport:
    radius: int
    pairs: int
    violations: int
    lipschitz: float
    max_forward_ratio: float
    max_reverse_ratio: float
    rows: list[tuple[int, int, float, float]] = field(default_factory=list)


def bilipschitz_audit(v: PlanePath, radius: int, tol: float = 1e-9,
                      keep_rows: bool = True) -> AuditReport:
    """Compare plane distances with hyperbolic distances on the radius-r ball of G_v.

    Checks d_hyp <= max(ell_a, ell_b) * d_plane for every pair and records
    the largest d_plane / d_hyp seen.  For p == |q| the Euclidean distance
    with constant 1 is used instead.
    """
    lo, hi = v.window
    if min(-lo, hi) < 3 * radius + 1:
        raise TruncationError(
            f"path window {v.window} too small for radius {radius}; need depth {3 * radius + 1}")
    consts = MetricConstants.for_group(v.p, v.q)
    euclid = v.p == abs(v.q)
    lip = 1.0 if euclid else consts.lipschitz
    identity = NormalForm(v.p, v.q, (), 0)
    members = sorted(plane_bfs(identity, v, radius).items(), key=lambda kv: (kv[1], str(kv[0])))
    elems = [g for g, _ in members]
    points = [point_of(g) for g in elems]
    index = {g: i for i, g in enumerate(elems)}
    report = AuditReport(radius, 0, 0, lip, 0.0, 0.0)
    pair_id = 0
    for i, g in enumerate(elems):
        dist = plane_bfs(g, v, 2 * radius)
        for h, dp in dist.items():
            j = index.get(h)
            if j is None or j <= i:
                continue
            dm = d_eucl(points[i], points[j]) if euclid else d_hyp(points[i], points[j])
            report.pairs += 1
            if dm > lip * dp + tol:
                report.violations += 1
            report.max_forward_ratio = max(report.max_forward_ratio, dm / dp)
            if dm > 0:
                report.max_reverse_ratio = max(report.max_reverse_ratio, dp / dm)
            if keep_rows:
                report.rows.append((pair_id, dp, dm, dp / dm if dm > 0 else math.inf))
            pair_id += 1
    return report
