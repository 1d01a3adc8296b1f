"""Word length in the generators {a, b}: exact by BFS, else lower/upper bounds."""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction

from .core import BSGroup, NormalForm, format_word, push_a
from .geometry import MetricConstants, bfs_ball, d_hyp, point_of
from .projections import HypPoint

DEFAULT_BFS_CAP = 10


@dataclass(frozen=True)
class WordLengthBound:
    lower: int
    upper: int
    exact: int | None = None

    def __post_init__(self):
        if self.exact is not None:
            object.__setattr__(self, "lower", self.exact)
            object.__setattr__(self, "upper", self.exact)
        if self.lower > self.upper:
            raise AssertionError(f"inconsistent bounds {self.lower} > {self.upper}")


# ----------------------------------------------------- compressed b-powers

def _b_power_plan(N: int, p: int, q: int) -> dict[int, tuple[int, int, int] | None]:
    """Cheapest way to spell b^N for every value reachable by the recursion.

    Uses b^N = b^s (a b^{kp} A) with N = kq + s.  Returns a table mapping each
    visited exponent to (cost, s, kp) or (cost, None, None) for the plain power.
    Iterative so that exponents with thousands of digits are fine.
    """
    aq = abs(q)
    children: dict[int, list[tuple[int, int]]] = {}
    stack = [N]
    while stack:
        n = stack.pop()
        if n in children:
            continue
        opts = []
        if n != 0 and p < aq:
            s0 = n % aq
            for s in {s0, s0 - aq}:
                k = (n - s) // q
                inner = k * p
                if k != 0 and abs(inner) < abs(n):
                    opts.append((s, inner))
        children[n] = opts
        for _, inner in opts:
            if inner not in children:
                stack.append(inner)
    cost: dict[int, tuple[int, int | None, int | None]] = {}
    # children always have strictly smaller |n|, so process by increasing |n|
    for n in sorted(children, key=abs):
        best = (abs(n), None, None)
        for s, inner in children[n]:
            c = abs(s) + 2 + cost[inner][0]
            if c < best[0]:
                best = (c, s, inner)
        cost[n] = best
    return cost


def b_power_word(N: int, p: int, q: int) -> list[tuple[str, int]]:
    """A short word for b^N, as tokens."""
    cost = _b_power_plan(N, p, q)
    out: list[tuple[str, int]] = []
    closers = 0
    n = N
    while True:
        c, s, inner = cost[n]
        if s is None:
            out.append(("b", n))
            break
        out.append(("b", s))
        out.append(("a", 1))
        closers += 1
        n = inner
    out.extend([("a", -1)] * closers)
    return [t for t in out if t[1] != 0]


def b_power_length(N: int, p: int, q: int) -> int:
    return _b_power_plan(N, p, q)[N][0]


# ------------------------------------------------------------- witnesses

WITNESS_BEAM = 16


def _witness_paths(g: NormalForm, beam: int = WITNESS_BEAM):
    """Candidate edge spellings as (cost, carry, shifts used), best few per step.

    An edge can be reached with b-powers differing by multiples of the edge
    modulus; each choice changes the exponent carried forward.  Keeps
    the ``beam`` cheapest partial spellings, one per carried exponent.
    """
    p, q = g.p, g.q
    aq = abs(q)
    states = [(0, 0, ())]
    for sign, shift in g.edges:
        m = aq if sign == 1 else p
        nxt: dict[int, tuple[int, int, tuple]] = {}
        for cost, carry, used in states:
            t0 = (shift - carry) % m
            for t in (t0 - m, t0, t0 + m):
                # the path is reduced, so pushing never cancels an edge
                c = push_a([], [], carry + t, sign, p, q)
                cand = (cost + abs(t) + 1, c, used + (t,))
                if c not in nxt or cand[0] < nxt[c][0]:
                    nxt[c] = cand
        states = sorted(nxt.values(), key=lambda x: (x[0], abs(x[1])))[:beam]
    return states


def _best_witness(g: NormalForm) -> tuple[int, tuple[int, ...], int]:
    # the normal form's own spelling is always a candidate
    plain = (sum(abs(r) + 1 for _, r in g.edges), 0, tuple(r for _, r in g.edges))
    best = None
    for cost, carry, used in [plain, *_witness_paths(g)]:
        total = cost + b_power_length(g.tail - carry, g.p, g.q)
        if best is None or total < best[0]:
            best = (total, used, carry)
    return best


def witness_word(g: NormalForm) -> list[tuple[str, int]]:
    """A short word representing g: a b-power before each edge, then a compressed b-power."""
    _, used, carry = _best_witness(g)
    tokens: list[tuple[str, int]] = []
    for (sign, _), t in zip(g.edges, used):
        tokens.append(("b", t))
        tokens.append(("a", sign))
    tokens.extend(b_power_word(g.tail - carry, g.p, g.q))
    return [t for t in tokens if t[1] != 0]


def witness_prefix_costs(edges, p: int, q: int) -> list[tuple[int, int]]:
    """(letters used, carried b-exponent) after each prefix of an edge path.

    Entry d describes the witness for the first d edges; the witness of a
    longer path extends that of every prefix, so this is one linear pass.
    """
    aq = abs(q)
    out = [(0, 0)]
    total = 0
    signs: list[int] = []
    shifts: list[int] = []
    carry = 0
    for sign, shift in edges:
        m = aq if sign == 1 else p
        t = (shift - carry) % m
        if t > m // 2:
            t -= m
        total += abs(t) + 1
        carry = push_a(signs, shifts, carry + t, sign, p, q)
        out.append((total, carry))
    return out


def witness_length(g: NormalForm) -> int:
    return _best_witness(g)[0]


# ---------------------------------------------------------------- bounds

_ORIGIN = HypPoint(Fraction(1), Fraction(0))


def geometric_lower_bound(g: NormalForm) -> int:
    """Lower bound from the projection to the plane (Lipschitz with the max step length)."""
    return point_lower_bound(point_of(g), g.p, g.q)


def point_lower_bound(pt, p: int, q: int) -> int:
    if p == abs(q):
        sq = pt.x * pt.x + pt.y * pt.y
        return 0 if sq == 0 else math.isqrt(sq - 1) + 1
    if p == 1 and abs(q) == 1:
        return 0
    consts = MetricConstants.for_group(p, q)
    d = d_hyp(_ORIGIN, pt)
    return max(0, math.ceil(d / consts.lipschitz - 1e-9))


class WordMetric:
    """Word-length oracle for one group, with a lazily built BFS table.

    The table is built once under a lock; afterwards lookups are read-only
    and safe to share between threads.
    """

    def __init__(self, group: BSGroup, bfs_cap: int = DEFAULT_BFS_CAP):
        if bfs_cap < 0:
            raise ValueError("bfs_cap must be non-negative")
        self.group = group
        self.bfs_cap = bfs_cap
        self._table: dict[NormalForm, int] | None = None
        self._lock = threading.Lock()

    @property
    def table(self) -> dict[NormalForm, int]:
        if self._table is None:
            with self._lock:
                if self._table is None:
                    self._table = bfs_ball(self.group, self.bfs_cap).distance
        return self._table

    def length(self, g: NormalForm) -> WordLengthBound:
        exact = self.table.get(g)
        if exact is not None:
            return WordLengthBound(exact, exact, exact)
        lower = max(abs(g.level), g.syllable_count, geometric_lower_bound(g), self.bfs_cap + 1)
        return WordLengthBound(lower, witness_length(g))

    def bounds_only(self, g: NormalForm) -> WordLengthBound:
        """Bounds without consulting the BFS table."""
        lower = max(abs(g.level), g.syllable_count, geometric_lower_bound(g))
        if g.is_identity():
            return WordLengthBound(0, 0, 0)
        return WordLengthBound(max(lower, 1), witness_length(g))


_METRICS: dict[tuple[int, int, int], WordMetric] = {}


def word_metric(group: BSGroup, bfs_cap: int = DEFAULT_BFS_CAP) -> WordMetric:
    key = (group.p, group.q, bfs_cap)
    if key not in _METRICS:
        _METRICS[key] = WordMetric(group, bfs_cap)
    return _METRICS[key]


def word_length(g: NormalForm, bfs_cap: int = DEFAULT_BFS_CAP) -> WordLengthBound:
    return word_metric(BSGroup(g.p, g.q), bfs_cap).length(g)


def witness_string(g: NormalForm) -> str:
    return format_word(witness_word(g))
