"""Finite-support measures, random-walk sampling and scalar functionals.

Random numbers come from numpy's PCG64 bit generator.  Trajectory ``i`` of
an ensemble with master seed ``s`` uses ``SeedSequence([s, i])``, so every
trajectory is reproducible on its own and independent of worker count.
Increments are drawn as integers in [0, D) where D is the common
denominator of the weights, which makes the inverse-CDF lookup exact.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce as _fold
from typing import Iterable, Sequence

import numpy as np

from .core import BSGroup, NormalForm, classify, format_word, invert, multiply, push_a
from .errors import DuplicateSupport, OracleUnresolved, WeightSumError
from .geometry import MetricConstants
from .projections import HypPoint, PlanePoint, TreeEnd, _fold_affine, _fold_euclid
from .wordmetric import DEFAULT_BFS_CAP, word_metric


# --------------------------------------------------------------- measures

@dataclass(frozen=True)
class Measure:
    group: BSGroup
    support: tuple[tuple[NormalForm, Fraction], ...]
    generation_certificate: int | None = None
    generation_depths: tuple[tuple[str, int | None], ...] = ()

    @property
    def elements(self) -> list[NormalForm]:
        return [g for g, _ in self.support]

    @property
    def weights(self) -> list[Fraction]:
        return [w for _, w in self.support]

    def as_dict(self) -> dict[NormalForm, Fraction]:
        return dict(self.support)

    def describe(self) -> list[dict]:
        return [{"word": g.to_word() or "1", "prob": f"{w.numerator}/{w.denominator}"}
                for g, w in self.support]


def _as_fraction(x) -> Fraction:
    f = Fraction(x) if not isinstance(x, float) else Fraction(str(x))
    return f


GENERATOR_NAMES = ("a", "A", "b", "B")


def generation_search(group: BSGroup, elements: Sequence[NormalForm], depth_cap: int):
    """Depth at which each generator first appears as a product of support elements."""
    targets = {name: group.reduce(name) for name in GENERATOR_NAMES}
    found: dict[str, int | None] = {name: None for name in GENERATOR_NAMES}
    layer = {group.identity}
    seen = set(layer)
    for depth in range(1, depth_cap + 1):
        nxt = set()
        for g in layer:
            for x in elements:
                h = multiply(g, x)
                if h not in seen:
                    seen.add(h)
                    nxt.add(h)
        for name, t in targets.items():
            if found[name] is None and t in nxt:
                found[name] = depth
        if all(v is not None for v in found.values()) or not nxt:
            break
        layer = nxt
    return found


def validate_measure(group: BSGroup, raw: Iterable[tuple], depth_cap: int = 4,
                     warn: bool = True) -> Measure:
    """Build a Measure from (word or element, weight) pairs.

    Weights must be exact rationals (strings like "1/4", ints, Fractions)
    summing to exactly 1.  Products of support elements are searched up to
    ``depth_cap`` factors for each of a, a^-1, b, b^-1; the certificate is the
    largest of those depths, or None (with a warning) if one is missing.
    """
    support = []
    seen = set()
    for item, weight in raw:
        g = group.reduce(item) if isinstance(item, str) else item
        w = _as_fraction(weight)
        if w <= 0 or w > 1:
            raise WeightSumError(f"weight {w} of {item!r} not in (0, 1]")
        if g in seen:
            raise DuplicateSupport(f"{item!r} duplicates an earlier support element")
        seen.add(g)
        support.append((g, w))
    total = sum((w for _, w in support), Fraction(0))
    if total != 1:
        raise WeightSumError(f"weights sum to {total}, not 1")
    found = generation_search(group, [g for g, _ in support], depth_cap)
    depths = tuple(found.items())
    cert = None if any(v is None for v in found.values()) else max(found.values())
    if cert is None and warn:
        missing = [k for k, v in found.items() if v is None]
        warnings.warn(
            f"support not certified to generate the group as a semigroup up to depth "
            f"{depth_cap} (missing {missing})", RuntimeWarning, stacklevel=2)
    return Measure(group, tuple(support), cert, depths)


def measure_from_config(cfg: dict, depth_cap: int = 4, warn: bool = True) -> Measure:
    """Parse ``{"p":..,"q":..,"support":[{"word":..,"prob":"n/d"},...]}``.

    Words are written in the generators of BS(p, q) as given and translated
    to the normalized presentation.
    """
    pres = classify(int(cfg["p"]), int(cfg["q"]))
    group = BSGroup(*pres.normalized)
    raw = [(pres.translate(item["word"]), item["prob"]) for item in cfg["support"]]
    raw = [(group.reduce(tokens), w) for tokens, w in raw]
    return validate_measure(group, raw, depth_cap, warn)


def uniform_generators(group: BSGroup) -> Measure:
    return validate_measure(group, [(x, Fraction(1, 4)) for x in "aAbB"])


def reflect(m: Measure) -> Measure:
    support = tuple((invert(g), w) for g, w in m.support)
    found = dict(m.generation_depths)
    # inverting support swaps x with x^-1 in every product
    swapped = {"a": found.get("A"), "A": found.get("a"), "b": found.get("B"), "B": found.get("b")}
    depths = tuple((k, swapped[k]) for k in GENERATOR_NAMES) if found else ()
    return Measure(m.group, support, m.generation_certificate, depths)


def drift(m: Measure) -> Fraction:
    return sum((w * g.level for g, w in m.support), Fraction(0))


def entropy(m: Measure) -> float:
    """Shannon entropy in bits."""
    return -math.fsum(float(w) * math.log2(w.numerator / w.denominator) for _, w in m.support)


def moment(m: Measure, k: float, functional: str = "word_length",
           bfs_cap: int = DEFAULT_BFS_CAP) -> float:
    """sum of mu(g) * |f(g)|^k for f in {word_length, ln_A, ln_one_plus_absB}."""
    if functional == "word_length":
        metric = word_metric(m.group, bfs_cap)
        vals = []
        for g, _ in m.support:
            bound = metric.length(g)
            if bound.exact is None:
                raise OracleUnresolved(f"word length of {g} not resolved with cap {bfs_cap}")
            vals.append(float(bound.exact))
    elif functional == "ln_A":
        ell = math.log(abs(m.group.q) / m.group.p)
        vals = [abs(g.level) * ell for g, _ in m.support]
    elif functional == "ln_one_plus_absB":
        vals = [math.log1p(abs(float(_fold_affine(g).B))) for g, _ in m.support]
    else:
        raise ValueError(f"unknown functional {functional!r}")
    if k == 0:
        return math.fsum(float(w) for _, w in m.support)
    return math.fsum(float(w) * v ** k for (_, w), v in zip(m.support, vals))


# -------------------------------------------------------------- schedules

def geometric_schedule(T: int, per_decade: int = 10) -> list[int]:
    """0, 1, ..., then roughly log-spaced points, always including T/2 and T."""
    pts = {0, T, T // 2}
    if T > 0:
        x = 1.0
        ratio = 10 ** (1 / per_decade)
        while x <= T:
            pts.add(int(round(x)))
            x *= ratio
        for d in range(0, 20):
            if 10 ** d <= T:
                pts.add(10 ** d)
    return sorted(n for n in pts if 0 <= n <= T)


def linear_schedule(T: int, step: int) -> list[int]:
    pts = set(range(0, T + 1, max(1, step))) | {T, T // 2}
    return sorted(pts)


def check_schedule(schedule: Sequence[int], T: int) -> list[int]:
    sched = list(schedule)
    if any(b <= a for a, b in zip(sched, sched[1:])):
        raise ValueError("checkpoint schedule must be strictly increasing")
    if sched and (sched[0] < 0 or sched[-1] > T):
        raise ValueError(f"checkpoints must lie in [0, {T}]")
    return sched


# ------------------------------------------------------------ trajectories

@dataclass
class Checkpoint:
    n: int
    level: int
    point: HypPoint | PlanePoint
    tree_prefix: TreeEnd
    tree_depth: int
    state: NormalForm | None = None


@dataclass
class Trajectory:
    index: int
    seed: int
    steps: int
    drift: Fraction
    record_depth: int
    checkpoints: list[Checkpoint]
    stabilization: dict[int, int | None]
    ladder: list[int]
    final_prefix: TreeEnd
    final_depth: int
    tail_min_level: int = 0
    increments: np.ndarray | None = None
    levels: np.ndarray | None = None
    scalar_track: list | None = None
    final_state: NormalForm | None = None

    @property
    def escaped(self) -> bool:
        return any(c.tree_depth > 0 for c in self.checkpoints) or self.final_depth > 0

    def checkpoint_at(self, n: int) -> Checkpoint:
        for c in self.checkpoints:
            if c.n == n:
                return c
        raise KeyError(f"no checkpoint at n={n}")

    def same_as(self, other: "Trajectory") -> bool:
        same_arrays = all(
            (x is None and y is None) or (x is not None and y is not None and np.array_equal(x, y))
            for x, y in ((self.increments, other.increments), (self.levels, other.levels)))
        return same_arrays and (
            self.index, self.seed, self.steps, self.drift, self.checkpoints, self.stabilization,
            self.ladder, self.final_prefix, self.final_depth, self.tail_min_level,
            self.scalar_track, self.final_state) == (
            other.index, other.seed, other.steps, other.drift, other.checkpoints,
            other.stabilization, other.ladder, other.final_prefix, other.final_depth,
            other.tail_min_level, other.scalar_track, other.final_state)


def rng_for(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, index])))


def _draw(m: Measure, T: int, rng: np.random.Generator) -> np.ndarray:
    weights = m.weights
    D = _fold(math.lcm, (w.denominator for w in weights), 1)
    cum = np.cumsum([w.numerator * (D // w.denominator) for w in weights])
    if T == 0:
        return np.zeros(0, dtype=np.int32)
    if D <= 2 ** 62:
        u = rng.integers(0, D, size=T, dtype=np.int64)
        return np.searchsorted(cum, u, side="right").astype(np.int32)
    # denominators beyond 64 bits: draw arbitrary-precision integers one by one
    bits = D.bit_length()
    cum_list = [int(c) for c in np.cumsum([w.numerator * (D // w.denominator) for w in weights],
                                          dtype=object)]
    out = np.empty(T, dtype=np.int32)
    for i in range(T):
        while True:
            x = int.from_bytes(rng.bytes((bits + 7) // 8), "little") >> (8 * ((bits + 7) // 8) - bits)
            if x < D:
                break
        out[i] = int(np.searchsorted(cum_list, x, side="right"))
    return out


def ladder_times(levels) -> list[int]:
    """Strict running-record times of a level sequence (tau(0) = 0)."""
    if isinstance(levels, Trajectory):
        if levels.levels is None:
            return list(levels.ladder)
        levels = levels.levels
    lv = np.asarray(levels)
    if lv.size == 0:
        return [0]
    prev_max = np.maximum.accumulate(lv)[:-1]
    hits = np.nonzero(lv[1:] > prev_max)[0] + 1
    return [0] + hits.tolist()


def _letters(g: NormalForm) -> list[tuple[int, int]]:
    """Element as a list of (kind, value): kind 0 = b-power, kind 1 = a-letter."""
    ops = []
    for sign, shift in g.edges:
        if shift:
            ops.append((0, shift))
        ops.append((1, sign))
    if g.tail:
        ops.append((0, g.tail))
    return ops


class _ScaledReal:
    """Running real coordinate sum_k sign_k * A_{k-1} * dx_k kept as N / (p^I |q|^J).

    ``weight`` is the current A times p^I |q|^J, an integer.  Every update is
    a small multiple or exact division of a big integer, never a gcd.
    """

    def __init__(self, p: int, aq: int, elements: Sequence[NormalForm], offsets):
        self.p, self.aq = p, aq
        self.num, self.scale = [], []
        i_max = j_max = 0
        for g, dx in zip(elements, offsets):
            lv = 0
            hi = lo = 0
            for sign, _ in g.edges:
                lv += sign
                hi, lo = max(hi, lv), min(lo, lv)
            c = p ** hi * aq ** (-lo)
            n = dx * c
            assert n.denominator == 1
            self.num.append(int(n))
            self.scale.append(c)
            i_max, j_max = max(i_max, hi), max(j_max, -lo)
        self.i_max, self.j_max = i_max, j_max
        self.level = 0
        self.I, self.J = i_max, j_max
        self.N = 0
        self.weight = p ** self.I * aq ** self.J

    def add(self, c: int, orient: int) -> None:
        self.N += orient * self.num[c] * (self.weight // self.scale[c])

    def move(self, dlevel: int) -> None:
        if not dlevel:
            return
        lv = self.level + dlevel
        grow = lv + self.i_max - self.I
        if grow > 0:
            f = self.p ** grow
            self.N *= f
            self.weight *= f
            self.I += grow
        grow = -lv + self.j_max - self.J
        if grow > 0:
            f = self.aq ** grow
            self.N *= f
            self.weight *= f
            self.J += grow
        if dlevel > 0:
            self.weight = self.weight * self.aq ** dlevel // self.p ** dlevel
        else:
            self.weight = self.weight * self.p ** -dlevel // self.aq ** -dlevel
        self.level = lv

    def value(self) -> Fraction:
        return Fraction(self.N, self.p ** self.I * self.aq ** self.J)


def sample(m: Measure, T: int, seed: int, index: int = 0,
           checkpoints: Sequence[int] | None = None, record_depth: int = 8,
           keep_states: bool = False, dense_scalars: bool = False,
           keep_increments: bool = True) -> Trajectory:
    """Run one trajectory Z_0 = 1, Z_n = Z_{n-1} X_n for T steps.

    Tree-prefix stabilization is tracked exactly at every step up to
    ``record_depth``: ``stabilization[d]`` is the first n after which the
    depth-d prefix of the tree path never changes again (None if the path
    is shorter than d at time T).
    """
    if T < 0:
        raise ValueError("T must be non-negative")
    group = m.group
    p, q = group.p, group.q
    aq = abs(q)
    euclid = p == aq
    cps = check_schedule(geometric_schedule(T) if checkpoints is None else checkpoints, T)
    cp_set = set(cps)
    rng = rng_for(seed, index)
    inc = _draw(m, T, rng)

    elements = m.elements
    ops = [_letters(g) for g in elements]
    dlev = np.array([g.level for g in elements], dtype=np.int64)
    levels = np.concatenate(([0], np.cumsum(dlev[inc]))) if T else np.zeros(1, dtype=np.int64)
    level_list = levels.tolist()
    if euclid:
        maps = [_fold_euclid(g) for g in elements]
        step_x = [mp.tx for mp in maps]
    else:
        maps = [_fold_affine(g) for g in elements]
        real = _ScaledReal(p, aq, elements, [mp.B for mp in maps])
        step_x = [mp.B != 0 for mp in maps]
    step_sign = [mp.sign for mp in maps]
    pow_cache: dict[int, Fraction] = {}

    def a_power(lam: int) -> Fraction:
        v = pow_cache.get(lam)
        if v is None:
            v = Fraction(aq ** lam, p ** lam) if lam >= 0 else Fraction(p ** -lam, aq ** -lam)
            pow_cache[lam] = v
        return v

    signs: list[int] = []
    shifts: list[int] = []
    tail = 0
    xpos = 0
    orient = 1
    last_change = [0] * (record_depth + 1)
    cp_records: list[Checkpoint] = []
    dense = [] if dense_scalars else None

    def point(n):
        if euclid:
            return PlanePoint(xpos, level_list[n], orient)
        return HypPoint(a_power(level_list[n]), real.value(), orient)

    def record(n):
        depth = len(signs)
        d = min(depth, record_depth)
        cp_records.append(Checkpoint(
            n, level_list[n], point(n),
            TreeEnd(tuple(zip(signs[:d], shifts[:d])), True), depth,
            NormalForm(p, q, tuple(zip(signs, shifts)), tail) if keep_states else None))

    if 0 in cp_set:
        record(0)
    if dense is not None:
        dense.append(point(0))
    inc_list = inc.tolist()
    for n in range(1, T + 1):
        c = inc_list[n - 1]
        low = len(signs)
        for kind, val in ops[c]:
            if kind == 0:
                tail += val
            else:
                tail = push_a(signs, shifts, tail, val, p, q)
                if len(signs) < low:
                    low = len(signs)
        if euclid:
            xpos += orient * step_x[c]
        else:
            if step_x[c]:
                real.add(c, orient)
            real.move(level_list[n] - level_list[n - 1])
        orient *= step_sign[c]
        if low < record_depth:
            for d in range(low + 1, record_depth + 1):
                last_change[d] = n
        if n in cp_set:
            record(n)
        if dense is not None:
            dense.append(point(n))

    final_depth = len(signs)
    stab = {d: (last_change[d] if final_depth >= d else None) for d in range(1, record_depth + 1)}
    fd = min(final_depth, record_depth)
    return Trajectory(
        index=index, seed=seed, steps=T, drift=drift(m), record_depth=record_depth,
        checkpoints=cp_records, stabilization=stab, ladder=ladder_times(levels),
        final_prefix=TreeEnd(tuple(zip(signs[:fd], shifts[:fd])), True),
        final_depth=final_depth,
        tail_min_level=int(levels[T // 2:].min()),
        increments=inc if keep_increments else None,
        levels=levels if keep_increments else None,
        scalar_track=dense,
        final_state=NormalForm(p, q, tuple(zip(signs, shifts)), tail) if keep_states else None,
    )


def _sample_job(args):
    m, T, seed, index, kwargs = args
    return sample(m, T, seed, index, **kwargs)


def sample_many(m: Measure, N: int, T: int, seed: int, workers: int = 1,
                **kwargs) -> list[Trajectory]:
    """N independent trajectories; the result does not depend on ``workers``."""
    if N < 1:
        raise ValueError("N must be at least 1")
    jobs = [(m, T, seed, i, kwargs) for i in range(N)]
    if workers <= 1:
        return [_sample_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        out = list(pool.map(_sample_job, jobs, chunksize=max(1, N // (4 * workers))))
    return sorted(out, key=lambda t: t.index)


def sample_levels(m: Measure, N: int, T: int, seed: int) -> np.ndarray:
    """Level tracks only, shape (N, T+1); same random streams as ``sample``."""
    dlev = np.array([g.level for g in m.elements], dtype=np.int64)
    out = np.zeros((N, T + 1), dtype=np.int64)
    for i in range(N):
        inc = _draw(m, T, rng_for(seed, i))
        out[i, 1:] = np.cumsum(dlev[inc])
    return out


def empirical_drift(trajectories: Sequence[Trajectory]) -> tuple[float, float]:
    """Mean of lambda(Z_T)/T and its standard error."""
    vals = np.array([t.levels[-1] / t.steps for t in trajectories], dtype=float)
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(len(vals)))


def constants(m: Measure) -> MetricConstants:
    return MetricConstants.for_group(m.group.p, m.group.q)


def support_words(m: Measure) -> list[str]:
    return [format_word(g.to_tokens()) for g in m.elements]
