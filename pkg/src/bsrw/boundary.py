"""Boundary convergence diagnostics, hitting measures, strips and gauges."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .core import BSGroup, GroupClass, NormalForm
from .errors import (
    DegenerateStrip,
    DepthTooDeep,
    InsufficientSamples,
    OracleUnresolved,
    TruncationError,
    WrongClass,
    WrongDrift,
)
from .geometry import MetricConstants, common_prefix, d_eucl, d_hyp, point_of
from .projections import HypPoint, PlanePoint, TreeEnd, _fold_affine, format_path
from .walk import Measure, Trajectory, drift, ladder_times, reflect, sample
from .wordmetric import WordMetric, b_power_length, point_lower_bound, witness_prefix_costs

_ORIGIN_H = HypPoint(Fraction(1), Fraction(0))
_ORIGIN_E = PlanePoint(0, 0)


def _quantiles(values) -> dict:
    arr = np.asarray([v for v in values if v is not None], dtype=float)
    if arr.size == 0:
        return {"count": 0}
    q25, q50, q75 = np.quantile(arr, [0.25, 0.5, 0.75])
    return {"count": int(arr.size), "min": float(arr.min()), "q25": float(q25),
            "median": float(q50), "q75": float(q75), "max": float(arr.max())}


@dataclass
class ConvergenceReport:
    mode: str
    outcomes: list[dict]
    aggregate: dict
    curve: list[tuple] = field(default_factory=list)
    columns: tuple[str, ...] = ()


# ----------------------------------------------------------------- tree

def tree_convergence(trajectories: Sequence[Trajectory], depth: int) -> ConvergenceReport:
    """Per trajectory, the time after which the depth-d tree prefix is frozen."""
    outcomes = []
    for t in trajectories:
        if depth > t.record_depth:
            raise DepthTooDeep(f"depth {depth} > recorded depth {t.record_depth}")
        tau = t.stabilization.get(depth)
        outcomes.append({"traj": t.index, "stabilization": tau,
                         "escaped": t.escaped, "steps": t.steps})
    N = len(outcomes)
    half = [o for o, t in zip(outcomes, trajectories)
            if o["stabilization"] is not None and o["stabilization"] <= t.steps // 2]
    agg = {
        "depth": depth,
        "trajectories": N,
        "stabilized_by_half": len(half) / N if N else 0.0,
        "non_escape": sum(1 for o in outcomes if not o["escaped"]),
        "never_reached_depth": sum(1 for o in outcomes if o["stabilization"] is None),
        "stabilization_time": _quantiles(o["stabilization"] for o in outcomes),
    }
    curve = []
    if trajectories:
        times = sorted({c.n for t in trajectories for c in t.checkpoints})
        stab = [o["stabilization"] for o in outcomes]
        for n in times:
            frac = sum(1 for s in stab if s is not None and s <= n) / N
            curve.append((n, frac))
    return ConvergenceReport("TreeEnd", outcomes, agg, curve, ("n", "stabilized_fraction"))


# ------------------------------------------------------------ hyperbolic

def _require_hyp_traj(t: Trajectory) -> None:
    if not t.checkpoints or not isinstance(t.checkpoints[0].point, HypPoint):
        raise WrongClass("hyperbolic diagnostics need a hyperbolic projection")


def hyp_limit(trajectories: Sequence[Trajectory]) -> ConvergenceReport:
    """Divergence witness (positive drift) or real limit estimate (negative drift).

    Needs checkpoints at T/2 and T.
    """
    if not trajectories:
        raise ValueError("no trajectories")
    delta = trajectories[0].drift
    if delta == 0:
        raise WrongDrift("zero drift: use speed_profile")
    outcomes = []
    for t in trajectories:
        _require_hyp_traj(t)
        T = t.steps
        end, mid = t.checkpoint_at(T), t.checkpoint_at(T // 2)
        if delta > 0:
            tail_min = t.tail_min_level
            outcomes.append({
                "traj": t.index,
                "increased": end.point.A > mid.point.A,
                "log_A_T": math.log(end.point.A.numerator) - math.log(end.point.A.denominator),
                "level_T": end.level,
                "min_tail_level": tail_min,
            })
        else:
            residual = abs(end.point.B - mid.point.B)
            outcomes.append({
                "traj": t.index,
                "r_estimate": float(end.point.B),
                "residual": float(residual),
                "residual_exact_small": residual < Fraction(1, 1000),
            })
    if delta > 0:
        agg = {
            "drift": str(delta),
            "fraction_increased": sum(o["increased"] for o in outcomes) / len(outcomes),
            "min_tail_level": _quantiles(o["min_tail_level"] for o in outcomes),
        }
        return ConvergenceReport("HypToInfinity", outcomes, agg)
    agg = {
        "drift": str(delta),
        "fraction_residual_below_1e-3":
            sum(o["residual_exact_small"] for o in outcomes) / len(outcomes),
        "residual": _quantiles(o["residual"] for o in outcomes),
        "r_estimate": _quantiles(o["r_estimate"] for o in outcomes),
    }
    return ConvergenceReport("HypToReal", outcomes, agg)


def _distance_from_origin(pt) -> float:
    if isinstance(pt, PlanePoint):
        return d_eucl(_ORIGIN_E, pt)
    return d_hyp(_ORIGIN_H, pt)


def speed_profile(trajectories: Sequence[Trajectory]) -> ConvergenceReport:
    """d(pi(Z_0), pi(Z_n)) / n at every checkpoint n > 0."""
    per_n: dict[int, list[float]] = {}
    outcomes = []
    for t in trajectories:
        prof = []
        for c in t.checkpoints:
            if c.n == 0:
                continue
            v = _distance_from_origin(c.point) / c.n
            per_n.setdefault(c.n, []).append(v)
            prof.append((c.n, v))
        outcomes.append({"traj": t.index, "profile": prof})
    curve = []
    for n in sorted(per_n):
        q25, med, q75 = np.quantile(per_n[n], [0.25, 0.5, 0.75])
        curve.append((n, float(med), float(q25), float(q75)))
    agg = {"median_by_n": {n: m for n, m, _, _ in curve}}
    return ConvergenceReport("HypSublinear", outcomes, agg, curve,
                             ("n", "median_speed", "q25", "q75"))


# --------------------------------------------------------------- ladder

@dataclass
class LadderTailReport:
    observations: int
    horizon: int
    slope: float | None
    intercept: float | None
    collapsed_at: int | None
    survival: list[tuple[int, float]]


def first_ladder_times(tracks) -> tuple[np.ndarray, int]:
    """tau(1) per trajectory (-1 when censored) and the common horizon."""
    if isinstance(tracks, np.ndarray):
        lv = tracks
        above = lv[:, 1:] > 0
        hit = above.any(axis=1)
        first = np.where(hit, above.argmax(axis=1) + 1, -1)
        return first, lv.shape[1] - 1
    taus, horizon = [], None
    for t in tracks:
        lad = ladder_times(t)
        taus.append(lad[1] if len(lad) > 1 else -1)
        horizon = t.steps if horizon is None else min(horizon, t.steps)
    return np.asarray(taus), int(horizon or 0)


def ladder_tail(tracks, k_range: tuple[int, int] = (10, 1000), points: int = 25,
                min_samples: int = 10_000) -> LadderTailReport:
    """Empirical survival P(tau(1) > k) and its log-log slope over ``k_range``."""
    taus, horizon = first_ladder_times(tracks)
    n = len(taus)
    if n < min_samples:
        raise InsufficientSamples(f"{n} ladder observations < {min_samples}")
    lo, hi = k_range
    if horizon < hi:
        raise ValueError(f"horizon {horizon} shorter than k range end {hi}")
    censored = taus < 0
    ks = np.unique(np.round(np.geomspace(lo, hi, points)).astype(int))
    surv = [(int(k), float(np.mean(censored | (taus > k)))) for k in ks]
    if all(s == 0.0 for _, s in surv):
        return LadderTailReport(n, horizon, None, None, int(taus.max()), surv)
    pts = [(math.log(k), math.log(s)) for k, s in surv if s > 0]
    x = np.array([a for a, _ in pts])
    y = np.array([b for _, b in pts])
    slope, intercept = np.polyfit(x, y, 1)
    return LadderTailReport(n, horizon, float(slope), float(intercept), None, surv)


# ------------------------------------------------------------- hitting

@dataclass
class CylinderHistogram:
    depth: int
    masses: dict[str, Fraction]
    sample_size: int
    max_mass_by_depth: dict[int, Fraction]
    zero_cells_depth1: int
    masses_by_depth: dict[int, dict[str, Fraction]]

    def rows(self) -> list[tuple[int, str, float]]:
        return [(d, cell, float(m)) for d in sorted(self.masses_by_depth)
                for cell, m in sorted(self.masses_by_depth[d].items())]


def hitting_histogram(ends: Sequence[TreeEnd], depth: int, group: BSGroup | None = None
                      ) -> CylinderHistogram:
    """Empirical cylinder masses of sampled ends, at every depth 1..depth."""
    N = len(ends)
    if N == 0:
        raise ValueError("no ends")
    for e in ends:
        if e.depth < depth:
            raise DepthTooDeep(f"end recorded to depth {e.depth} < {depth}")
    by_depth = {}
    for d in range(1, depth + 1):
        counts = Counter(format_path(e.edges[:d]) for e in ends)
        by_depth[d] = {cell: Fraction(c, N) for cell, c in counts.items()}
    zero = 0
    if group is not None:
        cells = [f"u{j}" for j in range(abs(group.q))] + [f"d{j}" for j in range(group.p)]
        zero = sum(1 for c in cells if c not in by_depth[1])
    return CylinderHistogram(
        depth, by_depth[depth], N,
        {d: max(m.values()) for d, m in by_depth.items()}, zero, by_depth)


# --------------------------------------------------------------- strips

@dataclass(frozen=True)
class Strip:
    """Cosets on the geodesic between two ends, optionally filtered horizontally."""

    p: int
    q: int
    xi_minus: TreeEnd
    xi_plus: TreeEnd
    r_plus: Fraction | None
    branch: int

    @property
    def window(self) -> dict:
        return {"branch_depth": self.branch, "minus_depth": self.xi_minus.depth,
                "plus_depth": self.xi_plus.depth}

    def tree_reach(self) -> int:
        """Largest d such that every vertex of v within distance d of B is recorded."""
        reach = []
        for e in (self.xi_minus, self.xi_plus):
            reach.append(e.depth if e.truncated else 10 ** 18)
        return min(reach)

    def on_geodesic(self, path: Sequence[tuple[int, int]]) -> bool:
        path = tuple(path)
        if len(path) < self.branch:
            return False
        for e in (self.xi_minus, self.xi_plus):
            k = common_prefix(path, e.edges)
            if k == len(path):
                return True
            if k == e.depth and e.truncated:
                raise TruncationError(
                    f"vertex at depth {len(path)} lies beyond recorded end depth {e.depth}")
        return False

    def cosets_within(self, radius: int) -> list[tuple[tuple[int, int], ...]]:
        """Vertices of v at tree distance <= radius from B."""
        if radius > self.tree_reach():
            raise TruncationError(
                f"tree radius {radius} exceeds strip window {self.tree_reach()}")
        out = []
        for d in range(self.branch, min(radius, self.xi_plus.depth) + 1):
            out.append(self.xi_plus.edges[:d])
        for d in range(self.branch + 1, min(radius, self.xi_minus.depth) + 1):
            out.append(self.xi_minus.edges[:d])
        return out


def build_strip(p: int, q: int, xi_minus: TreeEnd, xi_plus: TreeEnd,
                r_plus: Fraction | None = None) -> Strip:
    c = common_prefix(xi_minus.edges, xi_plus.edges)
    if c == xi_minus.depth or c == xi_plus.depth:
        raise DegenerateStrip(f"ends agree on all {c} recorded edges")
    return Strip(p, q, xi_minus, xi_plus, None if r_plus is None else Fraction(r_plus), c)


def coset_minimizers(s: Strip, path: Sequence[tuple[int, int]]) -> list[NormalForm]:
    """Elements g of the coset with |B_g - r_plus| minimal (one or two of them)."""
    rep = NormalForm(s.p, s.q, tuple(path), 0)
    mp = _fold_affine(rep)
    step = mp.sign * mp.A
    target = (s.r_plus - mp.B) / step
    lo = math.floor(target)
    cands = sorted({lo, lo + 1})
    dist = {k: abs(mp.B + step * k - s.r_plus) for k in cands}
    best = min(dist.values())
    return [NormalForm(s.p, s.q, tuple(path), k) for k in cands if dist[k] == best]


def strip_member(s: Strip, g: NormalForm) -> bool:
    if not s.on_geodesic(g.edges):
        return False
    if s.r_plus is None:
        return True
    return g in coset_minimizers(s, g.edges)


# --------------------------------------------------------------- gauges

GAUGE_MODES = ("WordBall", "ZeroDrift", "EqualAbs")


@dataclass(frozen=True)
class Gauge:
    mode: str
    k: int

    def __post_init__(self):
        if self.mode not in GAUGE_MODES:
            raise ValueError(f"unknown gauge mode {self.mode!r}")


def _ceil_sqrt(n: int) -> int:
    return 0 if n <= 0 else math.isqrt(n - 1) + 1


def gauge_level(g: NormalForm, mode: str, metric: WordMetric | None = None) -> tuple[int, int]:
    """Smallest k with g in the gauge set of index k, as an interval (lo, hi)."""
    dT = g.syllable_count
    if mode == "WordBall":
        if metric is None:
            raise ValueError("WordBall gauge needs a word metric")
        b = metric.length(g)
        return (b.lower, b.upper)
    if mode == "ZeroDrift":
        dh = d_hyp(_ORIGIN_H, point_of(g))
        k = max(math.ceil(dh - 1e-12), _ceil_sqrt(dT))
        return (k, k)
    if mode == "EqualAbs":
        pt = point_of(g)
        k = max(_ceil_sqrt(pt.x * pt.x + pt.y * pt.y), dT)
        return (k, k)
    raise ValueError(f"unknown gauge mode {mode!r}")


def gauge_member(g: NormalForm, gauge: Gauge, metric: WordMetric | None = None) -> bool:
    lo, hi = gauge_level(g, gauge.mode, metric)
    if hi <= gauge.k:
        return True
    if lo > gauge.k:
        return False
    raise OracleUnresolved(f"word length of {g} in [{lo},{hi}] straddles {gauge.k}")


# ------------------------------------------------------- strip counting

@dataclass
class StripAuditRow:
    n: int
    k_lo: int
    k_hi: int
    count_lo: int
    count_hi: int
    bound: float
    ok: bool

    @property
    def log_over_n(self) -> float:
        if self.n == 0 or self.count_hi == 0:
            return 0.0 if self.n else math.nan
        return math.log(self.count_hi) / self.n


@dataclass
class StripAudit:
    mode: str
    window: dict
    rows: list[StripAuditRow]

    @property
    def violations(self) -> int:
        return sum(1 for r in self.rows if not r.ok)


def _zero_drift_coset_count(A: Fraction, x: Fraction, sign: int, k: int) -> int:
    """#{j : d_hyp(i, x + sign*A*j + A i) <= k}.

    With c = -x/(sign*A) the condition reads |j - c| <= sqrt(R)/A where
    R = 2A(cosh k - 1) - (A-1)^2.  The integer part of c is split off exactly
    so only a bounded fractional offset meets floating point.
    """
    c = -x / (sign * A)
    frac = c - math.floor(c)
    with mpmath.workdps(50 + k):
        a = mpmath.mpf(A.numerator) / A.denominator
        R = 2 * a * (mpmath.cosh(k) - 1) - (a - 1) ** 2
        if R < 0:
            return 0
        r = mpmath.sqrt(R) / a
        f = mpmath.mpf(frac.numerator) / frac.denominator
        lo = int(mpmath.ceil(f - r))
        hi = int(mpmath.floor(f + r))
    return max(0, hi - lo + 1)


def _word_ball_bounds(s: Strip, radius: int, metric: WordMetric,
                      upper_needed: int) -> list[tuple[int, int | None]]:
    """Word-length bounds of every horizontal minimizer on v within ``radius``.

    Affine maps and witness costs are accumulated along each end, so the
    whole window costs one pass rather than one fold per coset.  Upper
    bounds are only computed (else None) when the lower bound does not
    already exceed ``upper_needed``.
    """
    if radius > s.tree_reach():
        raise TruncationError(f"tree radius {radius} exceeds strip window {s.tree_reach()}")
    p, q = s.p, s.q
    cap = metric.bfs_cap
    table = metric.table
    out = []
    for end, start in ((s.xi_plus, s.branch), (s.xi_minus, s.branch + 1)):
        depth = min(radius, end.depth)
        costs = witness_prefix_costs(end.edges[:depth], p, q)
        for (path, A, B, sg), (cost, carry) in zip(_prefix_maps_one(end, depth, p, q), costs):
            d = len(path)
            if d < start:
                continue
            step = sg * A
            target = (s.r_plus - B) / step
            lo = math.floor(target)
            dist = {k: abs(B + step * k - s.r_plus) for k in (lo, lo + 1)}
            best = min(dist.values())
            lam = sum(e for e, _ in path)
            for k, dk in dist.items():
                if dk != best:
                    continue
                if d <= cap:
                    exact = table.get(NormalForm(p, q, tuple(path), k))
                    if exact is not None:
                        out.append((exact, exact))
                        continue
                lower = max(abs(lam), d, cap + 1,
                            point_lower_bound(HypPoint(A, B + step * k, sg), p, q))
                upper = None
                if lower <= upper_needed:
                    upper = cost + b_power_length(k - carry, p, q)
                out.append((lower, upper))
    return out


def _prefix_maps_one(end: TreeEnd, depth: int, p: int, q: int):
    aq = abs(q)
    sigma = -1 if q < 0 else 1
    A, B, sg = Fraction(1), Fraction(0), 1
    for d in range(depth + 1):
        yield end.edges[:d], A, B, sg
        if d < depth:
            eps, shift = end.edges[d]
            B += sg * A * shift
            A *= Fraction(aq, p) if eps == 1 else Fraction(p, aq)
            sg *= sigma


def _prefix_maps(s: Strip, radius: int):
    """(path, A, B, sign) for every coset of v within ``radius``."""
    out = []
    for end, start in ((s.xi_plus, s.branch), (s.xi_minus, s.branch + 1)):
        for item in _prefix_maps_one(end, min(radius, end.depth), s.p, s.q):
            if len(item[0]) >= start:
                out.append(item)
    return out


def _zero_drift_count(s: Strip, k: int) -> int:
    radius = k * k
    if radius > s.tree_reach():
        raise TruncationError(f"tree radius {radius} exceeds strip window {s.tree_reach()}")
    ell_a = MetricConstants.for_group(s.p, s.q).ell_a
    total = 0
    for path, A, B, sg in _prefix_maps(s, radius):
        lam = sum(e for e, _ in path)
        if abs(lam) * ell_a > k + 1e-9:
            continue
        total += _zero_drift_coset_count(A, B, sg, k)
    return total


def _equal_abs_count(s: Strip, k: int) -> int:
    if k > s.tree_reach():
        raise TruncationError(f"tree radius {k} exceeds strip window {s.tree_reach()}")
    total = 0
    for path in s.cosets_within(k):
        lam = sum(e for e, _ in path)
        if abs(lam) <= k:
            total += 2 * math.isqrt(k * k - lam * lam) + 1
    return total


def strip_gauge_count(s: Strip, mode: str, n_schedule: Sequence[int], trajectory: Trajectory,
                      metric: WordMetric | None = None) -> StripAudit:
    """Count strip elements inside the gauge set of index |Z_n| for scheduled n.

    WordBall (drift != 0): strip must carry r_plus; counts are intervals
    from word-length bounds and are checked against 2(2k+1).
    ZeroDrift: full coset preimages, counted as lattice points inside the
    hyperbolic ball; checked against (2k^2+1) e^(k+2).
    EqualAbs: Euclidean disc count; checked against (2k+1)^2.
    """
    states = []
    for n in n_schedule:
        g = trajectory.checkpoint_at(n).state
        if g is None:
            raise ValueError("strip counting needs trajectories sampled with keep_states=True")
        states.append((n, g) + gauge_level(g, mode, metric))
    bounds = None
    if mode == "WordBall":
        if s.r_plus is None:
            raise ValueError("WordBall strip counting needs r_plus")
        bounds = _word_ball_bounds(s, max((st[3] for st in states), default=0), metric,
                                   max((st[2] for st in states), default=0))
    rows = []
    for n, g, k_lo, k_hi in states:
        if mode == "WordBall":
            c_lo = sum(1 for lo, hi in bounds if hi is not None and hi <= k_lo)
            c_hi = sum(1 for lo, hi in bounds if lo <= k_hi)
            bound = float((2 * k_hi + 1) * 2)
            ok = c_hi <= bound
        elif mode == "ZeroDrift":
            c_lo = c_hi = _zero_drift_count(s, k_hi)
            bound = (2 * k_hi * k_hi + 1) * math.exp(k_hi + 2)
            ok = c_hi == 0 or math.log(c_hi) <= math.log(2 * k_hi * k_hi + 1) + k_hi + 2
        elif mode == "EqualAbs":
            c_lo = c_hi = _equal_abs_count(s, k_hi)
            bound = float((2 * k_hi + 1) ** 2)
            ok = c_hi <= bound
        else:
            raise ValueError(f"unknown gauge mode {mode!r}")
        rows.append(StripAuditRow(n, k_lo, k_hi, c_lo, c_hi, bound, ok))
    return StripAudit(mode, dict(s.window), rows)


def strip_check(m: Measure, steps: int, seed: int, schedule: Sequence[int],
                end_steps: int | None = None, metric: WordMetric | None = None
                ) -> tuple[Strip, StripAudit]:
    """Build a strip from two independent long walks and audit a third walk against it.

    Stream 0 samples mu and gives xi_plus, stream 1 samples the reflected
    measure and gives xi_minus, stream 2 is the walk whose gauge levels are
    counted.  The horizontal anchor (nonzero drift) is the real limit
    estimate of whichever of the first two walks has negative drift.
    """
    group = m.group
    delta = drift(m)
    end_steps = max(4 * steps, 1000) if end_steps is None else end_steps
    plus = sample(m, end_steps, seed, 0, checkpoints=[0, end_steps],
                  keep_states=True, keep_increments=False)
    minus = sample(reflect(m), end_steps, seed, 1, checkpoints=[0, end_steps],
                   keep_states=True, keep_increments=False)
    r_plus = None
    if group.group_class is GroupClass.EQUALABS:
        mode = "EqualAbs"
    elif delta == 0:
        mode = "ZeroDrift"
    else:
        mode = "WordBall"
        if metric is None:
            raise ValueError("nonzero drift strip check needs a word metric")
        source = plus if delta < 0 else minus
        r_plus = source.checkpoints[-1].point.B
    strip = build_strip(group.p, group.q, TreeEnd(minus.final_state.edges),
                        TreeEnd(plus.final_state.edges), r_plus)
    walk = sample(m, steps, seed, 2, checkpoints=schedule, keep_states=True,
                  keep_increments=False)
    return strip, strip_gauge_count(strip, mode, schedule, walk, metric)
