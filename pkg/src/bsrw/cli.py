"""Command-line front end.

Exit codes: 0 success (warnings go to stderr), 2 bad configuration or
input, 3 a search/depth cap was hit.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from fractions import Fraction
from pathlib import Path

from . import __version__
from .boundary import (
    hitting_histogram,
    hyp_limit,
    ladder_tail,
    speed_profile,
    strip_check,
    tree_convergence,
)
from .core import BSGroup, GroupClass, classify
from .errors import (
    CapExceeded,
    DegenerateStrip,
    DepthTooDeep,
    DuplicateSupport,
    InsufficientSamples,
    MembershipError,
    OracleUnresolved,
    PresentationMismatch,
    TruncationError,
    WeightSumError,
    WrongClass,
    WrongDrift,
    ZeroParameter,
)
from .geometry import (
    MetricConstants,
    PlanePath,
    ball,
    bilipschitz_audit,
    cayley_transform,
    d_hyp,
    point_of,
)
from .projections import HypPoint, format_path
from .records import (
    ExperimentConfig,
    csv_text,
    frac_str,
    header,
    read_trajectories,
    write_trajectories,
)
from .walk import drift, entropy, moment, sample_levels, sample_many
from .wordmetric import DEFAULT_BFS_CAP, witness_string, word_metric

CONFIG_ERRORS = (ZeroParameter, WeightSumError, DuplicateSupport, WrongDrift, WrongClass,
                 DegenerateStrip, PresentationMismatch, MembershipError, ValueError, KeyError,
                 TypeError, json.JSONDecodeError, FileNotFoundError)
CAP_ERRORS = (CapExceeded, OracleUnresolved, TruncationError, DepthTooDeep, InsufficientSamples)

SIM_COMMANDS = ("simulate", "stats", "converge-tree", "converge-hyp", "speed", "ladder",
                "hitting", "strip-check")


class ConfigError(Exception):
    pass


# ------------------------------------------------------------ plumbing

def _load_config(args) -> ExperimentConfig:
    data: dict = {}
    if args.config:
        data = json.loads(Path(args.config).read_text())
    overrides = {"p": args.p, "q": args.q, "seed": args.seed, "trajectories": args.trajectories,
                 "steps": args.steps, "depth": args.depth, "output_dir": args.out}
    for key, val in overrides.items():
        if val is not None:
            data[key] = val
    if args.bfs_cap is not None:
        data.setdefault("options", {})["bfs_cap"] = args.bfs_cap
    if "p" not in data or "q" not in data:
        raise ConfigError("need --p and --q (or a config file)")
    if not data.get("support"):
        data["support"] = [{"word": w, "prob": "1/4"} for w in ("a", "A", "b", "B")]
    return ExperimentConfig.from_dict(data)


def _group(args) -> BSGroup:
    if args.p is None or args.q is None:
        if args.config:
            cfg = json.loads(Path(args.config).read_text())
            return BSGroup.from_parameters(int(cfg["p"]), int(cfg["q"]))
        raise ConfigError("need --p and --q")
    return BSGroup.from_parameters(args.p, args.q)


def _translate(args, word: str):
    return classify(args.p, args.q).translate(word)


def _out_dir(cfg_or_args) -> Path | None:
    out = getattr(cfg_or_args, "output_dir", None) or getattr(cfg_or_args, "out", None)
    if out is None:
        return None
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _emit(text: str, out: Path | None, name: str) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        (out / name).write_text(text)


def _bfs_cap(cfg: ExperimentConfig) -> int:
    return int(cfg.options.get("bfs_cap", DEFAULT_BFS_CAP))


def emit_plotdata(report, out: Path | None, name: str, meta: dict) -> None:
    """Write the plottable series of a diagnostics report as CSV."""
    _emit(csv_text(report.columns, report.curve, meta), out, name)


def _trajectories(cfg: ExperimentConfig, args, **kwargs):
    if args.from_jsonl:
        measure = cfg.measure(warn=False)
        _, trajs = read_trajectories(args.from_jsonl, measure.group)
        return trajs
    measure = cfg.measure(warn=False)
    return sample_many(measure, cfg.trajectories, cfg.steps, cfg.seed,
                       checkpoints=cfg.schedule(), record_depth=cfg.depth,
                       workers=int(cfg.options.get("workers", 1)), **kwargs)


def _summary(cfg, meta, body, out: Path | None, name: str) -> None:
    text = json.dumps({"header": meta, **body}, indent=2, sort_keys=True, default=str) + "\n"
    _emit(text, out, name)


# ------------------------------------------------------------ commands

def cmd_classify(args):
    pres = classify(args.p, args.q)
    np_, nq = pres.normalized
    print(f"{pres.group_class.value} normalized p={np_} q={nq}")


def cmd_reduce(args):
    g = _group(args)
    print(g.reduce(_translate(args, args.word)))


def cmd_mul(args):
    g = _group(args)
    print(g.reduce(_translate(args, args.word)) * g.reduce(_translate(args, args.word2)))


def cmd_inv(args):
    g = _group(args)
    print(~g.reduce(_translate(args, args.word)))


def cmd_ball(args):
    group = _group(args)
    b = ball(group, args.radius, cap=args.bfs_cap if args.bfs_cap is not None else 12)
    meta = header({"command": "ball", "p": group.p, "q": group.q, "radius": args.radius})
    _emit(csv_text(("radius", "count"), b.rows(), meta), _out_dir(args), "ball.csv")


def cmd_metrics(args):
    group = _group(args)
    g = group.reduce(_translate(args, args.word))
    cap = args.bfs_cap if args.bfs_cap is not None else DEFAULT_BFS_CAP
    bound = word_metric(group, cap).length(g)
    consts = MetricConstants.for_group(group.p, group.q)
    info = {
        "normal_form": str(g),
        "level": g.level,
        "tree_vertex": format_path(g.edges) or "B",
        "tree_distance": g.syllable_count,
        "word_length": {"lower": bound.lower, "upper": bound.upper, "exact": bound.exact},
        "witness": witness_string(g),
        "constants": {"ell_a": consts.ell_a, "ell_b": consts.ell_b, "c": consts.c},
    }
    pt = point_of(g)
    if isinstance(pt, HypPoint):
        info["hyp_point"] = str(pt)
        info["d_hyp_from_i"] = d_hyp(HypPoint(Fraction(1), Fraction(0)), pt)
        info["disc"] = list(cayley_transform(pt))
    else:
        info["plane_point"] = {"x": pt.x, "y": pt.y, "sign": pt.sign}
    print(json.dumps(info, indent=2))


def cmd_simulate(args, cfg: ExperimentConfig):
    trajs = _trajectories(cfg, args, keep_states=bool(cfg.options.get("keep_states", False)))
    out = _out_dir(cfg)
    text_path = (out or Path(".")) / "trajectories.jsonl"
    write_trajectories(text_path, cfg, trajs)


def cmd_stats(args, cfg: ExperimentConfig):
    m = cfg.measure(warn=False)
    body = {
        "drift": frac_str(drift(m)),
        "entropy_bits": entropy(m),
        "generation_certificate": m.generation_certificate,
        "generation_depths": dict(m.generation_depths),
        "moments": {},
    }
    for k in (1, 2):
        row = {}
        for func in ("word_length", "ln_A", "ln_one_plus_absB"):
            if func != "word_length" and m.group.p == abs(m.group.q):
                continue
            row[func] = moment(m, k, func, _bfs_cap(cfg))
        body["moments"][str(k)] = row
    _summary(cfg, header(cfg), body, _out_dir(cfg), "stats.json")


def cmd_converge_tree(args, cfg):
    rep = tree_convergence(_trajectories(cfg, args), min(3, cfg.depth)
                           if cfg.options.get("tree_depth") is None
                           else int(cfg.options["tree_depth"]))
    meta = header(cfg)
    out = _out_dir(cfg)
    emit_plotdata(rep, out, "tree_convergence.csv", meta)
    _summary(cfg, meta, {"aggregate": rep.aggregate}, out, "tree_convergence.json")


def cmd_converge_hyp(args, cfg):
    m = cfg.measure(warn=False)
    if drift(m) == 0:
        raise WrongDrift("converge-hyp needs nonzero drift; use speed")
    if m.group.group_class not in (GroupClass.POSPOS, GroupClass.POSNEG):
        raise WrongClass("converge-hyp needs a hyperbolic projection")
    rep = hyp_limit(_trajectories(cfg, args))
    meta = header(cfg)
    out = _out_dir(cfg)
    if rep.mode == "HypToReal":
        cols = ("traj", "r_estimate", "residual")
        rows = [(o["traj"], o["r_estimate"], o["residual"]) for o in rep.outcomes]
    else:
        cols = ("traj", "level_T", "log_A_T", "min_tail_level")
        rows = [(o["traj"], o["level_T"], o["log_A_T"], o["min_tail_level"])
                for o in rep.outcomes]
    _emit(csv_text(cols, rows, meta), out, "hyp_limit.csv")
    _summary(cfg, meta, {"mode": rep.mode, "aggregate": rep.aggregate}, out, "hyp_limit.json")


def cmd_speed(args, cfg):
    rep = speed_profile(_trajectories(cfg, args))
    meta = header(cfg)
    emit_plotdata(rep, _out_dir(cfg), "speed.csv", meta)


def cmd_ladder(args, cfg):
    m = cfg.measure(warn=False)
    lv = sample_levels(m, cfg.trajectories, cfg.steps, cfg.seed)
    rep = ladder_tail(lv, min_samples=int(cfg.options.get("min_samples", 10_000)))
    meta = header(cfg)
    out = _out_dir(cfg)
    _emit(csv_text(("k", "survival"), rep.survival, meta), out, "ladder.csv")
    _summary(cfg, meta, {"observations": rep.observations, "slope": rep.slope,
                         "intercept": rep.intercept, "collapsed_at": rep.collapsed_at},
             out, "ladder.json")


def cmd_hitting(args, cfg):
    trajs = _trajectories(cfg, args)
    depth = int(cfg.options.get("hitting_depth", min(4, cfg.depth)))
    m = cfg.measure(warn=False)
    hist = hitting_histogram([t.final_prefix for t in trajs], depth, m.group)
    meta = header(cfg)
    out = _out_dir(cfg)
    _emit(csv_text(("depth", "cell", "mass"), hist.rows(), meta), out, "hitting.csv")
    _summary(cfg, meta, {
        "sample_size": hist.sample_size,
        "max_mass_by_depth": {d: float(v) for d, v in hist.max_mass_by_depth.items()},
        "zero_cells_depth1": hist.zero_cells_depth1}, out, "hitting.json")


def cmd_strip_check(args, cfg):
    m = cfg.measure(warn=False)
    group = m.group
    needs_metric = group.group_class is not GroupClass.EQUALABS and drift(m) != 0
    metric = word_metric(group, _bfs_cap(cfg)) if needs_metric else None
    end_steps = cfg.options.get("end_steps")
    _, audit = strip_check(m, cfg.steps, cfg.seed, cfg.schedule(),
                           None if end_steps is None else int(end_steps), metric)
    mode = audit.mode
    meta = header(cfg, mode=mode, **{f"window_{k}": v for k, v in audit.window.items()})
    out = _out_dir(cfg)
    rows = [(r.n, r.count_lo, r.count_hi, r.log_over_n) for r in audit.rows]
    _emit(csv_text(("n", "count_lo", "count_hi", "log_over_n"), rows, meta), out, "strip.csv")
    _summary(cfg, meta, {"violations": audit.violations,
                         "rows": [r.__dict__ for r in audit.rows]}, out, "strip.json")
    if audit.violations:
        print(f"warning: {audit.violations} bound violations", file=sys.stderr)


def cmd_bilipschitz(args):
    group = _group(args)
    radius = args.radius
    v = PlanePath.straight(group.p, group.q, 3 * radius + 1)
    rep = bilipschitz_audit(v, radius)
    meta = header({"command": "bilipschitz", "p": group.p, "q": group.q, "radius": radius},
                  violations=rep.violations, max_reverse_ratio=rep.max_reverse_ratio)
    _emit(csv_text(("pair_id", "d_plane", "d_hyp", "ratio"), rep.rows, meta),
          _out_dir(args), "bilipschitz.csv")
    print(f"pairs={rep.pairs} violations={rep.violations} "
          f"max_reverse_ratio={rep.max_reverse_ratio:.6f}", file=sys.stderr)


SIMPLE = {"classify": cmd_classify, "reduce": cmd_reduce, "mul": cmd_mul, "inv": cmd_inv,
          "ball": cmd_ball, "metrics": cmd_metrics, "bilipschitz": cmd_bilipschitz}
WITH_CONFIG = {"simulate": cmd_simulate, "stats": cmd_stats, "converge-tree": cmd_converge_tree,
               "converge-hyp": cmd_converge_hyp, "speed": cmd_speed, "ladder": cmd_ladder,
               "hitting": cmd_hitting, "strip-check": cmd_strip_check}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int)
    common.add_argument("--q", type=int)
    common.add_argument("--config", help="experiment config JSON")
    common.add_argument("--seed", type=int)
    common.add_argument("--trajectories", type=int)
    common.add_argument("--steps", type=int)
    common.add_argument("--depth", type=int)
    common.add_argument("--out", help="output directory (stdout when omitted)")
    common.add_argument("--bfs-cap", type=int, dest="bfs_cap")

    parser = argparse.ArgumentParser(prog="bsrw", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in list(SIMPLE) + list(WITH_CONFIG):
        sp = sub.add_parser(name, parents=[common])
        if name in ("reduce", "mul", "inv", "metrics"):
            sp.add_argument("--word", required=True)
        if name == "mul":
            sp.add_argument("--word2", required=True)
        if name in ("ball", "bilipschitz"):
            sp.add_argument("--radius", type=int, default=3)
        if name in WITH_CONFIG and name not in ("simulate", "stats", "ladder", "strip-check"):
            sp.add_argument("--from-jsonl", dest="from_jsonl",
                            help="read trajectories from a simulate output instead of sampling")
        else:
            sp.set_defaults(from_jsonl=None)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            if args.command in SIMPLE:
                SIMPLE[args.command](args)
            else:
                cfg = _load_config(args)
                cfg.measure(warn=True)
                WITH_CONFIG[args.command](args, cfg)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        return 0
    except CAP_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except (ConfigError,) + CONFIG_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
