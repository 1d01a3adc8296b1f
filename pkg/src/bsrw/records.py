"""Experiment configs, JSONL trajectory records and CSV series."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__
from .core import BSGroup
from .projections import HypPoint, PlanePoint, TreeEnd
from .walk import (
    Checkpoint,
    Measure,
    Trajectory,
    check_schedule,
    geometric_schedule,
    linear_schedule,
    measure_from_config,
)

SCHEMA = "bsrw.trajectory/1"


def frac_str(x: Fraction | int) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


@dataclass
class ExperimentConfig:
    p: int
    q: int
    support: list[dict] = field(default_factory=list)
    trajectories: int = 1
    steps: int = 0
    seed: int = 0
    checkpoints: dict = field(default_factory=lambda: {"kind": "geometric", "per_decade": 10})
    depth: int = 8
    output_dir: str | None = None
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.trajectories < 1:
            raise ValueError("trajectories must be >= 1")
        if self.steps < 0:
            raise ValueError("steps must be >= 0")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        self.schedule()

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))

    def logical(self) -> dict:
        """The config without where-to-write settings."""
        d = self.to_dict()
        d.pop("output_dir")
        return d

    def hash(self) -> str:
        """sha256 over the canonical JSON form (sorted keys, no whitespace)."""
        return canonical_hash(self.logical())

    def schedule(self) -> list[int]:
        plan = self.checkpoints
        kind = plan.get("kind", "geometric")
        if kind == "geometric":
            pts = geometric_schedule(self.steps, int(plan.get("per_decade", 10)))
        elif kind == "linear":
            pts = linear_schedule(self.steps, int(plan.get("step", max(1, self.steps // 10))))
        elif kind == "explicit":
            pts = [int(n) for n in plan["points"]]
        else:
            raise ValueError(f"unknown checkpoint schedule {kind!r}")
        return check_schedule(pts, self.steps)

    def measure(self, depth_cap: int = 4, warn: bool = True) -> Measure:
        return measure_from_config({"p": self.p, "q": self.q, "support": self.support},
                                   depth_cap, warn)


def canonical_hash(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def header(config: ExperimentConfig | dict, **extra) -> dict:
    """Header block; ``config`` may be a plain dict of command arguments."""
    h = {"schema": SCHEMA, "type": "header", "version": __version__}
    if isinstance(config, ExperimentConfig):
        h.update(config_hash=config.hash(), seed=config.seed, config=config.logical())
    else:
        h.update(config_hash=canonical_hash(config), seed=config.get("seed"), config=config)
    h.update(extra)
    return h


# ------------------------------------------------------------------ JSONL

def _point_fields(pt) -> dict:
    if isinstance(pt, PlanePoint):
        return {"x": pt.x, "y": pt.y, "sign": pt.sign}
    return {"A": frac_str(pt.A), "B": frac_str(pt.B), "sign": pt.sign}


def _point_from(rec: dict):
    if "x" in rec:
        return PlanePoint(int(rec["x"]), int(rec["y"]), int(rec["sign"]))
    return HypPoint(Fraction(rec["A"]), Fraction(rec["B"]), int(rec["sign"]))


def trajectory_records(t: Trajectory) -> Iterable[dict]:
    for c in t.checkpoints:
        rec = {"schema": SCHEMA, "type": "checkpoint", "traj": t.index, "n": c.n,
               "lambda": c.level, **_point_fields(c.point),
               "tree_prefix": str(c.tree_prefix), "tree_depth": c.tree_depth}
        if c.state is not None:
            rec["state"] = str(c.state)
        yield rec
    yield {
        "schema": SCHEMA, "type": "summary", "traj": t.index, "seed": t.seed,
        "steps": t.steps, "drift": frac_str(t.drift), "record_depth": t.record_depth,
        "stabilization": {str(d): v for d, v in sorted(t.stabilization.items())},
        "ladder": t.ladder, "final_prefix": str(t.final_prefix),
        "final_depth": t.final_depth, "tail_min_level": t.tail_min_level,
    }


def dumps_jsonl(records: Iterable[dict]) -> str:
    return "".join(json.dumps(r, sort_keys=True, separators=(",", ":")) + "\n" for r in records)


def write_trajectories(path: str | Path, config: ExperimentConfig | dict,
                       trajectories: Sequence[Trajectory], **extra) -> None:
    recs = [header(config, **extra)]
    for t in sorted(trajectories, key=lambda t: t.index):
        recs.extend(trajectory_records(t))
    Path(path).write_text(dumps_jsonl(recs))


def read_trajectories(path: str | Path, group: BSGroup | None = None
                      ) -> tuple[dict, list[Trajectory]]:
    """Rebuild trajectories (without dense tracks) from a JSONL file."""
    head = None
    cps: dict[int, list[Checkpoint]] = {}
    out = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        if rec.get("schema") != SCHEMA:
            raise ValueError(f"unsupported record schema {rec.get('schema')!r}")
        kind = rec["type"]
        if kind == "header":
            head = rec
            if group is None and "config" in rec:
                cfg = rec["config"]
                group = BSGroup.from_parameters(cfg["p"], cfg["q"])
        elif kind == "checkpoint":
            state = None
            if "state" in rec:
                if group is None:
                    raise ValueError("need the group to parse stored states")
                state = group.reduce(rec["state"])
            cps.setdefault(rec["traj"], []).append(Checkpoint(
                rec["n"], rec["lambda"], _point_from(rec),
                TreeEnd.parse(rec["tree_prefix"]), rec["tree_depth"], state))
        elif kind == "summary":
            out.append(Trajectory(
                index=rec["traj"], seed=rec["seed"], steps=rec["steps"],
                drift=Fraction(rec["drift"]), record_depth=rec["record_depth"],
                checkpoints=cps.pop(rec["traj"], []),
                stabilization={int(d): v for d, v in rec["stabilization"].items()},
                ladder=list(rec["ladder"]), final_prefix=TreeEnd.parse(rec["final_prefix"]),
                final_depth=rec["final_depth"], tail_min_level=rec["tail_min_level"]))
        else:
            raise ValueError(f"unknown record type {kind!r}")
    if head is None:
        raise ValueError("missing header record")
    return head, out


# -------------------------------------------------------------------- CSV

def csv_text(columns: Sequence[str], rows: Iterable[Sequence], meta: dict | None = None) -> str:
    """CSV with '#'-prefixed metadata lines, then a header row."""
    buf = io.StringIO()
    for key, val in (meta or {}).items():
        if key == "config":
            continue
        buf.write(f"# {key}={val}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def read_csv(text: str) -> tuple[dict, list[str], list[list[str]]]:
    meta, lines = {}, []
    for line in text.splitlines():
        if line.startswith("# "):
            k, _, v = line[2:].partition("=")
            meta[k] = v
        else:
            lines.append(line)
    rows = list(csv.reader(lines))
    return meta, rows[0], rows[1:]
