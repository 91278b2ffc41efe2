"""Experiment configuration files (YAML)."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from .dataset import Schema, SchemaError, SplitSpec, load_schema, schema_from_dict
from .hdtsp import DEFAULT_SUBSET_BUDGET, DP_MAX_VARS, MODES
from .scoring import METRICS

SOLVERS = ("dp", "kopt2", "kopt3", "lkh-external")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Task:
    name: str
    target: str
    evidence: tuple[str, ...]
    threshold: float = 0.5


@dataclass(frozen=True)
class RunConfig:
    name: str
    schema: Schema
    data: tuple[Path, ...]
    out: Path
    split: SplitSpec
    metric: str = "k2"
    max_parents: int = 3
    solver: str = "kopt3"
    oracle_mode: str = "greedy"
    subset_budget: int = DEFAULT_SUBSET_BUDGET
    restarts: int = 10
    seed: int = 0
    max_no_improve: int | None = None
    paper_phi_convention: bool = False
    lkh_path: Path | None = None
    alpha: float = 1.0
    tasks: tuple[Task, ...] = field(default_factory=tuple)

    def with_overrides(self, **kw) -> "RunConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        if "out" in kw:
            kw["out"] = Path(kw["out"])
        if "lkh_path" in kw:
            kw["lkh_path"] = Path(kw["lkh_path"])
        if "data" in kw:
            kw["data"] = (Path(kw["data"]),)
        cfg = replace(self, **kw)
        cfg.validate()
        return cfg

    def validate(self):
        if self.solver not in SOLVERS:
            raise ConfigError(f"unknown solver {self.solver!r}; expected one of {SOLVERS}")
        if self.solver == "dp" and len(self.schema.variables) > DP_MAX_VARS:
            raise ConfigError(f"solver 'dp' supports at most {DP_MAX_VARS} variables")
        if self.metric not in METRICS:
            raise ConfigError(f"unknown metric {self.metric!r}; expected one of {METRICS}")
        if self.oracle_mode not in MODES:
            raise ConfigError(f"unknown oracle_mode {self.oracle_mode!r}; expected one of {MODES}")
        if self.max_parents < 0:
            raise ConfigError("max_parents must be non-negative")
        names = set(self.schema.names)
        for t in self.tasks:
            unknown = [v for v in (t.target, *t.evidence) if v not in names]
            if unknown:
                raise ConfigError(f"task {t.name!r} references unknown variables {unknown}")


def _resolve(base: Path, p) -> Path:
    p = Path(p)
    return p if p.is_absolute() else (base / p)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    base = path.parent
    try:
        schema_ref = doc["schema"]
        schema = (schema_from_dict(schema_ref) if isinstance(schema_ref, dict)
                  else load_schema(_resolve(base, schema_ref)))
        data = doc["data"]
        data = tuple(_resolve(base, d) for d in (data if isinstance(data, list) else [data]))
        learn = doc.get("learn", {})
        split = doc.get("split", {})
        lkh = learn.get("lkh_path")
        cfg = RunConfig(
            name=str(doc.get("name", path.stem)),
            schema=schema,
            data=data,
            out=_resolve(base, doc.get("out", f"runs/{path.stem}")),
            split=SplitSpec(int(split.get("test_count", 1000)), int(split.get("seed", 0)),
                            split.get("method", "tail")),
            metric=learn.get("metric", "k2"),
            max_parents=int(learn.get("max_parents", 3)),
            solver=learn.get("solver", "kopt3"),
            oracle_mode=learn.get("oracle_mode", "greedy"),
            subset_budget=int(learn.get("subset_budget", DEFAULT_SUBSET_BUDGET)),
            restarts=int(learn.get("restarts", 10)),
            seed=int(learn.get("seed", 0)),
            max_no_improve=learn.get("max_no_improve"),
            paper_phi_convention=bool(learn.get("paper_phi_convention", False)),
            lkh_path=None if lkh is None else _resolve(base, lkh),
            alpha=float(doc.get("alpha", 1.0)),
            tasks=tuple(Task(str(t.get("name", t["target"])), t["target"], tuple(t.get("evidence", ())),
                             float(t.get("threshold", 0.5)))
                        for t in doc.get("tasks", ())),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, (ConfigError, SchemaError)):
            raise
        raise ConfigError(f"{path}: malformed config ({exc!r})") from exc
    cfg.validate()
    return cfg
