"""Experiment runner: solve a configured instance, record its trace, aggregate seeds."""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from .cfr import cfr_ira_solve, cfr_plus_solve
from .domains import build_domain
from .fpira import SolveResult, fp_solve, fpira_solve
from .trace import COLUMNS, WORD_COLUMNS, RunTrace, interpolate_at

ALGORITHMS = ("fp", "fpira", "cfr_plus", "cfr_ira")
WORKERS_ENV = "IRASOLVE_WORKERS"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    domain: str
    algorithm: str
    epsilon: float = 0.05
    k_b: int | None = None
    k_h: int | None = None
    delay: int = 100
    seed: int = 0
    max_iterations: int = 100_000
    check_every: int = 1
    out: str | None = None
    graph_file: str | None = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")
        if self.algorithm != "cfr_ira" and (self.k_b is not None or self.k_h is not None):
            raise ConfigError("k_b and k_h only apply to cfr_ira")
        if self.algorithm == "cfr_ira":
            object.__setattr__(self, "k_b", 10 if self.k_b is None else self.k_b)
            object.__setattr__(self, "k_h", 90 if self.k_h is None else self.k_h)
            if self.k_b < 0 or self.k_h < 0:
                raise ConfigError("k_b and k_h must be non-negative")
        if self.max_iterations < 0 or self.check_every < 1 or self.delay < 0:
            raise ConfigError("iteration budget, delay and check interval must be non-negative")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        names = {f for f in cls.__dataclass_fields__}
        extra = set(d) - names
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        return cls(**d)


@dataclass
class RunResult:
    config: ExperimentConfig
    trace: RunTrace
    converged: bool
    solve: SolveResult
    n_infosets: int

    @property
    def final_fraction(self) -> float:
        return self.trace.final.abstract_infoset_count / self.n_infosets


def run(config: ExperimentConfig) -> RunResult:
    game = build_domain(config.domain, config.graph_file)
    c = config
    if c.algorithm == "fp":
        res = fp_solve(game, c.epsilon, c.max_iterations)
    elif c.algorithm == "fpira":
        res = fpira_solve(game, c.epsilon, c.max_iterations)
    elif c.algorithm == "cfr_plus":
        res = cfr_plus_solve(game, c.epsilon, c.delay, c.max_iterations, c.check_every)
    else:
        res = cfr_ira_solve(game, c.epsilon, c.k_b, c.k_h, c.delay, c.max_iterations, c.seed, c.check_every)
    if c.out:
        Path(c.out).parent.mkdir(parents=True, exist_ok=True)
        res.trace.to_csv(c.out)
    return RunResult(c, res.trace, res.converged, res, game.n_infosets)


def word_count(result: RunResult | SolveResult) -> dict:
    """Last row's memory breakdown in 32-bit words, with its total."""
    trace = result.trace
    row = trace.final
    out = {c: int(getattr(row, c)) for c in WORD_COLUMNS}
    out["total"] = sum(out.values())
    return out


def aggregate(traces: list[RunTrace | RunResult], thresholds=None, columns=None) -> dict:
    """Mean and standard error of trace columns, aligned on exploitability.

    Accepts raw traces or :class:`RunResult` objects; results must share a
    config apart from seed and output path.

    ``thresholds`` defaults to a geometric grid between the largest initial
    and the smallest final exploitability; values between checkpoints are
    linearly interpolated.  Returns ``{"thresholds": [...], col: {"mean": [...], "stderr": [...]}}``.
    """
    if not traces:
        raise ValueError("nothing to aggregate")
    results = [t for t in traces if isinstance(t, RunResult)]
    if results:
        keys = {replace(r.config, seed=0, out=None) for r in results}
        if len(keys) > 1:
            raise ConfigError("cannot aggregate runs with different configs")
        traces = [t.trace if isinstance(t, RunResult) else t for t in traces]
    columns = [c for c in COLUMNS if c not in ("iteration", "exploitability_sum")] + ["iteration"] \
        if columns is None else list(columns)
    if thresholds is None:
        hi = max(t[0].exploitability_sum for t in traces)
        lo = max(min(t.column("exploitability_sum")) for t in traces)
        if hi <= 0 or lo <= 0 or lo >= hi:
            thresholds = [lo]
        else:
            thresholds = list(np.geomspace(hi, lo, 20))
    out: dict = {"thresholds": [float(x) for x in thresholds]}
    for col in columns:
        vals = np.array([interpolate_at(t, col, thresholds) for t in traces], dtype=float)
        n = len(traces)
        mean = vals.mean(axis=0)
        se = vals.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros(len(thresholds))
        out[col] = {"mean": mean.tolist(), "stderr": se.tolist()}
    return out


def _run_to_summary(cfg_dict: dict) -> dict:
    cfg = ExperimentConfig.from_dict(cfg_dict)
    r = run(cfg)
    return {"config": asdict(cfg), "converged": r.converged, "iterations": r.trace.final.iteration,
            "exploitability": r.trace.final.exploitability_sum, "infoset_fraction": r.final_fraction,
            "words": word_count(r), "out": cfg.out}


def expand_batch(spec: dict, base_dir: Path) -> list[dict]:
    """Turn a batch description into individual run configs.

    The batch holds a ``runs`` list; each entry may give ``seeds`` to fan
    out over.  ``out_dir`` (relative to the batch file) names the CSV
    directory.
    """
    out_dir = base_dir / spec.get("out_dir", "traces")
    runs = []
    for entry in spec.get("runs", []):
        entry = dict(entry)
        seeds = entry.pop("seeds", [entry.get("seed", 0)])
        for s in seeds:
            d = dict(entry, seed=s)
            if "out" not in d:
                tag = f"{d['domain']}_{d['algorithm']}_s{s}"
                if d["algorithm"] == "cfr_ira":
                    tag = f"{d['domain']}_cfr_ira_B{d.get('k_b', 10)}H{d.get('k_h', 90)}_s{s}"
                d["out"] = str(out_dir / f"{tag}.csv")
            runs.append(d)
    for d in runs:
        ExperimentConfig.from_dict(d)
    return runs


def run_batch(config_path: str | Path, workers: int | None = None) -> dict:
    path = Path(config_path)
    spec = json.loads(path.read_text())
    runs = expand_batch(spec, path.parent)
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            summaries = list(ex.map(_run_to_summary, runs))
    else:
        summaries = [_run_to_summary(r) for r in runs]
    index = {"batch": str(path), "runs": summaries}
    out_dir = path.parent / spec.get("out_dir", "traces")
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "index.json").write_text(json.dumps(index, indent=2))
    return index


def with_seed(config: ExperimentConfig, seed: int) -> ExperimentConfig:
    return replace(config, seed=seed)
