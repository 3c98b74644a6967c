"""Monte-Carlo harness: per-trial dispatch, experiment runs, CSV/JSONL records, scaling fits.

Trial t at side n uses seed ``mix_seed(master_seed, n, t)``, so the set of
records depends only on the configuration, never on execution order.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass
from typing import Iterable, Optional

import numpy as np

from .axial import axial_greedy
from .bdts import RetryPolicy, bdts
from .bilinear import bilinear_restarts
from .errors import DegenerateFit, Exhausted
from .matching import min_cost_matching
from .model import mix_seed, sample_tensor

log = logging.getLogger(__name__)

ALGORITHMS = ("planar-bdts", "axial-greedy", "bilinear", "matching")
MODES = ("distributional", "fixed")
CSV_COLUMNS = ("algo", "n", "k", "seed", "trial", "cost", "cost_upper", "runtime_ms", "escalations")


@dataclass(frozen=True)
class ExperimentConfig:
    algo: str
    n_values: tuple
    trials: int = 1
    master_seed: int = 0
    k: Optional[int] = None
    mode: str = "distributional"
    retries: int = 8
    jobs: int = 1
    # wall time breaks byte-identical reruns, so it is opt-in
    record_timing: bool = False

    def __post_init__(self):
        if self.algo not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algo!r}; choose from {', '.join(ALGORITHMS)}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        ns = tuple(int(n) for n in self.n_values)
        if not ns or any(n < 1 for n in ns):
            raise ValueError("n values must be positive")
        object.__setattr__(self, "n_values", tuple(sorted(set(ns))))
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.retries < 0 or self.jobs < 1:
            raise ValueError("retries must be >= 0 and jobs >= 1")
        if self.algo == "planar-bdts" and self.k is None:
            object.__setattr__(self, "k", 1)


@dataclass(frozen=True)
class ExperimentRecord:
    algo: str
    n: int
    k: Optional[int]
    seed: int
    trial: int
    cost: float  # nan when the run was exhausted
    cost_upper: Optional[float] = None  # distributional upper-bound accounting (BDTS only)
    runtime_ms: Optional[float] = None
    escalations: int = 0

    @property
    def failed(self) -> bool:
        return math.isnan(self.cost)


def run_one(algo: str, n: int, seed: int, k: Optional[int] = None, mode: str = "distributional",
            retries: int = 8, trial: int = 0, record_timing: bool = False) -> ExperimentRecord:
    """Run one trial; an exhausted BDTS run yields cost nan instead of raising."""
    t0 = time.perf_counter()
    upper, esc = None, 0
    if algo == "planar-bdts":
        inp = (n, seed) if mode == "distributional" else sample_tensor(n, 3, seed)
        try:
            _, rep = bdts(inp, k=k or 1, mode=mode, policy=RetryPolicy(max_escalations=retries))
            cost, upper, esc = rep.cost, rep.cost_upper, rep.escalations
        except Exhausted as e:
            cost, upper, esc = math.nan, math.nan, e.escalations
    elif algo == "axial-greedy":
        cost = axial_greedy(sample_tensor(n, 3, seed))[1].total
    elif algo == "bilinear":
        cost = bilinear_restarts(sample_tensor(n, 3, seed), seed=seed).final.Z
    elif algo == "matching":
        cost = min_cost_matching(sample_tensor(n, 2, seed).array).cost
    else:
        raise ValueError(f"unknown algorithm {algo!r}")
    ms = (time.perf_counter() - t0) * 1e3 if record_timing else None
    return ExperimentRecord(algo, n, k if algo == "planar-bdts" else None, seed, trial,
                            float(cost), upper, ms, esc)


def trial_seeds(config: ExperimentConfig):
    for n in config.n_values:
        for t in range(config.trials):
            yield n, t, mix_seed(config.master_seed, n, t)


def _task(args):
    return run_one(*args)


def run_trials(config: ExperimentConfig, on_record=None) -> list[ExperimentRecord]:
    """One record per (n, trial), sorted by (n, trial).

    ``on_record`` is called with each record as it completes (completion order).
    """
    tasks = [(config.algo, n, s, config.k, config.mode, config.retries, t, config.record_timing)
             for n, t, s in trial_seeds(config)]
    out = []
    if config.jobs == 1:
        for task in tasks:
            rec = _task(task)
            out.append(rec)
            if on_record:
                on_record(rec)
    else:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            futs = [pool.submit(_task, task) for task in tasks]
            for f in as_completed(futs):
                rec = f.result()
                out.append(rec)
                if on_record:
                    on_record(rec)
    out.sort(key=lambda r: (r.n, r.trial))
    return out


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def records_to_csv(records: Iterable[ExperimentRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def records_to_jsonl(records: Iterable[ExperimentRecord]) -> str:
    # json writes nan as NaN, which Python's json reads back
    return "".join(json.dumps(asdict(r)) + "\n" for r in records)


def _parse(name, text):
    if text == "":
        return None
    if name == "algo":
        return text
    if name in ("n", "k", "seed", "trial", "escalations"):
        return int(text)
    return float(text)


def records_from_csv(text: str) -> list[ExperimentRecord]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_COLUMNS:
        raise ValueError("missing or unexpected CSV header")
    return [ExperimentRecord(**{c: _parse(c, v) for c, v in zip(CSV_COLUMNS, row)}) for row in rows[1:]]


def records_from_jsonl(text: str) -> list[ExperimentRecord]:
    return [ExperimentRecord(**json.loads(line)) for line in text.splitlines() if line.strip()]


def mean_costs(records: Iterable[ExperimentRecord], field: str = "cost") -> dict:
    """Mean of ``field`` per n over the runs that did not fail."""
    by_n = {}
    for r in records:
        v = getattr(r, field)
        if v is not None and not math.isnan(v):
            by_n.setdefault(r.n, []).append(v)
    return {n: float(np.mean(v)) for n, v in sorted(by_n.items())}


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    residual: float  # root mean square of the log-space residuals


def fit_scaling(means) -> ScalingFit:
    """Least-squares fit of log(mean cost) against log(n).

    Parameters
    ----------
    means : mapping n -> mean cost, or an iterable of ExperimentRecord
    """
    if not isinstance(means, dict):
        means = mean_costs(means)
    if len(means) < 3:
        raise DegenerateFit(f"need at least 3 distinct n values, got {len(means)}")
    ns = np.array(sorted(means), dtype=np.float64)
    ys = np.array([means[n] for n in sorted(means)], dtype=np.float64)
    if np.any(ys <= 0):
        raise DegenerateFit("mean costs must be positive for a log-log fit")
    X = np.column_stack([np.log(ns), np.ones_like(ns)])
    coef, *_ = np.linalg.lstsq(X, np.log(ys), rcond=None)
    res = np.log(ys) - X @ coef
    return ScalingFit(float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(res**2))))
