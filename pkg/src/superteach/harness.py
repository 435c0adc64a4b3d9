"""Monte Carlo driver for teaching experiments and rate checks."""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .core import Task, TaskSpec, TrainingSet
from .datagen import derive_seed, make_rng, sample_gauss1d, sample_task
from .learners import Learner, large_margin_1d_batch
from .teachers import (
    SearchStrategy,
    TeachingResult,
    teach_identity,
    teach_most_symmetric,
    teach_optimal_k_subset,
    teach_subset_search,
)

TEACHER_KINDS = ("identity", "bk", "bms", "search")


@dataclass(frozen=True)
class TeacherSpec:
    kind: str = "identity"
    k: Optional[int] = None
    strategy: Optional[SearchStrategy] = None

    def __post_init__(self):
        if self.kind not in TEACHER_KINDS:
            raise ValueError(f"unknown teacher {self.kind!r}; choose from {TEACHER_KINDS}")
        if self.kind == "bk" and (self.k is None or self.k < 1):
            raise ValueError("the k-subset teacher needs k >= 1")
        if self.kind == "search" and self.strategy is None:
            raise ValueError("the search teacher needs a strategy")

    @property
    def label(self) -> str:
        if self.kind == "bk":
            return f"bk{self.k}"
        if self.kind == "search":
            return f"search-{type(self.strategy).__name__.lower()}"
        return self.kind


@dataclass(frozen=True)
class ExperimentConfig:
    task: TaskSpec
    teacher: TeacherSpec
    n_list: Tuple[int, ...]
    trials: int = 10
    master_seed: int = 0
    max_evaluations: int = 10 ** 7

    def __post_init__(self):
        n_list = tuple(int(n) for n in self.n_list)
        if not n_list:
            raise ValueError("n_list must be nonempty")
        if any(b <= a for a, b in zip(n_list, n_list[1:])):
            raise ValueError("n_list must be strictly increasing")
        if n_list[0] < 1:
            raise ValueError("sample sizes must be positive")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        object.__setattr__(self, "n_list", n_list)


@dataclass(frozen=True)
class TrialRecord:
    task: str
    teacher: str
    n: int
    d: int
    trial_index: int
    seed: int
    risk_full: float
    risk_subset: float
    ratio: Optional[float]
    subset_size: int
    wall_time: float
    error: str = ""

    @property
    def subset_fraction(self) -> float:
        return self.subset_size / self.n


@dataclass(frozen=True)
class Summary:
    key: int
    median_ratio: Optional[float]
    median_subset_fraction: Optional[float]
    median_wall_time: Optional[float]
    median_risk_full: Optional[float]
    median_risk_subset: Optional[float]
    count: int
    failures: int = 0


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float


def teach(task: TaskSpec, teacher: TeacherSpec, S: TrainingSet,
          max_evaluations: int = 10 ** 7) -> TeachingResult:
    """Run ``teacher`` on ``S`` with the learner and risk that ``task`` implies."""
    learner = Learner.for_task(task)
    risk = task.risk_fn
    if teacher.kind == "identity":
        return teach_identity(S, learner, risk, task.theta_star)
    if teacher.kind == "bk":
        return teach_optimal_k_subset(S, teacher.k, learner, risk, task.theta_star, max_evaluations)
    if teacher.kind == "bms":
        if task.task is not Task.MARGIN_1D:
            raise ValueError("the most-symmetric teacher applies to the margin1d task")
        return teach_most_symmetric(S, task.theta_star)
    return teach_subset_search(S, learner, risk, task.theta_star, teacher.strategy)


def run_trial(config: ExperimentConfig, n: int, trial_index: int) -> TrialRecord:
    seed = derive_seed(config.master_seed, n, trial_index)
    task = config.task
    started = time.perf_counter()
    try:
        S = sample_task(task, n, seed)
        result = teach(task, config.teacher, S, config.max_evaluations)
    except Exception as exc:  # recorded per trial; the batch keeps going
        return TrialRecord(task.task.value, config.teacher.label, n, task.d, trial_index, seed,
                           math.nan, math.nan, None, 0, time.perf_counter() - started,
                           f"{type(exc).__name__}: {exc}")
    return TrialRecord(task.task.value, config.teacher.label, n, task.d, trial_index, seed,
                       result.risk_full, result.risk_subset, result.ratio, result.mask.size,
                       result.wall_time)


def _run_trial_args(args):
    return run_trial(*args)


def run_trials(config: ExperimentConfig, jobs: int = 1) -> List[TrialRecord]:
    """All ``trials x len(n_list)`` trials, sorted by ``(n, trial_index)``.

    With ``jobs > 1`` trials run in worker processes; the output is the same
    as a sequential run because every trial owns a derived seed.
    """
    work = [(config, n, t) for n in config.n_list for t in range(config.trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_trial_args, work, chunksize=max(1, len(work) // (4 * jobs))))
    else:
        records = [run_trial(*w) for w in work]
    return sorted(records, key=lambda r: (r.n, r.trial_index))


def lower_median(values: Iterable[float]) -> Optional[float]:
    """Median; for an even count the lower of the two middle values."""
    vals = sorted(values)
    if not vals:
        return None
    return vals[(len(vals) - 1) // 2]


def summarize(records: Sequence[TrialRecord], by: str = "n") -> List[Summary]:
    """Per-``n`` (or per-``d``) medians over trials.

    Failed trials and missing ratios (zero full-set risk) are left out of
    the medians; ``failures`` counts the former.
    """
    if by not in ("n", "d"):
        raise ValueError("group by 'n' or 'd'")
    groups: Dict[int, List[TrialRecord]] = {}
    for r in records:
        groups.setdefault(getattr(r, by), []).append(r)
    out = []
    for key in sorted(groups):
        rows = groups[key]
        ok = [r for r in rows if not r.error]
        out.append(Summary(
            key=key,
            median_ratio=lower_median(r.ratio for r in ok if r.ratio is not None),
            median_subset_fraction=lower_median(r.subset_fraction for r in ok),
            median_wall_time=lower_median(r.wall_time for r in ok),
            median_risk_full=lower_median(r.risk_full for r in ok),
            median_risk_subset=lower_median(r.risk_subset for r in ok),
            count=len(ok),
            failures=len(rows) - len(ok),
        ))
    return out


def fit_rate(points: Sequence[Tuple[float, float]]) -> RateFit:
    """Least-squares line through ``(log n, log value)``."""
    if len(points) < 3:
        raise ValueError("need at least 3 points to fit a rate")
    n = np.array([p[0] for p in points], dtype=float)
    v = np.array([p[1] for p in points], dtype=float)
    if np.any(v <= 0) or np.any(n <= 0):
        raise ValueError("rate fitting needs positive values")
    lx, ly = np.log(n), np.log(v)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return RateFit(float(slope), float(intercept), r2)


def median_rate(records: Sequence[TrialRecord], which: str = "risk_subset") -> RateFit:
    """Slope of the per-``n`` median of ``risk_full`` or ``risk_subset``."""
    attr = {"risk_subset": "median_risk_subset", "risk_full": "median_risk_full"}[which]
    return fit_rate([(s.key, getattr(s, attr)) for s in summarize(records)])


def margin_tail_exact(n: int, eps: float) -> float:
    """``P(R > eps)`` for the 1-D large-margin learner on ``n`` uniform points."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    if eps == 1:
        return 0.0
    if eps <= 0.5:
        return (1.0 - eps) ** n + eps ** n
    return 0.5 ** (n - 1)


@dataclass(frozen=True)
class TailEstimate:
    estimate: float
    stderr: float


def margin_tail_mc(n: int, eps, trials: int, seed: int, chunk: int = 100_000) -> Union[TailEstimate, List[TailEstimate]]:
    """Monte Carlo ``P(R > eps)`` from raw noiseless samples.

    ``eps`` may be a scalar or a sequence; one batch of samples serves all
    thresholds.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    scalar = np.ndim(eps) == 0
    eps_arr = np.atleast_1d(np.asarray(eps, dtype=float))
    rng = make_rng(seed)
    hits = np.zeros(eps_arr.size, dtype=np.int64)
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        x = 2.0 * rng.random((m, n)) - 1.0
        risk = np.abs(large_margin_1d_batch(x))
        hits += (risk[:, None] > eps_arr[None, :]).sum(axis=0)
        done += m
    p = hits / trials
    out = [TailEstimate(float(pi), float(math.sqrt(pi * (1.0 - pi) / trials))) for pi in p]
    return out[0] if scalar else out


def tail_check(n: int, eps: float, trials: int, seed: int, sigmas: float = 4.0) -> dict:
    """Exact tail vs Monte Carlo.

    Passes when they differ by at most ``sigmas`` binomial standard errors;
    the larger of the estimated and the exact-probability standard error is
    used so that a rare event with zero observed hits is not judged by a
    zero standard error.
    """
    exact = margin_tail_exact(n, eps)
    mc = margin_tail_mc(n, eps, trials, seed)
    se = max(mc.stderr, math.sqrt(exact * (1.0 - exact) / trials))
    ok = abs(mc.estimate - exact) <= sigmas * se
    return {"n": n, "eps": eps, "exact": exact, "estimate": mc.estimate, "stderr": mc.stderr, "pass": bool(ok)}


def full_sample_bracket(n: int, eps: float) -> Tuple[float, float]:
    return n ** (-0.5 - eps), n ** (-0.5 + eps)


def k_subset_bracket(n: int, k: int, eps: float) -> Tuple[float, float]:
    scale = 1.0 / math.sqrt(k)
    return scale * (k / n) ** (k + eps), scale * (k / n) ** (k - eps)


def check_bracket(teacher: TeacherSpec, n: int, eps: float, trials: int, seed: int,
                  theta_star: float = 0.0) -> float:
    """Fraction of Gaussian-mean trials whose risk falls strictly inside the bracket.

    The identity teacher is checked against ``n^(-1/2 -+ eps)``; the
    k-subset teacher against ``k^(-1/2) (k/n)^(k +- eps)``.
    """
    if teacher.kind == "identity":
        if not eps > 0:
            raise ValueError("eps must be positive")
        lo, hi = full_sample_bracket(n, eps)
    elif teacher.kind == "bk":
        if not 0 < eps < teacher.k:
            raise ValueError("eps must lie in (0, k)")
        lo, hi = k_subset_bracket(n, teacher.k, eps)
    else:
        raise ValueError("brackets exist for the identity and k-subset teachers only")
    task = TaskSpec.gauss1d(theta_star)
    inside = 0
    for t in range(trials):
        S = sample_gauss1d(n, theta_star, derive_seed(seed, n, t))
        r = teach(task, teacher, S).risk_subset
        inside += lo < r < hi
    return inside / trials
