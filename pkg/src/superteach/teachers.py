"""Teachers: pick a subset of the training set for a known learner and target.

* :func:`teach_optimal_k_subset` - best subset of a fixed size.
* :func:`teach_most_symmetric` - the opposite-label pair whose midpoint is
  closest to the target threshold (1-D large-margin learner).
* :func:`teach_subset_search` - ERM learners; the outer binary problem is
  searched exhaustively or heuristically and every candidate mask gets an
  exact inner solve.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from math import comb
from typing import Callable, Optional, Union

import numpy as np

from .core import Hypothesis, SubsetMask, TrainingSet, risk_param_distance
from .learners import Learner, LearnerKind, learn_large_margin_1d
from .search import (
    EXHAUSTIVE_CAP,
    BudgetExceededError,
    MaskEvaluator,
    combination_blocks,
    exhaustive_min,
    fixed_k_min,
    greedy_forward_min,
    local_swap_min,
)

RiskFn = Callable[[Hypothesis, Hypothesis], float]

DEFAULT_BUDGET = 10 ** 7


@dataclass(frozen=True)
class Exhaustive:
    cap: int = EXHAUSTIVE_CAP


@dataclass(frozen=True)
class FixedK:
    k: int


@dataclass(frozen=True)
class GreedyForward:
    pass


@dataclass(frozen=True)
class LocalSwap:
    max_iters: Optional[int] = None
    restarts: int = 5
    seed: int = 0


SearchStrategy = Union[Exhaustive, FixedK, GreedyForward, LocalSwap]


@dataclass(frozen=True)
class TeachingResult:
    """Outcome of one teaching call.

    ``risk_subset`` and ``theta_subset`` are recomputed from the selected
    items after the search. ``ratio`` is ``None`` when the full-set risk is
    zero. ``proper`` tells whether the selection left anything out.
    """

    mask: SubsetMask
    theta_subset: Hypothesis
    theta_full: Hypothesis
    risk_subset: float
    risk_full: float
    ratio: Optional[float]
    evaluations: int
    wall_time: float
    search_value: Optional[float] = None
    kkt_residual: Optional[float] = None

    @property
    def indices(self) -> np.ndarray:
        return self.mask.indices

    @property
    def proper(self) -> bool:
        return self.mask.is_proper

    @property
    def subset_fraction(self) -> float:
        return self.mask.size / self.mask.n if self.mask.n else 0.0


def _finish(S: TrainingSet, bits: np.ndarray, learner: Learner, risk: RiskFn, theta_star,
            evaluations: int, started: float, search_value=None, theta_full=None) -> TeachingResult:
    mask = SubsetMask(bits)
    chosen = S.subset(mask)
    kkt = None
    if learner.is_erm:
        report = learner.solve(chosen)
        theta_subset, kkt = report.theta_hat, report.kkt_residual_norm
    else:
        theta_subset = learner.fit(chosen)
    if theta_full is None:
        theta_full = learner.fit(S)
    risk_subset = risk(theta_subset, theta_star)
    risk_full = risk(theta_full, theta_star)
    ratio = risk_subset / risk_full if risk_full > 0 else None
    return TeachingResult(mask, theta_subset, theta_full, risk_subset, risk_full, ratio,
                          evaluations, time.perf_counter() - started, search_value, kkt)


def teach_identity(S: TrainingSet, learner: Learner, risk: RiskFn, theta_star) -> TeachingResult:
    """The no-teaching baseline ``B(S) = S``."""
    started = time.perf_counter()
    theta_full = learner.fit(S)
    return _finish(S, np.ones(S.n, dtype=bool), learner, risk, theta_star, 1, started, theta_full=theta_full)


def _risk_evaluator(S: TrainingSet, learner: Learner, risk: RiskFn, theta_star) -> MaskEvaluator:
    def one(mask):
        return risk(learner.fit(S.subset(mask)), theta_star)

    many = None
    if learner.is_erm:
        def many(masks):
            return [risk(theta, theta_star) for theta in learner.fit_many(S, masks)]
    return MaskEvaluator(one, many)


def _gauss_mean_k_subset(x: np.ndarray, k: int, theta_star: float):
    """Exact ``argmin |mean(x_T) - theta*|`` over ``|T| = k``, lexicographic ties."""
    n = x.size
    if k == 1:
        values = np.abs(x - theta_star)
        i = int(np.argmin(values))
        return [i], float(values[i])
    if k == 2:
        best_value, best = np.inf, None
        target = 2.0 * theta_star
        cols = np.arange(n)
        for a in range(0, n - 1, 512):
            rows = np.arange(a, min(n - 1, a + 512))
            values = np.abs(x[rows, None] + x[None, :] - target) / 2.0
            values[cols[None, :] <= rows[:, None]] = np.inf
            flat = int(np.argmin(values))
            v = float(values.flat[flat])
            if v < best_value:
                best_value, best = v, [int(rows[flat // n]), flat % n]
        return best, best_value
    best_value, best = np.inf, None
    for combos in combination_blocks(n, k):
        values = np.abs(x[combos].mean(axis=1) - theta_star)
        j = int(np.argmin(values))
        if values[j] < best_value:
            best_value, best = float(values[j]), combos[j].tolist()
    return best, best_value


def teach_optimal_k_subset(S: TrainingSet, k: int, learner: Learner, risk: RiskFn, theta_star,
                           max_evaluations: int = DEFAULT_BUDGET) -> TeachingResult:
    """Best size-``k`` subset by exhaustive enumeration of all ``C(n, k)`` choices."""
    n = S.n
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    total = comb(n, k)
    if total > max_evaluations:
        raise BudgetExceededError(
            f"C({n},{k}) = {total} subsets exceeds the budget of {max_evaluations}; "
            "use a smaller k or a sampling/local search strategy")
    started = time.perf_counter()
    if learner.kind is LearnerKind.GAUSS_MEAN and risk is risk_param_distance:
        idx, value = _gauss_mean_k_subset(S.X[:, 0], k, float(theta_star))
        bits = np.zeros(n, dtype=bool)
        bits[idx] = True
        return _finish(S, bits, learner, risk, theta_star, total, started, value)
    ev = _risk_evaluator(S, learner, risk, theta_star)
    bits, value = fixed_k_min(n, k, ev, max_evaluations)
    return _finish(S, bits, learner, risk, theta_star, ev.calls, started, value)


def teach_most_symmetric(S: TrainingSet, theta_star: float = 0.0) -> TeachingResult:
    """Opposite-label pair with midpoint closest to ``theta_star``.

    Falls back to the first item when one of the classes is missing. Among
    equally symmetric pairs the smallest index pair wins.
    """
    if S.n == 0:
        raise ValueError("most-symmetric teacher needs a nonempty set")
    if S.d != 1:
        raise ValueError("most-symmetric teacher needs one-dimensional data")
    S.check_binary_labels()
    started = time.perf_counter()
    x = S.X[:, 0]
    neg = np.flatnonzero(S.y < 0)
    pos = np.flatnonzero(S.y > 0)
    bits = np.zeros(S.n, dtype=bool)
    evaluations = 1
    value = None
    if neg.size and pos.size:
        evaluations = neg.size * pos.size
        best_value, ties = np.inf, []
        xp = x[pos]
        for a in range(0, neg.size, 1024):
            rows = neg[a:a + 1024]
            values = np.abs((x[rows, None] + xp[None, :]) / 2.0 - theta_star)
            v = float(values.min())
            if v > best_value:
                continue
            r, c = np.nonzero(values == v)
            pairs = [tuple(sorted((int(rows[i]), int(pos[j])))) for i, j in zip(r, c)]
            if v < best_value:
                best_value, ties = v, pairs
            else:
                ties.extend(pairs)
        bits[list(min(ties))] = True
        value = best_value
    else:
        bits[0] = True
    learner = Learner(LearnerKind.LARGE_MARGIN_1D)
    return _finish(S, bits, learner, risk_param_distance, float(theta_star), evaluations, started, value,
                   theta_full=learn_large_margin_1d(S))


def teach_subset_search(S: TrainingSet, learner: Learner, risk: RiskFn, theta_star,
                        strategy: SearchStrategy = Exhaustive()) -> TeachingResult:
    """Subset selection for an ERM learner via search over binary masks.

    Every candidate mask is scored by solving the regularized inner problem
    exactly and evaluating the teacher's risk at its solution; the returned
    hypothesis carries its stationarity residual in ``kkt_residual``.
    """
    if not learner.is_erm:
        raise ValueError("subset search needs an ERM learner (logistic or ridge)")
    started = time.perf_counter()
    n = S.n
    ev = _risk_evaluator(S, learner, risk, theta_star)
    if isinstance(strategy, Exhaustive):
        bits, value = exhaustive_min(n, ev, cap=strategy.cap)
    elif isinstance(strategy, FixedK):
        if not 1 <= strategy.k <= n:
            raise ValueError("FixedK needs 1 <= k <= n")
        bits, value = fixed_k_min(n, strategy.k, ev)
    elif isinstance(strategy, GreedyForward):
        bits, value = greedy_forward_min(n, ev)
    elif isinstance(strategy, LocalSwap):
        bits, value = local_swap_min(n, ev, max_iters=strategy.max_iters,
                                     restarts=strategy.restarts, seed=strategy.seed)
    else:
        raise TypeError(f"unknown search strategy {strategy!r}")
    return _finish(S, bits, learner, risk, theta_star, ev.calls, started, value)
