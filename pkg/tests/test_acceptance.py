"""Acceptance suite: one or more tests per numbered criterion.

The terminal summary prints one PASS/FAIL line per criterion together with
the measured quantities.
"""
import itertools
import math
import time
from math import comb

import numpy as np
import pytest
from scipy.sparse.linalg import cg

from superteach.core import EMPTY, Interval, TaskSpec, TrainingSet, risk_symmetric_difference
from superteach.datagen import (
    derive_seed,
    make_rng,
    sample_halfspace,
    sample_integer_grid,
    sample_interval_uniform,
    sample_linreg,
    sample_margin1d,
)
from superteach.harness import (
    ExperimentConfig,
    TeacherSpec,
    margin_tail_exact,
    margin_tail_mc,
    median_rate,
    run_trials,
    summarize,
    teach,
)
from superteach.learners import (
    learn_consistent_interval,
    learn_interval_mle,
    learn_logistic_erm,
    learn_ridge_erm,
    logistic_gradient,
    logistic_objective,
    squared_gradient,
    squared_objective,
)
from superteach.search import count_overlapping_pairs_exact, overlapping_pairs_bound
from superteach.teachers import Exhaustive, LocalSwap, teach_most_symmetric

GAUSS_N = (100, 316, 1000, 3162)
MARGIN_N = (64, 256, 1024, 4096)


def timed_rate(task, teacher, n_list, trials, which="risk_subset"):
    started = time.perf_counter()
    records = run_trials(ExperimentConfig(task, teacher, n_list, trials=trials, master_seed=0))
    elapsed = time.perf_counter() - started
    assert not any(r.error for r in records)
    return median_rate(records, which), elapsed


@pytest.mark.criterion(1)
def test_gauss_full_sample_rate(detail):
    fit, elapsed = timed_rate(TaskSpec.gauss1d(), TeacherSpec("identity"), GAUSS_N, 500, "risk_full")
    detail(f"slope {fit.slope:.3f}, {elapsed:.1f}s")
    assert abs(fit.slope + 0.5) <= 0.1
    assert elapsed < 10


@pytest.mark.criterion(2)
@pytest.mark.slow
@pytest.mark.parametrize("k, target, tol", [(1, -1.0, 0.2), (2, -2.0, 0.3)])
def test_gauss_k_subset_rates(k, target, tol, detail):
    fit, elapsed = timed_rate(TaskSpec.gauss1d(), TeacherSpec("bk", k=k), GAUSS_N, 500)
    detail(f"B{k} slope {fit.slope:.3f}, {elapsed:.1f}s")
    assert abs(fit.slope - target) <= tol
    assert elapsed < 300


@pytest.mark.criterion(3)
@pytest.mark.slow
def test_margin_rates(detail):
    full, t1 = timed_rate(TaskSpec.margin1d(), TeacherSpec("identity"), MARGIN_N, 500)
    bms, t2 = timed_rate(TaskSpec.margin1d(), TeacherSpec("bms"), MARGIN_N, 500)
    detail(f"full slope {full.slope:.3f}, B_ms slope {bms.slope:.3f}, {t1 + t2:.1f}s")
    assert abs(full.slope + 1.0) <= 0.15
    assert abs(bms.slope + 2.0) <= 0.3
    assert t1 + t2 < 120


@pytest.mark.criterion(4)
def test_margin_tail_grid(detail):
    started = time.perf_counter()
    eps_grid = [0.1, 0.3, 0.5, 0.7, 1.0]
    worst = 0.0
    failures = []
    trials = 1_000_000
    for n in (1, 2, 3, 5, 10, 50):
        estimates = margin_tail_mc(n, eps_grid, trials, derive_seed(4, n))
        for eps, est in zip(eps_grid, estimates):
            exact = margin_tail_exact(n, eps)
            # a zero observed count has zero estimated SE; judge it by the exact-probability SE
            se = max(est.stderr, math.sqrt(exact * (1 - exact) / trials))
            z = abs(est.estimate - exact) / se if se > 0 else (0.0 if est.estimate == exact else math.inf)
            worst = max(worst, z)
            if z > 4:
                failures.append((n, eps, exact, est.estimate))
    elapsed = time.perf_counter() - started
    detail(f"worst deviation {worst:.2f} SE, {elapsed:.1f}s")
    assert not failures, failures
    assert elapsed < 60


def brute_overlap(n, k):
    sets = [frozenset(c) for c in itertools.combinations(range(n), k)]
    return sum(1 for a in sets for b in sets if 1 <= len(a & b) <= k - 1)


@pytest.mark.criterion(5)
def test_overlapping_pairs(detail):
    started = time.perf_counter()
    checked = 0
    for n in range(2, 13):
        for k in range(1, 5):
            if 2 * k > n:
                continue
            exact = count_overlapping_pairs_exact(n, k)
            assert exact == brute_overlap(n, k), (n, k)
            if n >= 4 * k:
                assert exact <= overlapping_pairs_bound(n, k), (n, k)
            checked += 1
    elapsed = time.perf_counter() - started
    detail(f"{checked} (n, k) cells, {elapsed:.1f}s")
    assert elapsed < 10


def all_masks(n):
    ints = np.arange(1, 1 << n)
    return ((ints[:, None] >> np.arange(n)) & 1).astype(bool)


def large_margin_risk_all(x, y, masks):
    """|A_lm(T)| for every nonempty mask, by direct scan of the masked points."""
    neg = np.where(masks & (y < 0), x, -np.inf).max(axis=1)
    pos = np.where(masks & (y > 0), x, np.inf).min(axis=1)
    theta = np.where(np.isinf(pos), 1.0, np.where(np.isinf(neg), -1.0, (neg + pos) / 2))
    return np.abs(theta)


@pytest.mark.criterion(6)
def test_most_symmetric_is_optimal(detail):
    started = time.perf_counter()
    rng = make_rng(6)
    for i in range(200):
        n = int(rng.integers(1, 13))
        S = sample_margin1d(n, derive_seed(6, i))
        best = large_margin_risk_all(S.X[:, 0], S.y, all_masks(n)).min()
        assert teach_most_symmetric(S, 0.0).risk_subset <= best, i
    elapsed = time.perf_counter() - started
    detail(f"200 sets, {elapsed:.1f}s")
    assert elapsed < 30


@pytest.mark.criterion(7)
@pytest.mark.slow
@pytest.mark.parametrize("task", [TaskSpec.halfspace(2), TaskSpec.linreg(2)], ids=["logistic", "ridge"])
def test_exhaustive_ratio_at_n16(task, detail):
    started = time.perf_counter()
    records = run_trials(ExperimentConfig(task, TeacherSpec("search", strategy=Exhaustive()), (16,), trials=10))
    elapsed = time.perf_counter() - started
    assert not any(r.error for r in records)
    ratios = [r.ratio for r in records]
    med = summarize(records)[0]
    detail(f"{task.task.value} median ratio {med.median_ratio:.2e}, max {max(ratios):.2e}, "
           f"|B(S)|/n {med.median_subset_fraction:.2f}, {elapsed:.0f}s")
    assert med.median_ratio <= 0.05
    assert all(r <= 1 for r in ratios)
    assert elapsed < 600


@pytest.mark.criterion(8)
@pytest.mark.slow
@pytest.mark.parametrize("make", [TaskSpec.halfspace, TaskSpec.linreg], ids=["logistic", "ridge"])
def test_local_search_trend_in_d(make, detail):
    started = time.perf_counter()
    medians = []
    for d in (2, 8, 32):
        records = run_trials(ExperimentConfig(make(d), TeacherSpec("search", strategy=LocalSwap()), (32,),
                                              trials=10))
        assert not any(r.error for r in records)
        medians.append(summarize(records)[0].median_ratio)
    elapsed = time.perf_counter() - started
    detail(f"{make(2).task.value} medians " + ", ".join(f"{m:.2e}" for m in medians) + f", {elapsed:.0f}s")
    assert medians[0] < medians[1] < medians[2] < 1
    assert elapsed < 600


def random_target(rng, lo=0, hi=20):
    a, b = sorted(int(v) for v in rng.integers(lo, hi + 1, size=2))
    return Interval(a, b)


def beating_subsets(S, learn, risk):
    """Subsets T (empty included when the learner accepts it) with risk(T) < risk(S)."""
    full = risk(learn(S))
    found = []
    for r in range(S.n):
        for idx in itertools.combinations(range(S.n), r):
            try:
                theta = learn(S.subset(list(idx)))
            except ValueError:
                continue
            if risk(theta) < full:
                found.append(idx)
    return found


@pytest.mark.criterion(9)
def test_interval_mle_not_super_teachable(detail):
    rng = make_rng(9)
    for i in range(100):
        n = int(rng.integers(1, 11))
        star = float(rng.uniform(0.5, 2.0))
        S = sample_interval_uniform(n, star, derive_seed(9, i))
        assert not beating_subsets(S, learn_interval_mle, lambda t: abs(t - star)), i


@pytest.mark.criterion(9)
@pytest.mark.parametrize("mode", ["least", "greatest"])
def test_consistent_interval_not_super_teachable(mode, detail):
    rng = make_rng(90)
    offenders = []
    for i in range(100):
        n = int(rng.integers(1, 11))
        target = random_target(rng)
        S = sample_integer_grid(n, target, (0, 20), derive_seed(90, i))
        beats = beating_subsets(S, lambda T: learn_consistent_interval(T, mode, 0, 20),
                                lambda t: risk_symmetric_difference(t, target, 0, 20))
        if beats:
            offenders.append((i, target, beats[0]))
    detail(f"{mode}: {len(offenders)}/100 sets have a strictly better subset")
    assert not offenders, offenders[:3]


@pytest.mark.criterion(10)
def test_logistic_kkt_on_returned_solutions(detail):
    worst = 0.0
    for i in range(100):
        rng = make_rng(derive_seed(10, i))
        d = int(rng.integers(1, 9))
        n = int(rng.integers(0, 40))
        S = sample_halfspace(max(n, 1), d, None, derive_seed(11, i)).subset(list(range(n)))
        report = learn_logistic_erm(S, 0.1)
        worst = max(worst, report.kkt_residual_norm)
        g = logistic_gradient(report.theta_hat, S.X, S.y, 0.1)
        assert np.linalg.norm(g) <= 1e-8
    # the subset chosen by exhaustive search also carries a verified residual
    S = sample_halfspace(12, 2, None, 3)
    result = teach(TaskSpec.halfspace(2), TeacherSpec("search", strategy=Exhaustive()), S)
    assert result.kkt_residual <= 1e-8
    detail(f"max logistic residual {max(worst, result.kkt_residual):.1e}")


@pytest.mark.criterion(10)
def test_ridge_matches_iterative_solver(detail):
    worst = 0.0
    for i in range(100):
        rng = make_rng(derive_seed(12, i))
        d = int(rng.integers(1, 9))
        n = int(rng.integers(1, 30))
        S = sample_linreg(n, d, None, 0.1, derive_seed(13, i))
        A = 0.1 * np.eye(d) + 2 * S.X.T @ S.X
        b = 2 * S.X.T @ S.y
        # conjugate gradient on the stationarity system of the same objective
        iterative, info = cg(A, b, rtol=1e-15, atol=0.0, maxiter=10 * d)
        assert info == 0
        gap = np.max(np.abs(learn_ridge_erm(S, 0.1).theta_hat - iterative))
        worst = max(worst, gap)
        assert gap <= 1e-8
    detail(f"max ridge gap {worst:.1e}")


@pytest.mark.criterion(10)
def test_gradients_against_finite_differences(detail):
    worst = 0.0
    for i in range(100):
        rng = make_rng(derive_seed(14, i))
        d = int(rng.integers(1, 9))
        n = int(rng.integers(1, 30))
        X = rng.standard_normal((n, d))
        y_cls = np.where(rng.random(n) < 0.5, 1.0, -1.0)
        y_reg = rng.standard_normal(n)
        theta = rng.standard_normal(d)
        for obj, grad, y in ((logistic_objective, logistic_gradient, y_cls),
                             (squared_objective, squared_gradient, y_reg)):
            h = 1e-6
            fd = np.array([(obj(theta + h * e, X, y, 0.1) - obj(theta - h * e, X, y, 0.1)) / (2 * h)
                           for e in np.eye(d)])
            g = grad(theta, X, y, 0.1)
            rel = np.linalg.norm(g - fd) / max(np.linalg.norm(g), 1e-12)
            worst = max(worst, rel)
            assert rel <= 1e-5
    detail(f"max relative gradient error {worst:.1e}")
