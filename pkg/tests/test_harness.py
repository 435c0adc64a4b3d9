import math

import numpy as np
import pytest

from superteach.core import TaskSpec
from superteach.harness import (
    ExperimentConfig,
    TeacherSpec,
    TrialRecord,
    check_bracket,
    fit_rate,
    lower_median,
    margin_tail_exact,
    margin_tail_mc,
    full_sample_bracket,
    run_trials,
    summarize,
    tail_check,
    k_subset_bracket,
)
from superteach.teachers import LocalSwap

IDENTITY = TeacherSpec("identity")
B1 = TeacherSpec("bk", k=1)


def record(n, ratio, trial=0):
    risk = 0.0 if ratio is None else ratio
    return TrialRecord("gauss1d", "bk1", n, 1, trial, 0, 0.0 if ratio is None else 1.0, risk, ratio, 1, 0.0)


class TestConfig:
    def test_validation(self):
        task = TaskSpec.gauss1d()
        with pytest.raises(ValueError):
            ExperimentConfig(task, IDENTITY, ())
        with pytest.raises(ValueError):
            ExperimentConfig(task, IDENTITY, (10, 10))
        with pytest.raises(ValueError):
            ExperimentConfig(task, IDENTITY, (10,), trials=0)
        with pytest.raises(ValueError):
            TeacherSpec("bk")
        with pytest.raises(ValueError):
            TeacherSpec("search")


class TestRunTrials:
    def test_identity_ratio_one(self):
        recs = run_trials(ExperimentConfig(TaskSpec.gauss1d(), IDENTITY, (5, 20), trials=10))
        assert len(recs) == 20
        assert all(r.ratio == 1.0 for r in recs)

    def test_b1_fraction(self):
        recs = run_trials(ExperimentConfig(TaskSpec.gauss1d(), B1, (8, 40), trials=10))
        assert all(r.subset_fraction == 1 / r.n for r in recs)

    def test_reproducible_and_sorted(self):
        cfg = ExperimentConfig(TaskSpec.linreg(2), TeacherSpec("search", strategy=LocalSwap()), (6, 9), trials=3,
                               master_seed=5)
        a, b = run_trials(cfg), run_trials(cfg)
        strip = lambda rs: [(r.n, r.trial_index, r.seed, r.risk_subset, r.ratio) for r in rs]
        assert strip(a) == strip(b)
        assert [(r.n, r.trial_index) for r in a] == sorted((r.n, r.trial_index) for r in a)
        assert len({r.seed for r in a}) == len(a)

    def test_parallel_matches_sequential(self):
        cfg = ExperimentConfig(TaskSpec.gauss1d(), B1, (10, 30), trials=4, master_seed=2)
        strip = lambda rs: [(r.n, r.trial_index, r.seed, r.risk_subset) for r in rs]
        assert strip(run_trials(cfg, jobs=2)) == strip(run_trials(cfg))

    def test_errors_recorded(self):
        # B_3 on a 2-item sample cannot run; the batch records it and continues
        recs = run_trials(ExperimentConfig(TaskSpec.gauss1d(), TeacherSpec("bk", k=3), (2, 5), trials=2))
        assert [bool(r.error) for r in recs] == [True, True, False, False]
        s = summarize(recs)
        assert s[0].failures == 2 and s[0].median_ratio is None
        assert s[1].count == 2


class TestMedians:
    def test_odd_and_even(self):
        assert lower_median([0.3, 0.1, 0.2]) == 0.2
        assert lower_median([0.1, 0.3]) == 0.1
        assert lower_median([]) is None

    def test_single_record(self):
        (s,) = summarize([record(10, 0.4)])
        assert s.key == 10 and s.median_ratio == 0.4 and s.count == 1

    def test_missing_ratio_excluded(self):
        (s,) = summarize([record(10, None), record(10, 0.2, 1)])
        assert s.median_ratio == 0.2


class TestFitRate:
    def test_power_laws(self):
        ns = [100, 200, 400]
        assert fit_rate([(n, 3.0 / n ** 2) for n in ns]).slope == pytest.approx(-2.0, abs=1e-12)
        assert fit_rate([(n, 7.0) for n in ns]).slope == pytest.approx(0.0, abs=1e-12)
        fit = fit_rate([(n, 1 / math.sqrt(n)) for n in ns])
        assert fit.slope == pytest.approx(-0.5, abs=1e-12) and fit.r_squared == pytest.approx(1.0)

    def test_needs_points_and_positivity(self):
        with pytest.raises(ValueError):
            fit_rate([(1, 1.0), (2, 2.0)])
        with pytest.raises(ValueError):
            fit_rate([(1, 1.0), (2, 0.0), (3, 1.0)])


class TestTail:
    def test_exact_values(self):
        assert margin_tail_exact(2, 0.5) == 0.5
        assert margin_tail_exact(3, 0.7) == 0.25
        assert margin_tail_exact(17, 1.0) == 0.0
        # the two branches meet at eps = 1/2 only for n = 2; elsewhere the left branch is larger
        assert margin_tail_exact(2, 0.5 + 1e-12) == 0.5

    def test_validation(self):
        with pytest.raises(ValueError):
            margin_tail_exact(0, 0.5)
        with pytest.raises(ValueError):
            margin_tail_exact(3, 1.5)
        with pytest.raises(ValueError):
            margin_tail_exact(3, 0.0)

    def test_mc_n2(self):
        est = margin_tail_mc(2, 0.5, 1_000_000, 0)
        assert abs(est.estimate - 0.5) <= 3 * est.stderr

    def test_mc_degenerate(self):
        assert margin_tail_mc(4, 1.0, 10_000, 1).estimate == 0.0
        assert margin_tail_mc(1, 0.9, 10_000, 1).estimate == 1.0

    def test_mc_vector_eps(self):
        ests = margin_tail_mc(3, [0.1, 0.7], 200_000, 2)
        assert len(ests) == 2
        assert ests[0].estimate > ests[1].estimate

    def test_tail_check(self):
        out = tail_check(3, 0.7, 1_000_000, 4)
        assert out["exact"] == 0.25 and out["pass"]


class TestBrackets:
    def test_bracket_formulas(self):
        assert full_sample_bracket(100, 0.25) == pytest.approx((100 ** -0.75, 100 ** -0.25))
        lo, hi = k_subset_bracket(16, 4, 1.0)
        assert lo == pytest.approx(0.5 * 0.25 ** 5) and hi == pytest.approx(0.5 * 0.25 ** 3)

    def test_full_sample_coverage_matches_exact(self):
        # coverage is P(n^-eps < |Z| < n^eps) for a standard normal Z
        n, eps, trials = 10_000, 0.25, 500
        exact = math.erf(n ** eps / math.sqrt(2)) - math.erf(n ** -eps / math.sqrt(2))
        assert exact == pytest.approx(0.9203, abs=1e-4)
        cov = check_bracket(IDENTITY, n, eps, trials, 0)
        assert abs(cov - exact) <= 4 * math.sqrt(exact * (1 - exact) / trials)

    @pytest.mark.xfail(strict=True, reason="exact coverage at n=1e4, eps=0.25 is 0.920, below 0.95")
    def test_full_sample_coverage_stated_threshold(self):
        assert check_bracket(IDENTITY, 10_000, 0.25, 500, 0) >= 0.95

    def test_k_subset_coverage(self):
        assert check_bracket(B1, 10_000, 0.5, 500, 0) >= 0.9

    def test_vacuous_bracket(self):
        assert check_bracket(IDENTITY, 100, 50.0, 50, 0) == 1.0

    def test_bad_eps(self):
        with pytest.raises(ValueError):
            check_bracket(B1, 100, 1.0, 10, 0)
        with pytest.raises(ValueError):
            check_bracket(TeacherSpec("bms"), 100, 0.5, 10, 0)
