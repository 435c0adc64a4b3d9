"""
Teaching the mean of a Gaussian
===============================

The learner averages its training items. A teacher who knows the true
mean keeps only the k items whose average lands closest to it. With k=1
the risk shrinks like 1/n instead of 1/sqrt(n); with k=2 like 1/n^2.
"""

from superteach.core import TaskSpec
from superteach.harness import ExperimentConfig, TeacherSpec, median_rate, run_trials, summarize

task = TaskSpec.gauss1d(theta_star=0.0)
n_list = (100, 316, 1000)

###############################################################################
# Median risk for the full sample and the two smallest teaching sets.

for teacher in (TeacherSpec("identity"), TeacherSpec("bk", k=1), TeacherSpec("bk", k=2)):
    records = run_trials(ExperimentConfig(task, teacher, n_list, trials=100, master_seed=1))
    fit = median_rate(records, "risk_subset")
    meds = [s.median_risk_subset for s in summarize(records)]
    print(f"{teacher.label:9s} median risk {', '.join(f'{m:.2e}' for m in meds)}  slope {fit.slope:+.2f}")
