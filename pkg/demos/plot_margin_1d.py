"""
Teaching a one-dimensional threshold
====================================

Points are uniform on [-1, 1] and labeled by their sign. The large-margin
learner puts its threshold halfway between the innermost negative and
positive item. Handing it only the most symmetric opposite-label pair
turns a 1/n risk into a 1/n^2 risk.
"""

import numpy as np

from superteach.core import TaskSpec
from superteach.datagen import sample_margin1d
from superteach.harness import ExperimentConfig, TeacherSpec, median_rate, run_trials
from superteach.teachers import teach_most_symmetric

###############################################################################
# One sample, one teaching set.

S = sample_margin1d(12, seed=3)
result = teach_most_symmetric(S, theta_star=0.0)
print("sample x:", np.round(S.X[:, 0], 3))
print("chosen:", result.indices, "threshold", round(result.theta_subset, 4),
      "vs full", round(result.theta_full, 4))

###############################################################################
# Rates over n.

task = TaskSpec.margin1d()
for teacher in (TeacherSpec("identity"), TeacherSpec("bms")):
    records = run_trials(ExperimentConfig(task, teacher, (64, 256, 1024), trials=200))
    print(f"{teacher.label:8s} slope {median_rate(records).slope:+.2f}")
