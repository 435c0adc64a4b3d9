"""
Learners that resist teaching
=============================

The interval MLE (the sample maximum) and the least consistent interval
only ever shrink when items are removed, so no subset beats the full
sample. The greatest consistent interval grows when negatives are
removed, which also cannot help, except that a subset without any
positive item yields the empty hypothesis. When the target is short
relative to the domain, the empty hypothesis can beat the full sample.
"""

import itertools

from superteach.core import EMPTY, Interval, TrainingSet, risk_symmetric_difference
from superteach.learners import learn_consistent_interval

target = Interval(9, 10)
S = TrainingSet([[2.0], [9.0], [10.0]], [-1.0, 1.0, 1.0])


def risk(h):
    return risk_symmetric_difference(h, target, 0, 20)


for mode in ("least", "greatest"):
    full = learn_consistent_interval(S, mode, 0, 20)
    print(f"{mode}: full sample {full} risk {risk(full):.3f}")
    for r in range(S.n):
        for idx in itertools.combinations(range(S.n), r):
            h = learn_consistent_interval(S.subset(list(idx)), mode, 0, 20)
            if risk(h) < risk(full):
                print(f"   subset {idx} gives {h} with risk {risk(h):.3f}")
print("empty hypothesis risk", risk(EMPTY))
