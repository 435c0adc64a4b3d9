"""
Tail of the large-margin risk and overlapping subsets
=====================================================

The risk of the large-margin learner on n uniform points has a closed
form tail. A Monte Carlo run agrees with it to within a few binomial
standard errors. The second part counts pairs of k-subsets that share
some but not all items, the quantity that controls the variance of the
optimal k-subset teacher.
"""

from superteach.harness import tail_check
from superteach.search import count_overlapping_pairs_exact, overlapping_pairs_bound

for n in (1, 2, 5, 20):
    for eps in (0.1, 0.5, 0.8):
        r = tail_check(n, eps, trials=200_000, seed=n)
        print(f"n={n:2d} eps={eps}: exact {r['exact']:.5f}  MC {r['estimate']:.5f} +- {r['stderr']:.1e}")

###############################################################################

for n, k in ((8, 2), (12, 3), (40, 4)):
    print(f"n={n} k={k}: {count_overlapping_pairs_exact(n, k)} overlapping pairs, "
          f"bound {overlapping_pairs_bound(n, k)}")
