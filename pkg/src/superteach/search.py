"""Combinatorial engines over binary subset masks.

Every engine minimizes an outer objective ``mask -> value`` and breaks ties
by the lexicographically smallest selected-index tuple, so results never
depend on evaluation order. Masks are boolean arrays of length ``n``.
"""
from __future__ import annotations

import itertools
from math import comb
from typing import Callable, Iterator, Optional, Tuple

import numpy as np

from .datagen import make_rng

EXHAUSTIVE_CAP = 22


class BudgetExceededError(ValueError):
    pass


class MaskEvaluator:
    """Wraps a pure ``mask -> value`` function and counts evaluations.

    ``many`` (optional) scores a whole ``(m, n)`` stack of masks at once;
    engines use it when present.
    """

    def __init__(self, fn: Callable[[np.ndarray], float],
                 many: Optional[Callable[[np.ndarray], np.ndarray]] = None):
        self._fn = fn
        self._many = many
        self.calls = 0

    def __call__(self, mask: np.ndarray) -> float:
        self.calls += 1
        return float(self._fn(np.asarray(mask, dtype=bool)))

    def many(self, masks: np.ndarray) -> np.ndarray:
        masks = np.asarray(masks, dtype=bool)
        self.calls += masks.shape[0]
        if self._many is not None:
            return np.asarray(self._many(masks), dtype=float)
        return np.array([float(self._fn(m)) for m in masks])


def as_evaluator(evaluate) -> MaskEvaluator:
    return evaluate if isinstance(evaluate, MaskEvaluator) else MaskEvaluator(evaluate)


def _key(mask: np.ndarray) -> tuple:
    return tuple(np.flatnonzero(mask).tolist())


def _better(value: float, mask: np.ndarray, best_value: float, best_mask: Optional[np.ndarray]) -> bool:
    if best_mask is None or value < best_value:
        return True
    return value == best_value and _key(mask) < _key(best_mask)


def iterate_subsets_fixed_k(n: int, k: int) -> Iterator[Tuple[int, ...]]:
    """All ``k``-subsets of ``range(n)`` as increasing tuples, in lexicographic order."""
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    return itertools.combinations(range(n), k)


def mask_block(start: int, stop: int, n: int) -> np.ndarray:
    """Masks for the integers ``start..stop-1``; bit ``i`` selects item ``i``."""
    ints = np.arange(start, stop, dtype=np.int64)
    return ((ints[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(bool)


def exhaustive_min(n: int, evaluate, cap: int = EXHAUSTIVE_CAP, block: int = 1 << 14) -> Tuple[np.ndarray, float]:
    """Global minimizer over all ``2**n`` masks (the empty mask included)."""
    if n > cap:
        raise BudgetExceededError(
            f"exhaustive search over 2^{n} masks exceeds the cap n <= {cap}; "
            "use greedy or local-swap search instead")
    ev = as_evaluator(evaluate)
    best_value, best_mask = np.inf, None
    total = 1 << n
    for start in range(0, total, block):
        masks = mask_block(start, min(total, start + block), n)
        values = ev.many(masks)
        vmin = values.min()
        if vmin > best_value:
            continue
        tied = masks[values == vmin]
        cand = min(tied, key=_key)
        if _better(float(vmin), cand, best_value, best_mask):
            best_value, best_mask = float(vmin), cand
    return best_mask.copy(), ev(best_mask)


def greedy_forward_min(n: int, evaluate) -> Tuple[np.ndarray, float]:
    """Forward selection; returns the best of all prefixes, empty included."""
    if n < 1:
        raise ValueError("need n >= 1")
    ev = as_evaluator(evaluate)
    current = np.zeros(n, dtype=bool)
    best_mask, best_value = current.copy(), ev(current)
    for _ in range(n):
        free = np.flatnonzero(~current)
        cand = np.repeat(current[None, :], free.size, axis=0)
        cand[np.arange(free.size), free] = True
        values = ev.many(cand)
        j = int(np.argmin(values))
        current = cand[j]
        if _better(float(values[j]), current, best_value, best_mask):
            best_mask, best_value = current.copy(), float(values[j])
    return best_mask, ev(best_mask)


def _descend(ev: MaskEvaluator, start: np.ndarray, max_iters: int) -> Tuple[np.ndarray, float]:
    mask = start.copy()
    value = ev(mask)
    flips = np.eye(mask.size, dtype=bool)
    for _ in range(max_iters):
        values = ev.many(mask[None, :] ^ flips)
        j = int(np.argmin(values))
        if not values[j] < value:
            break
        mask[j] = ~mask[j]
        value = float(values[j])
    return mask, value


def local_swap_min(n: int, evaluate, init: Optional[np.ndarray] = None, max_iters: Optional[int] = None,
                   restarts: int = 5, seed: int = 0) -> Tuple[np.ndarray, float]:
    """Steepest-descent single-bit flips from ``init`` plus random restarts.

    Each descent moves to the best flip while it strictly improves, for at
    most ``max_iters`` moves (default ``50 * n``). ``init`` defaults to the
    all-ones mask. Restart masks are drawn from ``seed``.
    """
    ev = as_evaluator(evaluate)
    init = np.ones(n, dtype=bool) if init is None else np.asarray(init, dtype=bool).copy()
    if init.shape != (n,):
        raise ValueError("init mask must have length n")
    max_iters = 50 * n if max_iters is None else max_iters
    rng = make_rng(seed)
    starts = [init] + [rng.random(n) < 0.5 for _ in range(restarts)]
    best_mask, best_value = None, np.inf
    for start in starts:
        mask, value = _descend(ev, start, max_iters)
        if _better(value, mask, best_value, best_mask):
            best_mask, best_value = mask, value
    return best_mask, ev(best_mask)


def count_overlapping_pairs_exact(n: int, k: int) -> int:
    """Ordered pairs of ``k``-subsets of ``n`` items sharing 1..k-1 elements."""
    if k < 1 or 2 * k > n:
        raise ValueError("need k >= 1 and 2k <= n")
    return sum(comb(n, 2 * k - t) * comb(2 * k - t, t) * comb(2 * k - 2 * t, k - t) for t in range(1, k))


def overlapping_pairs_bound(n: int, k: int) -> int:
    """Upper bound ``4^k C(2k, k) C(n, 2k-1)``, valid for ``n >= 4k``."""
    return 4 ** k * comb(2 * k, k) * comb(n, 2 * k - 1)


def combination_blocks(n: int, k: int, block: int = 1 << 15) -> Iterator[np.ndarray]:
    """``k``-subsets of ``range(n)`` as ``(m, k)`` index arrays, lexicographic order."""
    it = iterate_subsets_fixed_k(n, k)
    if k == 0:
        yield np.empty((1, 0), dtype=np.int64)
        return
    while True:
        chunk = np.fromiter(itertools.chain.from_iterable(itertools.islice(it, block)), dtype=np.int64)
        if chunk.size == 0:
            return
        yield chunk.reshape(-1, k)


def fixed_k_min(n: int, k: int, evaluate, max_evaluations: int = 10 ** 7) -> Tuple[np.ndarray, float]:
    """Exact minimizer over the ``C(n, k)`` masks with exactly ``k`` items."""
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    total = comb(n, k)
    if total > max_evaluations:
        raise BudgetExceededError(
            f"C({n},{k}) = {total} subsets exceeds the budget of {max_evaluations}; "
            "use a smaller k or a sampling/local search strategy")
    ev = as_evaluator(evaluate)
    best_value, best_mask = np.inf, None
    for combos in combination_blocks(n, k):
        masks = np.zeros((combos.shape[0], n), dtype=bool)
        masks[np.arange(combos.shape[0])[:, None], combos] = True
        values = ev.many(masks)
        j = int(np.argmin(values))  # first occurrence = lexicographically smallest
        if values[j] < best_value:
            best_value, best_mask = float(values[j]), masks[j].copy()
    return best_mask, ev(best_mask)
