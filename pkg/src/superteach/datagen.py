"""Seeded samplers for the synthetic teaching problems.

Randomness comes from numpy's Philox generator keyed directly with the
64-bit seed (no SeedSequence hashing), and normals are produced from its
53-bit uniforms by the Box-Muller transform. Both pieces are fixed here so
that a ``(parameters, seed)`` pair always yields the same sample.
"""
from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .core import Interval, Task, TaskSpec, TrainingSet

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """SplitMix64 finalizer; a bijection on 64-bit integers."""
    x = (x + _GOLDEN) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(master_seed: int, *keys: int) -> int:
    """Mix a master seed with integer keys (e.g. ``n``, trial index).

    For a fixed prefix the map is injective in the last key, so trial seeds
    under one master seed never collide.
    """
    h = splitmix64(int(master_seed) & _MASK64)
    for k in keys:
        h = splitmix64(h ^ splitmix64(int(k) & _MASK64))
    return h


def make_rng(seed: int) -> np.random.Generator:
    if seed < 0:
        raise ValueError("seed must be a nonnegative 64-bit integer")
    return np.random.Generator(np.random.Philox(key=int(seed) & _MASK64))


def standard_normal(rng: np.random.Generator, size: int) -> np.ndarray:
    """Box-Muller normals from paired uniforms ``(u1, u2)``."""
    m = (size + 1) // 2
    u = rng.random((m, 2))
    r = np.sqrt(-2.0 * np.log1p(-u[:, 0]))  # 1 - u in (0, 1]
    angle = 2.0 * math.pi * u[:, 1]
    z = np.empty((m, 2))
    z[:, 0] = r * np.cos(angle)
    z[:, 1] = r * np.sin(angle)
    return z.reshape(-1)[:size]


def _check_n(n: int) -> None:
    if n < 1:
        raise ValueError("sample size must be at least 1")


def sample_gauss1d(n: int, theta_star: float, seed: int) -> TrainingSet:
    _check_n(n)
    rng = make_rng(seed)
    return TrainingSet((theta_star + standard_normal(rng, n))[:, None])


def sample_margin1d(n: int, seed: int) -> TrainingSet:
    """Uniform x on [-1, 1], label +1 iff x >= 0."""
    _check_n(n)
    rng = make_rng(seed)
    x = 2.0 * rng.random(n) - 1.0
    return TrainingSet(x[:, None], np.where(x >= 0.0, 1.0, -1.0))


def default_theta(d: int) -> np.ndarray:
    return np.full(d, 1.0 / math.sqrt(d))


def sample_halfspace(n: int, d: int, theta_star: Optional[np.ndarray], seed: int) -> TrainingSet:
    _check_n(n)
    if d < 1:
        raise ValueError("dimension must be at least 1")
    theta = default_theta(d) if theta_star is None else np.asarray(theta_star, dtype=float)
    if theta.shape != (d,):
        raise ValueError("theta_star must have length d")
    if not np.any(theta):
        raise ValueError("theta_star must be nonzero")
    rng = make_rng(seed)
    X = standard_normal(rng, n * d).reshape(n, d)
    return TrainingSet(X, np.where(X @ theta > 0.0, 1.0, -1.0))


def sample_linreg(n: int, d: int, theta_star: Optional[np.ndarray], noise_var: float, seed: int) -> TrainingSet:
    _check_n(n)
    if d < 1:
        raise ValueError("dimension must be at least 1")
    if noise_var < 0:
        raise ValueError("noise variance must be nonnegative")
    theta = default_theta(d) if theta_star is None else np.asarray(theta_star, dtype=float)
    if theta.shape != (d,):
        raise ValueError("theta_star must have length d")
    rng = make_rng(seed)
    X = standard_normal(rng, n * d).reshape(n, d)
    noise = math.sqrt(noise_var) * standard_normal(rng, n)
    return TrainingSet(X, X @ theta + noise)


def sample_interval_uniform(n: int, theta_star: float, seed: int) -> TrainingSet:
    """Uniform draws on ``[0, theta_star]`` for the interval-MLE learner."""
    _check_n(n)
    if not theta_star > 0:
        raise ValueError("theta_star must be positive")
    rng = make_rng(seed)
    return TrainingSet((theta_star * rng.random(n))[:, None])


def sample_integer_grid(n: int, target: Interval, domain: tuple, seed: int) -> TrainingSet:
    """Uniform integer points of the domain, labeled +1 inside ``target``."""
    _check_n(n)
    lo, hi = int(domain[0]), int(domain[1])
    rng = make_rng(seed)
    x = rng.integers(lo, hi, endpoint=True, size=n).astype(float)
    y = np.where((x >= target.lo) & (x <= target.hi), 1.0, -1.0)
    return TrainingSet(x[:, None], y)


def sample_task(task: TaskSpec, n: int, seed: int) -> TrainingSet:
    """Draw an ``n``-item iid sample for any supported task."""
    if task.task is Task.GAUSS_1D:
        return sample_gauss1d(n, task.theta_star, seed)
    if task.task is Task.MARGIN_1D:
        return sample_margin1d(n, seed)
    if task.task is Task.HALFSPACE:
        return sample_halfspace(n, task.d, task.theta_star, seed)
    if task.task is Task.LINREG:
        return sample_linreg(n, task.d, task.theta_star, task.noise_var, seed)
    if task.task is Task.INTERVAL_MLE:
        return sample_interval_uniform(n, task.theta_star, seed)
    return sample_integer_grid(n, task.theta_star, task.domain, seed)
