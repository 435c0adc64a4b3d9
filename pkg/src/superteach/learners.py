"""Learners: functions from a (sub)set of examples to a unique hypothesis.

The two ERM learners minimize

    sum_i loss(theta, z_i) + lam / 2 * ||theta||^2

with logistic loss ``log(1 + exp(-y x.theta))`` or squared loss
``(x.theta - y)^2`` (no 1/2 factor). Besides the one-set solvers there are
batched solvers that fit many subset masks of one training set at once;
the subset-search teacher relies on them.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.special import expit

from .core import EMPTY, Hypothesis, Interval, Task, TaskSpec, TrainingSet

DEFAULT_TOL = 1e-8
MAX_NEWTON_ITERS = 200


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class NotRealizableError(ValueError):
    """Labels cannot be explained by any hypothesis of the learner's class."""


class LearnerKind(enum.Enum):
    GAUSS_MEAN = "gauss_mean"
    LARGE_MARGIN_1D = "large_margin_1d"
    LOGISTIC_ERM = "logistic_erm"
    RIDGE_ERM = "ridge_erm"
    INTERVAL_MLE = "interval_mle"
    LEAST_CONSISTENT = "least_consistent"
    GREATEST_CONSISTENT = "greatest_consistent"

    @property
    def is_erm(self) -> bool:
        return self in (LearnerKind.LOGISTIC_ERM, LearnerKind.RIDGE_ERM)


@dataclass(frozen=True)
class SolveReport:
    theta_hat: np.ndarray
    kkt_residual_norm: float
    iterations: int


def _scalar_column(subset: TrainingSet, what: str) -> np.ndarray:
    if subset.n == 0:
        raise ValueError(f"{what} undefined on empty set")
    if subset.d != 1:
        raise ValueError(f"{what} needs one-dimensional data")
    return subset.X[:, 0]


def learn_gauss_mean(subset: TrainingSet) -> float:
    x = _scalar_column(subset, "MLE")
    return float(np.mean(x))


def learn_large_margin_1d(subset: TrainingSet) -> float:
    """Midpoint of the innermost opposite-label pair.

    Returns -1 for an all-positive set and +1 for an all-negative one.
    """
    x = _scalar_column(subset, "large margin classifier")
    subset.check_binary_labels()
    pos = x[subset.y > 0]
    neg = x[subset.y < 0]
    if pos.size == 0:
        return 1.0
    if neg.size == 0:
        return -1.0
    x_minus, x_plus = neg.max(), pos.min()
    if x_minus >= x_plus:
        raise NotRealizableError("not realizable: a negative lies right of a positive")
    return float((x_minus + x_plus) / 2.0)


def large_margin_1d_batch(x: np.ndarray) -> np.ndarray:
    """Large-margin estimates for many noiseless samples at once.

    ``x`` has shape ``(m, n)``; row ``r`` is one sample labeled by ``x >= 0``.
    """
    x = np.asarray(x, dtype=float)
    positive = x >= 0.0
    x_minus = np.where(positive, -np.inf, x).max(axis=1)
    x_plus = np.where(positive, x, np.inf).min(axis=1)
    out = (x_minus + x_plus) / 2.0
    out = np.where(np.isinf(x_minus), -1.0, out)
    out = np.where(np.isinf(x_plus), 1.0, out)
    return out


def learn_interval_mle(subset: TrainingSet) -> float:
    x = _scalar_column(subset, "MLE")
    if np.any(x < 0):
        raise ValueError("interval MLE expects nonnegative draws")
    return float(x.max())


def learn_consistent_interval(subset: TrainingSet, mode: str, domain_lo: float, domain_hi: float) -> Hypothesis:
    """Least or greatest integer interval consistent with the labels.

    ``mode="least"`` hugs the positive items, ``mode="greatest"`` grows the
    interval up to the grid points next to the nearest negatives (or the
    domain edges). Either returns :data:`EMPTY` when there is no positive.
    """
    if mode not in ("least", "greatest"):
        raise ValueError("mode must be 'least' or 'greatest'")
    if subset.n and subset.d != 1:
        raise ValueError("consistent interval learners need one-dimensional data")
    if subset.n:
        subset.check_binary_labels()
    x = subset.X[:, 0] if subset.n else np.empty(0)
    if np.any(x != np.round(x)) or np.any(x < domain_lo) or np.any(x > domain_hi):
        raise ValueError("points must lie on the integer grid of the domain")
    y = subset.y if subset.n else np.empty(0)
    pos = x[y > 0]
    neg = x[y < 0]
    if pos.size == 0:
        return EMPTY
    a, b = pos.min(), pos.max()
    if np.any((neg >= a) & (neg <= b)):
        raise NotRealizableError("not realizable: a negative lies inside the positive span")
    if mode == "least":
        return Interval(float(a), float(b))
    left = neg[neg < a]
    right = neg[neg > b]
    lo = left.max() + 1.0 if left.size else float(domain_lo)
    hi = right.min() - 1.0 if right.size else float(domain_hi)
    return Interval(float(lo), float(hi))


# ---------------------------------------------------------------------------
# ERM objectives


def logistic_objective(theta, X, y, lam, weights=None):
    z = y * (X @ theta)
    loss = np.logaddexp(0.0, -z)
    if weights is not None:
        loss = weights * loss
    return float(loss.sum() + 0.5 * lam * theta @ theta)


def logistic_gradient(theta, X, y, lam, weights=None):
    p = expit(-y * (X @ theta))
    c = y * p if weights is None else weights * y * p
    return lam * theta - X.T @ c


def logistic_hessian(theta, X, y, lam, weights=None):
    p = expit(-y * (X @ theta))
    w = p * (1.0 - p)
    if weights is not None:
        w = weights * w
    return (X.T * w) @ X + lam * np.eye(X.shape[1])


def squared_objective(theta, X, y, lam, weights=None):
    r = X @ theta - y
    sq = r * r if weights is None else weights * r * r
    return float(sq.sum() + 0.5 * lam * theta @ theta)


def squared_gradient(theta, X, y, lam, weights=None):
    r = X @ theta - y
    if weights is not None:
        r = weights * r
    return lam * theta + 2.0 * X.T @ r


def squared_hessian(theta, X, y, lam, weights=None):
    w = np.ones(X.shape[0]) if weights is None else weights
    return 2.0 * (X.T * w) @ X + lam * np.eye(X.shape[1])


def newton_minimize(fun: Callable, grad: Callable, hess: Callable, x0: np.ndarray,
                    tol: float = DEFAULT_TOL, max_iter: int = MAX_NEWTON_ITERS) -> Tuple[np.ndarray, float, int]:
    """Damped Newton for smooth strictly convex objectives.

    Stops once ``||grad|| <= tol``. Step lengths are halved until the Armijo
    condition holds (a round-off sized slack is allowed so the last steps
    near the optimum are not rejected). Returns ``(x, ||grad||, iterations)``.
    """
    x = np.array(x0, dtype=float)
    for it in range(max_iter + 1):
        g = grad(x)
        gnorm = float(np.linalg.norm(g))
        if gnorm <= tol:
            return x, gnorm, it
        if it == max_iter:
            break
        step = np.linalg.solve(hess(x), g)
        f0 = fun(x)
        decrease = float(g @ step)
        slack = 1e-14 * (1.0 + abs(f0))
        t = 1.0
        for _ in range(60):
            if fun(x - t * step) <= f0 - 1e-4 * t * decrease + slack:
                break
            t *= 0.5
        x = x - t * step
    raise ConvergenceError(f"Newton did not converge in {max_iter} iterations", gnorm)


def _check_erm_input(subset: TrainingSet, lam: float) -> None:
    if not lam > 0:
        raise ValueError("regularization weight must be positive")
    if not subset.labeled:
        raise ValueError("ERM learners need labels")


def learn_logistic_erm(subset: TrainingSet, lam: float = 0.1, tol: float = DEFAULT_TOL) -> SolveReport:
    """L2-regularized logistic regression solved by damped Newton from 0."""
    _check_erm_input(subset, lam)
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    if subset.n:
        subset.check_binary_labels()
    X, y = subset.X, subset.y
    theta, res, its = newton_minimize(
        lambda t: logistic_objective(t, X, y, lam),
        lambda t: logistic_gradient(t, X, y, lam),
        lambda t: logistic_hessian(t, X, y, lam),
        np.zeros(subset.d), tol=tol)
    return SolveReport(theta, res, its)


def ridge_kkt_residual(theta: np.ndarray, X: np.ndarray, y: np.ndarray, lam: float) -> float:
    return float(np.linalg.norm(squared_gradient(theta, X, y, lam)))


def learn_ridge_erm(subset: TrainingSet, lam: float = 0.1) -> SolveReport:
    """Exact ridge fit via Cholesky on ``(lam/2 I + X^T X) theta = X^T y``."""
    _check_erm_input(subset, lam)
    X, y = subset.X, subset.y
    A = 0.5 * lam * np.eye(subset.d) + X.T @ X
    theta = cho_solve(cho_factor(A), X.T @ y)
    return SolveReport(theta, ridge_kkt_residual(theta, X, y, lam), 1)


def _outer_products(X: np.ndarray) -> np.ndarray:
    n, d = X.shape
    return (X[:, :, None] * X[:, None, :]).reshape(n, d * d)


def ridge_erm_many(X: np.ndarray, y: np.ndarray, masks: np.ndarray, lam: float) -> np.ndarray:
    """Ridge solutions for every row of a boolean ``(m, n)`` mask matrix."""
    B = np.asarray(masks, dtype=float)
    d = X.shape[1]
    A = (B @ _outer_products(X)).reshape(-1, d, d) + 0.5 * lam * np.eye(d)
    rhs = (B * y) @ X
    return np.linalg.solve(A, rhs[:, :, None])[:, :, 0]


def logistic_erm_many(X: np.ndarray, y: np.ndarray, masks: np.ndarray, lam: float,
                      tol: float = DEFAULT_TOL, max_iter: int = MAX_NEWTON_ITERS) -> Tuple[np.ndarray, np.ndarray]:
    """Batched damped Newton over subset masks.

    Returns ``(thetas, residuals)`` with one row / entry per mask. Each mask
    is iterated until its own stationarity residual is at most ``tol``.
    """
    B = np.asarray(masks, dtype=float)
    m = B.shape[0]
    n, d = X.shape
    yX = y[:, None] * X
    XX = _outer_products(X)
    eye = np.eye(d)
    theta = np.zeros((m, d))
    residual = np.full(m, np.inf)
    active = np.arange(m)

    def objective(th, Bb):
        return (Bb * np.logaddexp(0.0, -(th @ yX.T))).sum(axis=1) + 0.5 * lam * (th * th).sum(axis=1)

    for _ in range(max_iter + 1):
        th, Bb = theta[active], B[active]
        p = expit(-(th @ yX.T))
        g = lam * th - (Bb * p) @ yX
        gnorm = np.linalg.norm(g, axis=1)
        done = gnorm <= tol
        residual[active] = gnorm
        keep = ~done
        if not keep.any():
            return theta, residual
        active, th, Bb, p, g = active[keep], th[keep], Bb[keep], p[keep], g[keep]
        H = ((Bb * p * (1.0 - p)) @ XX).reshape(-1, d, d) + lam * eye
        step = np.linalg.solve(H, g[:, :, None])[:, :, 0]
        f0 = objective(th, Bb)
        decrease = (g * step).sum(axis=1)
        slack = 1e-14 * (1.0 + np.abs(f0))
        t = np.ones(active.size)
        new = th - step
        pending = np.arange(active.size)
        for _ in range(60):
            f1 = objective(new[pending], Bb[pending])
            bad = f1 > f0[pending] - 1e-4 * t[pending] * decrease[pending] + slack[pending]
            if not bad.any():
                break
            pending = pending[bad]
            t[pending] *= 0.5
            new[pending] = th[pending] - t[pending, None] * step[pending]
        theta[active] = new
    raise ConvergenceError(f"batched Newton did not converge in {max_iter} iterations",
                           float(residual.max()))


@dataclass(frozen=True)
class Learner:
    """A learner kind bound to its hyperparameters.

    ``lam`` is required for (and only allowed on) the ERM learners;
    ``domain`` is required by the consistent-interval learners.
    """

    kind: LearnerKind
    lam: Optional[float] = None
    tol: float = DEFAULT_TOL
    domain: Optional[tuple] = None

    def __post_init__(self):
        if self.kind.is_erm:
            if self.lam is None or not self.lam > 0:
                raise ValueError("ERM learners need a positive lam")
        elif self.lam is not None:
            raise ValueError(f"{self.kind.value} takes no regularization weight")
        if self.kind in (LearnerKind.LEAST_CONSISTENT, LearnerKind.GREATEST_CONSISTENT) and self.domain is None:
            raise ValueError("consistent-interval learners need a domain")

    @classmethod
    def for_task(cls, task: TaskSpec) -> "Learner":
        if task.task is Task.GAUSS_1D:
            return cls(LearnerKind.GAUSS_MEAN)
        if task.task is Task.MARGIN_1D:
            return cls(LearnerKind.LARGE_MARGIN_1D)
        if task.task is Task.HALFSPACE:
            return cls(LearnerKind.LOGISTIC_ERM, lam=task.lam)
        if task.task is Task.LINREG:
            return cls(LearnerKind.RIDGE_ERM, lam=task.lam)
        if task.task is Task.INTERVAL_MLE:
            return cls(LearnerKind.INTERVAL_MLE)
        kind = LearnerKind.LEAST_CONSISTENT if task.mode == "least" else LearnerKind.GREATEST_CONSISTENT
        return cls(kind, domain=task.domain)

    @property
    def is_erm(self) -> bool:
        return self.kind.is_erm

    def solve(self, subset: TrainingSet) -> SolveReport:
        if self.kind is LearnerKind.LOGISTIC_ERM:
            return learn_logistic_erm(subset, self.lam, self.tol)
        if self.kind is LearnerKind.RIDGE_ERM:
            return learn_ridge_erm(subset, self.lam)
        raise TypeError(f"{self.kind.value} is not an ERM learner")

    def fit(self, subset: TrainingSet) -> Hypothesis:
        k = self.kind
        if k.is_erm:
            return self.solve(subset).theta_hat
        if k is LearnerKind.GAUSS_MEAN:
            return learn_gauss_mean(subset)
        if k is LearnerKind.LARGE_MARGIN_1D:
            return learn_large_margin_1d(subset)
        if k is LearnerKind.INTERVAL_MLE:
            return learn_interval_mle(subset)
        mode = "least" if k is LearnerKind.LEAST_CONSISTENT else "greatest"
        return learn_consistent_interval(subset, mode, *self.domain)

    def fit_many(self, data: TrainingSet, masks: np.ndarray) -> np.ndarray:
        """ERM solutions for a boolean ``(m, n)`` stack of masks over ``data``."""
        masks = np.atleast_2d(np.asarray(masks, dtype=bool))
        if self.kind is LearnerKind.RIDGE_ERM:
            return ridge_erm_many(data.X, data.y, masks, self.lam)
        if self.kind is LearnerKind.LOGISTIC_ERM:
            return logistic_erm_many(data.X, data.y, masks, self.lam, self.tol)[0]
        raise TypeError("batched fitting is only available for ERM learners")
