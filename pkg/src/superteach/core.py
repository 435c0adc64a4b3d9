"""Domain types and the teaching risks.

A training set is stored column-wise: an ``(n, d)`` feature matrix plus an
optional length-``n`` label vector. Hypotheses are plain Python values:

* ``float`` for one-dimensional estimators,
* a 1-D ``numpy.ndarray`` for linear models,
* :class:`Interval` for the interval learners,
* :data:`EMPTY` when a learner has nothing to report.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence, Union

import numpy as np


class UndefinedRiskError(ValueError):
    """Raised when a risk is requested for a hypothesis it cannot score."""


class _Empty:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "EMPTY"

    def __reduce__(self):
        return (_Empty, ())


EMPTY = _Empty()
"""The degenerate hypothesis (e.g. no positive items for an interval learner)."""


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"interval needs lo <= hi, got [{self.lo}, {self.hi}]")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, other: Union["Interval", _Empty]) -> bool:
        if other is EMPTY:
            return True
        return self.lo <= other.lo and other.hi <= self.hi


Hypothesis = Union[float, np.ndarray, Interval, _Empty]


@dataclass(frozen=True)
class Example:
    x: np.ndarray
    y: Optional[float] = None


@dataclass(frozen=True, eq=False)
class TrainingSet:
    """An ordered multiset of examples.

    Index identity matters: masks and teaching results refer to rows by
    position, so the order of ``X`` is never changed.
    """

    X: np.ndarray
    y: Optional[np.ndarray] = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2:
            raise ValueError("features must be an (n, d) array")
        if not np.all(np.isfinite(X)):
            raise ValueError("features must be finite")
        X.setflags(write=False)
        object.__setattr__(self, "X", X)
        if self.y is not None:
            y = np.asarray(self.y, dtype=float).reshape(-1)
            if y.shape[0] != X.shape[0]:
                raise ValueError("label vector length does not match features")
            y.setflags(write=False)
            object.__setattr__(self, "y", y)

    @classmethod
    def from_examples(cls, examples: Sequence[Example], d: Optional[int] = None) -> "TrainingSet":
        if not examples:
            if d is None:
                raise ValueError("dimension required for an empty set")
            return cls(np.empty((0, d)))
        X = np.array([np.atleast_1d(e.x) for e in examples], dtype=float)
        labels = [e.y for e in examples]
        if all(lab is None for lab in labels):
            return cls(X)
        if any(lab is None for lab in labels):
            raise ValueError("either every example carries a label or none does")
        return cls(X, np.array(labels, dtype=float))

    def __len__(self) -> int:
        return self.X.shape[0]

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def labeled(self) -> bool:
        return self.y is not None

    def __iter__(self) -> Iterator[Example]:
        for i in range(self.n):
            yield self[i]

    def __getitem__(self, i: int) -> Example:
        return Example(self.X[i].copy(), None if self.y is None else float(self.y[i]))

    def subset(self, selection: Union["SubsetMask", np.ndarray, Sequence[int]]) -> "TrainingSet":
        """Rows picked by a mask, a boolean array, or an index list (order kept)."""
        if isinstance(selection, SubsetMask):
            idx = selection.indices
        else:
            sel = np.asarray(selection)
            if sel.dtype == bool:
                if sel.shape != (self.n,):
                    raise ValueError("boolean mask length does not match the set")
                idx = np.flatnonzero(sel)
            else:
                idx = np.sort(sel.astype(int).reshape(-1))
        return TrainingSet(self.X[idx], None if self.y is None else self.y[idx])

    def check_binary_labels(self) -> None:
        if self.y is None:
            raise ValueError("labels required")
        if not np.all(np.isin(self.y, (-1.0, 1.0))):
            raise ValueError("classification labels must be -1 or +1")


@dataclass(frozen=True, eq=False)
class SubsetMask:
    bits: np.ndarray = field(repr=False)

    def __post_init__(self):
        bits = np.asarray(self.bits).astype(bool).reshape(-1)
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_indices(cls, n: int, indices: Sequence[int]) -> "SubsetMask":
        bits = np.zeros(n, dtype=bool)
        idx = np.asarray(list(indices), dtype=int)
        if idx.size and (idx.min() < 0 or idx.max() >= n):
            raise IndexError("index out of range for mask")
        bits[idx] = True
        return cls(bits)

    @classmethod
    def full(cls, n: int) -> "SubsetMask":
        return cls(np.ones(n, dtype=bool))

    @property
    def n(self) -> int:
        return self.bits.shape[0]

    @property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.bits)

    @property
    def size(self) -> int:
        return int(self.bits.sum())

    @property
    def is_proper(self) -> bool:
        return self.size < self.n

    def __eq__(self, other) -> bool:
        return isinstance(other, SubsetMask) and np.array_equal(self.bits, other.bits)

    def __hash__(self) -> int:
        return hash(self.bits.tobytes())

    def __repr__(self) -> str:
        return f"SubsetMask(n={self.n}, indices={self.indices.tolist()})"


class Task(enum.Enum):
    GAUSS_1D = "gauss1d"
    MARGIN_1D = "margin1d"
    HALFSPACE = "logistic"
    LINREG = "ridge"
    INTERVAL_MLE = "interval"
    CONSISTENT_INTERVAL = "consistent"


class RiskKind(enum.Enum):
    PARAM_DISTANCE = "param_distance"
    ANGULAR_01 = "angular_01"
    SYMMETRIC_DIFFERENCE = "symmetric_difference"


_RISK_FOR_TASK = {
    Task.GAUSS_1D: RiskKind.PARAM_DISTANCE,
    Task.MARGIN_1D: RiskKind.PARAM_DISTANCE,
    Task.HALFSPACE: RiskKind.ANGULAR_01,
    Task.LINREG: RiskKind.PARAM_DISTANCE,
    Task.INTERVAL_MLE: RiskKind.PARAM_DISTANCE,
    Task.CONSISTENT_INTERVAL: RiskKind.SYMMETRIC_DIFFERENCE,
}


@dataclass(frozen=True, eq=False)
class TaskSpec:
    """Everything a clairvoyant teacher knows about one learning problem.

    Use the named constructors (:meth:`gauss1d`, :meth:`halfspace`, ...)
    rather than filling the fields by hand; they apply the defaults used in
    the experiments (``theta_star = (1/sqrt(d), ...)``, ``lam = 0.1``,
    ``noise_var = 0.1``).
    """

    task: Task
    d: int
    theta_star: Hypothesis
    noise_var: float = 0.0
    lam: float = 0.1
    risk_kind: Optional[RiskKind] = None
    domain: tuple = (-1.0, 1.0)
    mode: str = "least"

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be positive")
        if self.noise_var < 0:
            raise ValueError("noise variance must be nonnegative")
        if not self.lam > 0:
            raise ValueError("regularization weight must be positive")
        expected = _RISK_FOR_TASK[self.task]
        if self.risk_kind is None:
            object.__setattr__(self, "risk_kind", expected)
        elif self.risk_kind is not expected:
            raise ValueError(f"{self.task.value} is scored with {expected.value}, not {self.risk_kind.value}")
        theta = self.theta_star
        if self.task in (Task.HALFSPACE, Task.LINREG):
            theta = np.asarray(theta, dtype=float).reshape(-1)
            if theta.shape != (self.d,):
                raise ValueError("theta_star must have length d")
            theta.setflags(write=False)
            object.__setattr__(self, "theta_star", theta)
        elif self.task is Task.CONSISTENT_INTERVAL:
            if not isinstance(theta, Interval):
                raise ValueError("consistent-interval task needs an Interval target")
            if self.mode not in ("least", "greatest"):
                raise ValueError("mode must be 'least' or 'greatest'")
        else:
            if self.d != 1:
                raise ValueError(f"{self.task.value} is one-dimensional")
            object.__setattr__(self, "theta_star", float(theta))
        lo, hi = self.domain
        if not hi > lo:
            raise ValueError("degenerate domain")

    @classmethod
    def gauss1d(cls, theta_star: float = 0.0) -> "TaskSpec":
        return cls(Task.GAUSS_1D, 1, float(theta_star), noise_var=1.0)

    @classmethod
    def margin1d(cls) -> "TaskSpec":
        return cls(Task.MARGIN_1D, 1, 0.0, domain=(-1.0, 1.0))

    @classmethod
    def halfspace(cls, d: int = 2, theta_star=None, lam: float = 0.1) -> "TaskSpec":
        if theta_star is None:
            theta_star = np.full(d, 1.0 / math.sqrt(d))
        return cls(Task.HALFSPACE, d, theta_star, lam=lam)

    @classmethod
    def linreg(cls, d: int = 2, theta_star=None, noise_var: float = 0.1, lam: float = 0.1) -> "TaskSpec":
        if theta_star is None:
            theta_star = np.full(d, 1.0 / math.sqrt(d))
        return cls(Task.LINREG, d, theta_star, noise_var=noise_var, lam=lam)

    @classmethod
    def interval_mle(cls, theta_star: float = 1.0) -> "TaskSpec":
        if not theta_star > 0:
            raise ValueError("interval MLE target must be positive")
        return cls(Task.INTERVAL_MLE, 1, float(theta_star), domain=(0.0, float(theta_star)))

    @classmethod
    def consistent_interval(cls, target: Interval, domain=(0, 20), mode: str = "least") -> "TaskSpec":
        return cls(Task.CONSISTENT_INTERVAL, 1, target, domain=tuple(float(v) for v in domain), mode=mode)

    @property
    def risk_fn(self):
        """Two-argument risk ``(theta_hat, theta_star) -> float`` for this task."""
        if self.risk_kind is RiskKind.ANGULAR_01:
            return risk_angular_01
        if self.risk_kind is RiskKind.SYMMETRIC_DIFFERENCE:
            lo, hi = self.domain
            return lambda a, b: risk_symmetric_difference(a, b, lo, hi)
        return risk_param_distance

    def risk(self, theta_hat: Hypothesis) -> float:
        """Score ``theta_hat`` against the target with this task's risk."""
        return self.risk_fn(theta_hat, self.theta_star)


def _as_vector(theta: Hypothesis) -> np.ndarray:
    if theta is EMPTY:
        raise UndefinedRiskError("undefined risk for the empty hypothesis")
    if isinstance(theta, Interval):
        raise UndefinedRiskError("parameter distance is not defined for intervals")
    return np.atleast_1d(np.asarray(theta, dtype=float))


def risk_param_distance(theta_hat: Hypothesis, theta_star: Hypothesis) -> float:
    """Euclidean distance ``||theta_hat - theta_star||``."""
    a = _as_vector(theta_hat)
    b = _as_vector(theta_star)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if a.size == 1:
        return abs(float(a[0]) - float(b[0]))
    return float(np.linalg.norm(a - b))


def risk_angular_01(theta_hat: Hypothesis, theta_star: Hypothesis) -> float:
    """Expected 0-1 loss of a homogeneous halfspace under an isotropic ``p(x)``.

    Equals the angle between ``theta_hat`` and ``theta_star`` divided by pi.
    A zero ``theta_hat`` has no direction and scores 0.5.
    """
    a = _as_vector(theta_hat)
    b = _as_vector(theta_star)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    nb = np.linalg.norm(b)
    if nb == 0:
        raise ValueError("theta_star must be nonzero")
    na = np.linalg.norm(a)
    if na == 0:
        return 0.5
    cos = float(np.dot(a, b) / (na * nb))
    return math.acos(min(1.0, max(-1.0, cos))) / math.pi


def risk_symmetric_difference(theta_hat: Hypothesis, theta_star: Hypothesis,
                              domain_lo: float, domain_hi: float) -> float:
    """Length of ``theta_hat`` XOR ``theta_star`` over the domain length.

    Empty hypotheses count as zero-length intervals.
    """
    if not domain_hi > domain_lo:
        raise ValueError("degenerate domain")
    for iv in (theta_hat, theta_star):
        if iv is EMPTY:
            continue
        if not isinstance(iv, Interval):
            raise TypeError("symmetric difference needs Interval or EMPTY hypotheses")
        if iv.lo < domain_lo or iv.hi > domain_hi:
            raise ValueError(f"{iv} lies outside the domain [{domain_lo}, {domain_hi}]")
    la = 0.0 if theta_hat is EMPTY else theta_hat.length
    lb = 0.0 if theta_star is EMPTY else theta_star.length
    overlap = 0.0
    if theta_hat is not EMPTY and theta_star is not EMPTY:
        overlap = max(0.0, min(theta_hat.hi, theta_star.hi) - max(theta_hat.lo, theta_star.lo))
    return (la + lb - 2.0 * overlap) / (domain_hi - domain_lo)


def hypothesis_to_list(theta: Hypothesis) -> list:
    """Flat list form used by the JSON and CSV writers."""
    if theta is EMPTY:
        return []
    if isinstance(theta, Interval):
        return [float(theta.lo), float(theta.hi)]
    return [float(v) for v in np.atleast_1d(np.asarray(theta, dtype=float))]
