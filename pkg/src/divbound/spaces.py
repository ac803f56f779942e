"""Finite metric spaces, discrete measures, and real functions on them.

Everything downstream (divergences, transport, inequality sweeps) runs on
these carriers.  All integrals are finite sums; we write ``expectation(mu, f)``
for the integral of ``f`` against ``mu``.  The only stateful object is
:class:`SeededRng`; spaces, measures and functions are immutable after
construction.
"""
from __future__ import annotations

import numpy as np
from scipy.special import logsumexp

from .config import TOLERANCES, Tolerances
from .errors import DegenerateSpace, InvalidFloor, SpaceMismatch


class FiniteMetricSpace:
    """A finite point set with a validated metric matrix.

    The matrix must be symmetric with an exactly-zero diagonal, strictly
    positive off the diagonal, and satisfy the triangle inequality on every
    triple within ``tol.triangle``.
    """

    def __init__(self, labels, metric, *, tol: Tolerances = TOLERANCES):
        labels = tuple(str(lab) for lab in labels)
        metric = np.array(metric, dtype=float)
        n = len(labels)
        if n == 0:
            raise ValueError("a space needs at least one point")
        if metric.shape != (n, n):
            raise ValueError(f"metric must be {n}x{n}, got {metric.shape}")
        if not np.all(np.isfinite(metric)):
            raise ValueError("metric entries must be finite")
        if np.any(np.abs(metric - metric.T) > tol.metric_symmetry):
            raise ValueError("metric must be symmetric")
        if np.any(np.diag(metric) != 0.0):
            raise ValueError("metric diagonal must be exactly zero")
        off = ~np.eye(n, dtype=bool)
        if np.any(metric[off] <= 0.0):
            raise ValueError("off-diagonal distances must be strictly positive")
        if n >= 3:
            # d(i,k) <= d(i,j) + d(j,k) for all triples, vectorised over (i,j,k)
            via = metric[:, :, None] + metric[None, :, :]
            if np.any(metric[:, None, :] > via + tol.triangle):
                raise ValueError("triangle inequality violated")
        metric.setflags(write=False)
        self.labels = labels
        self.metric = metric

    @property
    def n_points(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return self.n_points

    def index(self, label) -> int:
        return self.labels.index(str(label))

    def diameter(self) -> float:
        return float(self.metric.max())

    def same_as(self, other: "FiniteMetricSpace") -> bool:
        """True when the two spaces are interchangeable as domains."""
        if self is other:
            return True
        return self.labels == other.labels and np.array_equal(self.metric, other.metric)

    def __repr__(self) -> str:
        return f"FiniteMetricSpace({self.n_points} points: {', '.join(self.labels[:4])}{'...' if self.n_points > 4 else ''})"


def label_space(labels) -> FiniteMetricSpace:
    """A space carrying only labels, with the discrete 0/1 metric.

    Useful where the metric is irrelevant (hypothesis sets, sample spaces).
    A single-point space is allowed here, unlike ``transport.hamming_space``.
    """
    labels = tuple(str(lab) for lab in labels)
    n = len(labels)
    metric = np.ones((n, n)) - np.eye(n)
    return FiniteMetricSpace(labels, metric)


def product_space(a: FiniteMetricSpace, b: FiniteMetricSpace, *, sep: str = "|") -> FiniteMetricSpace:
    """Product of two spaces with the sum metric, labels row-major in ``a``."""
    labels = [f"{la}{sep}{lb}" for la in a.labels for lb in b.labels]
    metric = (a.metric[:, None, :, None] + b.metric[None, :, None, :]).reshape(
        a.n_points * b.n_points, a.n_points * b.n_points
    )
    return FiniteMetricSpace(labels, metric)


class DiscreteMeasure:
    """Nonnegative weights on the points of a space.

    With ``probability=True`` (the default) the weights must sum to one
    within ``tol.probability_mass``.
    """

    def __init__(self, space: FiniteMetricSpace, weights, *, probability: bool = True,
                 tol: Tolerances = TOLERANCES):
        w = np.array(weights, dtype=float)
        if w.shape != (space.n_points,):
            raise ValueError(f"expected {space.n_points} weights, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if np.any(w < 0.0):
            raise ValueError("weights must be nonnegative")
        if probability and abs(w.sum() - 1.0) > tol.probability_mass:
            raise ValueError(f"probability weights must sum to 1, got {w.sum()!r}")
        w.setflags(write=False)
        self.space = space
        self.weights = w
        self.is_probability = probability

    @property
    def support(self) -> np.ndarray:
        """Boolean mask of points carrying positive mass."""
        return self.weights > 0.0

    def total_mass(self) -> float:
        return float(self.weights.sum())

    def __repr__(self) -> str:
        return f"DiscreteMeasure({np.array2string(self.weights, precision=4)})"


class RealFunction:
    """A finite real value per point of a space."""

    def __init__(self, space: FiniteMetricSpace, values):
        v = np.array(values, dtype=float)
        if v.shape != (space.n_points,):
            raise ValueError(f"expected {space.n_points} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("function values must be finite (no NaN/inf)")
        v.setflags(write=False)
        self.space = space
        self.values = v

    def __repr__(self) -> str:
        return f"RealFunction({np.array2string(self.values, precision=4)})"


class SeededRng:
    """Deterministic random stream: identical seed, identical draws.

    Wraps numpy's PCG64 behind a spawnable seed path.  ``child(i)`` derives a
    stream for trial ``i`` that depends only on ``(seed, path, i)``, so trials
    may run in any order (or in parallel) with bit-reproducible results.
    """

    algorithm = "pcg64"

    def __init__(self, seed: int, _path: tuple = ()):
        self.seed = int(seed)
        self._path = tuple(int(p) for p in _path)
        self._generator = np.random.default_rng(
            np.random.SeedSequence((self.seed, *self._path))
        )

    @property
    def generator(self) -> np.random.Generator:
        return self._generator

    def child(self, index: int) -> "SeededRng":
        """Stream for sub-task ``index``, independent of the parent's state."""
        return SeededRng(self.seed, (*self._path, int(index)))

    def __repr__(self) -> str:
        return f"SeededRng(seed={self.seed}, path={self._path})"


def require_shared_space(*objs) -> FiniteMetricSpace:
    """The common space of measures/functions, or raise SpaceMismatch."""
    space = objs[0].space
    for other in objs[1:]:
        if not space.same_as(other.space):
            raise SpaceMismatch("operands live on different spaces")
    return space


def expectation(mu: DiscreteMeasure, f: RealFunction) -> float:
    """mu(f) = sum_i weights_i * values_i."""
    require_shared_space(mu, f)
    return float(np.dot(mu.weights, f.values))


def central_moment(mu: DiscreteMeasure, f: RealFunction, k: int) -> float:
    """k-th central moment mu((f - mu(f))^k); k=2 is the variance."""
    require_shared_space(mu, f)
    if k < 1 or int(k) != k:
        raise ValueError("moment order k must be a positive integer")
    dev = f.values - expectation(mu, f)
    if k == 2:
        return float(np.dot(mu.weights, np.abs(dev) ** 2))
    return float(np.dot(mu.weights, dev ** int(k)))


def log_mgf(weights: np.ndarray, values: np.ndarray, lam: float) -> float:
    """log sum_i w_i exp(lam * v_i) for probability weights.

    Small exponents go through log1p/expm1 (the sum is near one and the
    naive log would lose ~8 digits); large ones through logsumexp.
    """
    a = lam * np.asarray(values, dtype=float)
    if np.max(a) < 30.0:
        return float(np.log1p(np.dot(weights, np.expm1(a))))
    return float(logsumexp(a, b=weights))


def cgf(mu: DiscreteMeasure, f: RealFunction, lam: float) -> float:
    """Centered cumulant generating function log mu(exp(lam*(f - mu(f)))).

    Always finite on a finite space; nonnegative by Jensen on the centered
    variable.
    """
    require_shared_space(mu, f)
    dev = f.values - expectation(mu, f)
    return log_mgf(mu.weights, dev, lam)


def lipschitz_seminorm(f: RealFunction) -> float:
    """max_{i != j} |f(i) - f(j)| / d(i, j)."""
    n = f.space.n_points
    if n < 2:
        raise DegenerateSpace("the Lipschitz seminorm needs at least two points")
    v = f.values
    off = ~np.eye(n, dtype=bool)
    diffs = np.abs(v[:, None] - v[None, :])
    return float(np.max(diffs[off] / f.space.metric[off]))


def random_measure(space: FiniteMetricSpace, rng: SeededRng, floor: float = 0.0) -> DiscreteMeasure:
    """A random probability measure with every weight >= floor.

    Draws flat-Dirichlet weights and mixes in the floor:
    ``w <- (1 - n*floor) * w + floor``.  A positive floor guarantees mutual
    absolute continuity against any full-support measure.
    """
    n = space.n_points
    if not 0.0 <= floor < 1.0 / n:
        raise InvalidFloor(f"floor must be in [0, 1/{n}), got {floor}")
    w = rng.generator.dirichlet(np.ones(n))
    w = (1.0 - n * floor) * w + floor
    return DiscreteMeasure(space, w)


def product_measure(mu: DiscreteMeasure, xi: DiscreteMeasure,
                    space: FiniteMetricSpace | None = None) -> DiscreteMeasure:
    """The product measure on ``product_space(mu.space, xi.space)``, row-major in mu."""
    if space is None:
        space = product_space(mu.space, xi.space)
    w = np.outer(mu.weights, xi.weights).ravel()
    return DiscreteMeasure(space, w, probability=mu.is_probability and xi.is_probability)
