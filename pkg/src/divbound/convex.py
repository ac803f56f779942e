"""Convex rate functions, their conjugates, and generalized inverses.

Three kinds are shipped:

* ``Quadratic(c)`` with value ``c*lam**2/2`` (conjugate ``t**2/(2c)``),
* ``Power(c, beta)`` with value ``|c*lam|**beta/beta`` (conjugate
  ``|t/c|**alpha/alpha`` where ``alpha = beta/(beta-1)``),
* ``Tabulated(grid, values)`` for convex data on a grid, conjugated as a
  supremum over the tabulated nodes.

The generalized inverse ``inf{s >= 0 : conj(s) >= t}`` is the object the
inequality engine consumes; it is closed-form for the first two kinds and a
line-envelope scan for tabulated data.  ``scale_by_n`` implements the
sample-size scaling ``phi_n = phi/n`` together with the conjugate identity
``(phi_n*)^{-1}(t) = (1/n) (phi*)^{-1}(n t)``.

The two dualities (Legendre-Fenchel over all of R, Young over lam > 0)
coincide on the shipped kinds, which are even, nonnegative and zero at zero;
the flag is recorded so tabulated rates restricted to lam > 0 are explicit
about using the Young form.
"""
from __future__ import annotations

import numpy as np
from scipy.optimize import minimize_scalar

from .config import TOLERANCES, Tolerances
from .errors import InsufficientGrid, NotStrictlyConvex

LEGENDRE_FENCHEL = "legendre-fenchel"
YOUNG = "young"

#: default lambda grid for numeric conjugation; covers desk-scale constants
DEFAULT_CONJUGATE_GRID = np.geomspace(1e-6, 1e3, 4096)


class ConvexRate:
    """Base class: a convex function of lam with value(0) = 0."""

    kind = "abstract"

    def value(self, lam):
        raise NotImplementedError

    def derivative(self, lam):
        raise NotImplementedError

    def derivative_inverse(self, t):
        """Solve derivative(lam) = t for lam >= 0; raises NotStrictlyConvex
        when the derivative has flat segments."""
        raise NotImplementedError

    def conjugate(self, duality: str = LEGENDRE_FENCHEL) -> "ConjugateRate":
        return conjugate(self, duality)

    def describe(self) -> dict:
        """JSON-friendly parameter record."""
        raise NotImplementedError


class Quadratic(ConvexRate):
    """value(lam) = c * lam**2 / 2 with c > 0."""

    kind = "quadratic"

    def __init__(self, c: float):
        c = float(c)
        if not c > 0:
            raise ValueError(f"quadratic coefficient must be positive, got {c}")
        self.c = c

    def value(self, lam):
        return self.c * np.square(lam) / 2.0

    def derivative(self, lam):
        return self.c * np.asarray(lam, dtype=float)

    def derivative_inverse(self, t):
        return np.asarray(t, dtype=float) / self.c

    def describe(self) -> dict:
        return {"kind": self.kind, "c": self.c}


class Power(ConvexRate):
    """value(lam) = |c*lam|**beta / beta with c > 0, beta > 1."""

    kind = "power"

    def __init__(self, c: float, beta: float):
        c, beta = float(c), float(beta)
        if not c > 0:
            raise ValueError(f"power coefficient must be positive, got {c}")
        if not beta > 1:
            raise ValueError(f"power exponent must exceed 1, got {beta}")
        self.c = c
        self.beta = beta

    @property
    def alpha(self) -> float:
        """Conjugate exponent beta / (beta - 1)."""
        return self.beta / (self.beta - 1.0)

    def value(self, lam):
        return np.abs(self.c * np.asarray(lam, dtype=float)) ** self.beta / self.beta

    def derivative(self, lam):
        lam = np.asarray(lam, dtype=float)
        return self.c * np.abs(self.c * lam) ** (self.beta - 1.0) * np.sign(lam)

    def derivative_inverse(self, t):
        # c^beta * lam^(beta-1) = t  for lam, t >= 0
        t = np.asarray(t, dtype=float)
        return np.where(t <= 0.0, 0.0, (t / self.c ** self.beta) ** (1.0 / (self.beta - 1.0)))

    def describe(self) -> dict:
        return {"kind": self.kind, "c": self.c, "beta": self.beta}


class Tabulated(ConvexRate):
    """Convex data on an increasing grid of lam >= 0 starting at (0, 0).

    Values must be nondecreasing with nondecreasing segment slopes within
    ``tol.convexity``.  Between nodes the rate interpolates linearly; beyond
    the last node it extrapolates with the final slope (both preserve
    convexity).
    """

    kind = "tabulated"

    def __init__(self, grid, values, *, tol: Tolerances = TOLERANCES):
        grid = np.array(grid, dtype=float)
        values = np.array(values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape:
            raise ValueError("grid and values must be 1-d arrays of equal length")
        if grid.size < 2:
            raise InsufficientGrid("a tabulated rate needs at least two nodes")
        if np.any(np.diff(grid) <= 0) or grid[0] < 0:
            raise ValueError("grid must be strictly increasing and nonnegative")
        if grid[0] != 0.0 or values[0] != 0.0:
            raise ValueError("tabulated rates must start at value(0) = 0")
        if np.any(np.diff(values) < -tol.convexity):
            raise ValueError("values must be nondecreasing on lam >= 0")
        slopes = np.diff(values) / np.diff(grid)
        if np.any(np.diff(slopes) < -tol.convexity):
            raise ValueError("tabulated values are not convex")
        grid.setflags(write=False)
        values.setflags(write=False)
        self.grid = grid
        self.values_table = values
        self._slopes = slopes

    def value(self, lam):
        lam = np.asarray(lam, dtype=float)
        inside = np.interp(lam, self.grid, self.values_table)
        beyond = self.values_table[-1] + self._slopes[-1] * (lam - self.grid[-1])
        return np.where(lam > self.grid[-1], beyond, inside)

    def derivative(self, lam):
        lam = np.asarray(lam, dtype=float)
        idx = np.clip(np.searchsorted(self.grid, lam, side="right") - 1, 0, self._slopes.size - 1)
        return self._slopes[idx]

    def derivative_inverse(self, t):
        raise NotStrictlyConvex(
            "piecewise-linear rates have flat derivative segments; "
            "no unique inverse exists"
        )

    def describe(self) -> dict:
        return {"kind": self.kind, "grid": self.grid.tolist(), "values": self.values_table.tolist()}


class ConjugateRate:
    """The convex conjugate of a rate, with its generalized inverse.

    ``generalized_inverse(t)`` returns ``inf{s >= 0 : value(s) >= t}``, the
    quantity the forward bounds evaluate at divergence values.  When the inf
    is over an empty set (possible only for degenerate tabulated data) the
    domain upper bound is returned with ``saturated=True`` instead of inf.
    """

    def __init__(self, source: ConvexRate, duality: str):
        if duality not in (LEGENDRE_FENCHEL, YOUNG):
            raise ValueError(f"unknown duality {duality!r}")
        self.source = source
        self.duality = duality

    def value(self, t):
        raise NotImplementedError

    def generalized_inverse(self, t) -> float:
        return self.generalized_inverse_info(t)[0]

    def generalized_inverse_info(self, t) -> tuple[float, bool]:
        """(inverse value, saturated flag)."""
        raise NotImplementedError


class _QuadraticConjugate(ConjugateRate):
    def value(self, t):
        return np.square(t) / (2.0 * self.source.c)

    def generalized_inverse_info(self, t):
        t = float(t)
        if t <= 0.0:
            return 0.0, False
        return float(np.sqrt(2.0 * self.source.c * t)), False


class _PowerConjugate(ConjugateRate):
    def value(self, t):
        src = self.source
        return np.abs(np.asarray(t, dtype=float) / src.c) ** src.alpha / src.alpha

    def generalized_inverse_info(self, t):
        t = float(t)
        if t <= 0.0:
            return 0.0, False
        src = self.source
        return float((src.alpha * src.c ** src.alpha * t) ** (1.0 / src.alpha)), False


class _EnvelopeConjugate(ConjugateRate):
    """Conjugate of tabulated data: the upper envelope of the node lines
    s -> g_i * s - v_i, exact for the piecewise-linear extension."""

    def __init__(self, source: Tabulated, duality: str):
        super().__init__(source, duality)
        if source.grid.size < 3:
            raise InsufficientGrid("numeric conjugation needs at least 3 grid points")
        self._nodes = source.grid
        self._node_values = source.values_table

    def value(self, t):
        t = np.asarray(t, dtype=float)
        sup = np.max(np.multiply.outer(t, self._nodes) - self._node_values, axis=-1)
        return sup if sup.ndim else float(sup)

    def generalized_inverse_info(self, t):
        t = float(t)
        if t <= 0.0:
            return 0.0, False
        pos = self._nodes > 0.0
        if not np.any(pos):
            return 0.0, True
        # smallest s with max_i (g_i s - v_i) >= t
        s = np.min((t + self._node_values[pos]) / self._nodes[pos])
        return float(max(s, 0.0)), False


class ScaledRate(ConvexRate):
    """phi_n(lam) = phi(lam) / n, with conjugate accessors scaled accordingly."""

    kind = "scaled"

    def __init__(self, source: ConvexRate, n: int):
        if n < 1 or int(n) != n:
            raise ValueError("scaling factor n must be a positive integer")
        self.source = source
        self.n = int(n)

    def value(self, lam):
        return self.source.value(lam) / self.n

    def derivative(self, lam):
        return self.source.derivative(lam) / self.n

    def derivative_inverse(self, t):
        return self.source.derivative_inverse(np.asarray(t, dtype=float) * self.n)

    def describe(self) -> dict:
        return {"kind": self.kind, "n": self.n, "source": self.source.describe()}


class _ScaledConjugate(ConjugateRate):
    """(phi/n)*(t) = phi*(n t)/n and (phi_n*)^{-1}(t) = (1/n)(phi*)^{-1}(n t)."""

    def __init__(self, source: ScaledRate, duality: str):
        super().__init__(source, duality)
        self._inner = conjugate(source.source, duality)

    def value(self, t):
        n = self.source.n
        return self._inner.value(np.asarray(t, dtype=float) * n) / n

    def generalized_inverse_info(self, t):
        n = self.source.n
        value, saturated = self._inner.generalized_inverse_info(float(t) * n)
        return value / n, saturated


def conjugate(phi: ConvexRate, duality: str = LEGENDRE_FENCHEL) -> ConjugateRate:
    """The conjugate of a rate under the requested duality.

    Closed forms for Quadratic and Power, node envelope for Tabulated.
    """
    if isinstance(phi, Quadratic):
        return _QuadraticConjugate(phi, duality)
    if isinstance(phi, Power):
        return _PowerConjugate(phi, duality)
    if isinstance(phi, ScaledRate):
        return _ScaledConjugate(phi, duality)
    if isinstance(phi, Tabulated):
        return _EnvelopeConjugate(phi, duality)
    raise TypeError(f"cannot conjugate rate of type {type(phi).__name__}")


def generalized_inverse(conj: ConjugateRate, t: float) -> float:
    """inf{s >= 0 : conj.value(s) >= t}; returns 0 for t <= 0."""
    if not np.isfinite(t):
        raise ValueError("generalized inverse needs a finite argument")
    return conj.generalized_inverse(t)


def optimal_lambda(phi: ConvexRate, c: float) -> float:
    """The minimising lambda (phi')^{-1}((phi*)^{-1}(c)) of (phi(lam)+c)/lam.

    For Quadratic(s2) this is sqrt(2 c / s2).  Requires an invertible
    derivative; tabulated rates raise NotStrictlyConvex.
    """
    if c < 0:
        raise ValueError("the divergence-side constant must be nonnegative")
    t = conjugate(phi).generalized_inverse(c)
    return float(phi.derivative_inverse(t))


def scale_by_n(phi: ConvexRate, n: int) -> ScaledRate:
    """phi_n with phi_n(lam) = phi(lam)/n and scaled conjugate accessors."""
    return ScaledRate(phi, n)


def lambda_sweep_bound(phi: ConvexRate, c: float, grid) -> float:
    """min over the grid of (phi(lam) + c) / lam.

    Always an upper bound for the closed-form (phi*)^{-1}(c); equal within
    grid resolution.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise InsufficientGrid("lambda sweep needs a nonempty grid")
    if np.any(grid <= 0):
        raise ValueError("sweep grid must be strictly positive")
    if c < 0:
        raise ValueError("the divergence-side constant must be nonnegative")
    return float(np.min((phi.value(grid) + c) / grid))


def numeric_conjugate_value(phi: ConvexRate, t: float, grid=None, refine: bool = True) -> float:
    """sup over a lambda grid of lam*t - phi(lam), the numeric conjugate.

    A bounded scalar maximisation refines the bracketing cell around the best
    node (the objective is concave in lam, hence unimodal), which is what
    brings grid error below the 1e-6 relative contract.  Valid when the
    maximiser lies inside the grid span.
    """
    if grid is None:
        grid = DEFAULT_CONJUGATE_GRID
    grid = np.asarray(grid, dtype=float)
    if grid.size < 3:
        raise InsufficientGrid("numeric conjugation needs at least 3 grid points")
    objective = grid * t - phi.value(grid)
    best = int(np.argmax(objective))
    value = float(objective[best])
    value = max(value, 0.0)  # lam -> 0 endpoint contributes 0
    if refine:
        lo = grid[max(best - 1, 0)]
        hi = grid[min(best + 1, grid.size - 1)]
        if hi > lo:
            res = minimize_scalar(
                lambda lam: -(lam * t - float(phi.value(lam))),
                bounds=(lo, hi), method="bounded",
                options={"xatol": 1e-14 * max(1.0, hi)},
            )
            value = max(value, float(-res.fun))
    return value
