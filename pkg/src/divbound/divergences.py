"""phi-divergences on discrete measures and their dual functionals.

A divergence is ``D(nu || mu) = sum_i mu_i * generator(nu_i / mu_i)`` over the
support of ``mu``; mass of ``nu`` outside that support contributes through the
generator's slope at infinity (``+inf`` for superlinear generators, a finite
rate for total variation).  Conventions: ``0 * log 0 = 0``,
``0 * generator(0/0) = 0``, natural logarithms throughout (values in nats).

Duals follow the change-of-measure shape ``psi_mu(f) = mu(generator*(f))``,
with the Donsker-Varadhan form ``log mu(exp f)`` for KL (the restriction of
the KL dual to probability measures; the unnormalised variant
``mu(exp f) - 1`` is not used by anything downstream and is intentionally not
given its own operation).  No dual ships for total variation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import Infinite, SpaceMismatch, UnsupportedDual
from .spaces import DiscreteMeasure, RealFunction, require_shared_space


class DivergenceKind:
    """A convex generator plus the metadata the calculators need."""

    name = "abstract"
    #: generator growth rate at infinity; inf means support violations blow up
    slope_at_infinity = math.inf

    def generator(self, x):
        raise NotImplementedError

    def dual(self, weights: np.ndarray, values: np.ndarray) -> float:
        """psi_mu(f) evaluated from raw weight/value arrays."""
        raise UnsupportedDual(f"no dual functional for kind {self.name!r}")

    def cli_name(self) -> str:
        return self.name

    def __repr__(self) -> str:
        return f"DivergenceKind({self.cli_name()})"


class KL(DivergenceKind):
    """Generator x log x; the divergence of probability pairs is KL in nats."""

    name = "kl"

    def generator(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0.0, x * np.log(np.where(x > 0.0, x, 1.0)), 0.0)

    def dual(self, weights, values):
        # Donsker-Varadhan: log mu(exp f)
        return float(logsumexp(values, b=weights))


class TotalVariation(DivergenceKind):
    """Generator |x - 1|; off-support mass enters at unit rate (stays finite)."""

    name = "tv"
    slope_at_infinity = 1.0

    def generator(self, x):
        return np.abs(np.asarray(x, dtype=float) - 1.0)


class ChiSquareForm(DivergenceKind):
    """Generator x**2/2; equals (chi^2 + 1)/2 exactly on probability pairs."""

    name = "chi2form"

    def generator(self, x):
        return np.square(x) / 2.0

    def dual(self, weights, values):
        return 0.5 * float(np.dot(weights, np.square(values)))


class Hellinger(DivergenceKind):
    """Generator |x|**alpha / alpha for alpha > 1 or alpha in (0, 1).

    For alpha > 1 the generator is convex and the dual is the beta-th moment
    ``mu(|f|**beta)/beta`` with ``beta = alpha/(alpha-1)``.  For alpha in
    (0, 1) the generator is concave, the integral is still well defined (and
    finite across support violations), but no dual functional is provided.
    """

    name = "hellinger"

    def __init__(self, alpha: float):
        alpha = float(alpha)
        if not (alpha > 1.0 or 0.0 < alpha < 1.0):
            raise ValueError(f"alpha must be > 1 or in (0, 1), got {alpha}")
        self.alpha = alpha
        self.slope_at_infinity = math.inf if alpha > 1.0 else 0.0

    @property
    def beta(self) -> float:
        if self.alpha <= 1.0:
            raise UnsupportedDual("the moment dual needs alpha > 1")
        return self.alpha / (self.alpha - 1.0)

    def generator(self, x):
        return np.abs(np.asarray(x, dtype=float)) ** self.alpha / self.alpha

    def dual(self, weights, values):
        beta = self.beta
        return float(np.dot(weights, np.abs(values) ** beta)) / beta

    def cli_name(self) -> str:
        return f"hellinger:{self.alpha:g}"


def kind_from_name(name: str) -> DivergenceKind:
    """Parse a CLI-facing kind name: kl | tv | chi2form | hellinger:<alpha>."""
    name = name.strip().lower()
    if name == "kl":
        return KL()
    if name == "tv":
        return TotalVariation()
    if name == "chi2form":
        return ChiSquareForm()
    if name.startswith("hellinger:"):
        return Hellinger(float(name.split(":", 1)[1]))
    raise ValueError(f"unknown divergence kind {name!r}")


@dataclass(frozen=True)
class DivergenceValue:
    """A divergence evaluation: possibly +inf, with the support verdict."""

    value: float
    kind: DivergenceKind
    absolutely_continuous: bool

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)


def divergence(kind: DivergenceKind, nu: DiscreteMeasure, mu: DiscreteMeasure) -> DivergenceValue:
    """D(nu || mu) = sum_{mu_i > 0} mu_i * generator(nu_i / mu_i) (+ tail term).

    ``mu`` must be a probability measure; ``nu`` only needs nonnegative
    weights.  Mass of ``nu`` off the support of ``mu`` makes the value +inf
    for superlinear generators and enters at ``slope_at_infinity`` otherwise.
    """
    require_shared_space(nu, mu)
    if not mu.is_probability:
        raise ValueError("the reference measure mu must be a probability measure")
    w, v = mu.weights, nu.weights
    on = w > 0.0
    ratio = np.zeros_like(v)
    ratio[on] = v[on] / w[on]
    value = float(np.dot(w[on], kind.generator(ratio[on])))
    escaped = float(v[~on].sum())
    ac = escaped == 0.0
    if not ac:
        if math.isinf(kind.slope_at_infinity):
            value = math.inf
        else:
            value += kind.slope_at_infinity * escaped
    return DivergenceValue(value=value, kind=kind, absolutely_continuous=ac)


def total_variation(nu: DiscreteMeasure, mu: DiscreteMeasure) -> float:
    """sup_A |nu(A) - mu(A)| = half the L1 distance.

    This is the convention under which W1 on a 0/1 metric equals TV exactly;
    the raw generator form (twice this value) is available through
    ``divergence(TotalVariation(), nu, mu)``.
    """
    require_shared_space(nu, mu)
    if not (nu.is_probability and mu.is_probability):
        raise ValueError("total variation is defined for probability pairs")
    return 0.5 * float(np.abs(nu.weights - mu.weights).sum())


def chi_square(nu: DiscreteMeasure, mu: DiscreteMeasure) -> float:
    """chi^2(nu || mu) = sum (nu_i - mu_i)^2 / mu_i; requires nu << mu."""
    require_shared_space(nu, mu)
    w, v = mu.weights, nu.weights
    if np.any((w == 0.0) & (v > 0.0)):
        raise Infinite("nu places mass where mu does not; chi-square is infinite")
    on = w > 0.0
    return float(np.sum((v[on] - w[on]) ** 2 / w[on]))


def dual_psi(kind: DivergenceKind, mu: DiscreteMeasure, f: RealFunction) -> float:
    """The dual functional psi_mu(f) for the given kind.

    KL -> log mu(exp f); chi2form -> mu(f^2)/2; hellinger(alpha > 1) ->
    mu(|f|^beta)/beta.  Total variation has no dual here.
    """
    require_shared_space(mu, f)
    return kind.dual(mu.weights, f.values)


def fenchel_gap(kind: DivergenceKind, mu: DiscreteMeasure, nu: DiscreteMeasure,
                f: RealFunction) -> float:
    """D(nu||mu) - [nu(f) - psi_mu(f)]; nonnegative by Fenchel duality."""
    require_shared_space(mu, nu, f)
    d = divergence(kind, nu, mu).value
    pairing = float(np.dot(nu.weights, f.values))
    return d - (pairing - dual_psi(kind, mu, f))


def product_dual_identity_check(kind: DivergenceKind, mu: DiscreteMeasure,
                                xi: DiscreteMeasure, f_joint: RealFunction) -> float:
    """Discrepancy between the two evaluation orders of the product dual.

    For moment-style duals: psi_{mu x xi}(f) = xi(psi_mu(f(., h))).  For KL
    the iterated form exponentiates the inner value first:
    exp(psi_{mu x xi}(f)) = xi(exp(psi_mu(f(., h)))).  ``f_joint`` lives on
    the product space, row-major with the mu index outermost.  Returns the
    absolute discrepancy (contract: <= 1e-10).
    """
    n_mu, n_xi = mu.space.n_points, xi.space.n_points
    if f_joint.space.n_points != n_mu * n_xi:
        raise SpaceMismatch(
            f"joint function has {f_joint.space.n_points} values, expected {n_mu * n_xi}"
        )
    table = f_joint.values.reshape(n_mu, n_xi)
    joint_weights = np.outer(mu.weights, xi.weights).ravel()
    joint_value = kind.dual(joint_weights, f_joint.values)

    if isinstance(kind, KL):
        # log xi(exp(inner)) with inner = log mu(exp f(., h)), kept in log space
        inner = np.array([logsumexp(table[:, h], b=mu.weights) for h in range(n_xi)])
        iterated = float(logsumexp(inner, b=xi.weights))
    else:
        inner = np.array([kind.dual(mu.weights, table[:, h]) for h in range(n_xi)])
        iterated = float(np.dot(xi.weights, inner))
    return abs(joint_value - iterated)


# ---------------------------------------------------------------------------
# Array-level kernels.  The learning module works on joint laws far larger
# than anything worth wrapping in DiscreteMeasure objects, so the two
# divergences it needs are exposed on raw weight arrays as well.
# ---------------------------------------------------------------------------

def kl_between_weights(nu_w: np.ndarray, mu_w: np.ndarray) -> float:
    """KL(nu || mu) in nats from raw weight arrays; inf on support violation."""
    nu_w = np.asarray(nu_w, dtype=float).ravel()
    mu_w = np.asarray(mu_w, dtype=float).ravel()
    if np.any((mu_w == 0.0) & (nu_w > 0.0)):
        return math.inf
    on = nu_w > 0.0
    return float(np.sum(nu_w[on] * np.log(nu_w[on] / mu_w[on])))


def chi_square_between_weights(nu_w: np.ndarray, mu_w: np.ndarray) -> float:
    """chi^2(nu || mu) from raw weight arrays; inf on support violation."""
    nu_w = np.asarray(nu_w, dtype=float).ravel()
    mu_w = np.asarray(mu_w, dtype=float).ravel()
    if np.any((mu_w == 0.0) & (nu_w > 0.0)):
        return math.inf
    on = mu_w > 0.0
    return float(np.sum((nu_w[on] - mu_w[on]) ** 2 / mu_w[on]))
