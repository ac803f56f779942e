"""Centralised numeric tolerances.

One frozen record holds every tolerance the invariants refer to, so test
suites and the CLI resolve to the same defaults.  Override per call by
passing a modified record where a function accepts ``tol=``.
"""
from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    # spaces
    metric_symmetry: float = 1e-12       # |d - d.T| entrywise
    triangle: float = 1e-12              # triangle inequality slack per triple
    probability_mass: float = 1e-10      # |sum(weights) - 1| for probability measures

    # convex rates
    convexity: float = 1e-9              # discrete second-difference convexity slack
    fenchel_young: float = 1e-10         # lam*t <= phi(lam) + phi*(t) slack
    generalized_inverse: float = 1e-9    # conj(ginv(t)) >= t - this
    scale_identity: float = 1e-10        # (phi_n*)^{-1}(t) = (1/n)(phi*)^{-1}(n t)
    sweep_vs_closed_rel: float = 1e-3    # lambda sweep vs closed-form bound (relative)
    numeric_conjugate_rel: float = 1e-6  # numeric vs closed-form conjugate (relative)

    # divergences
    dual_product_identity: float = 1e-10  # two evaluation orders of the product dual
    fenchel_gap: float = 1e-9             # allowed negative slack of the Fenchel gap
    data_processing: float = 1e-10        # allowed increase under a stochastic kernel

    # transport
    marginal_residual: float = 1e-9      # coupling-plan marginal error
    plan_entry: float = 1e-12            # entries below -this are rejected, else clamped
    duality_gap: float = 1e-8            # primal/dual agreement

    # inequality engine
    violation_slack: float = 1e-9        # slack below -this counts as a violation
    hypothesis_slack: float = 1e-10      # allowed excess in the dual-side pre-check
    subgaussian_certificate: float = 1e-12  # cgf <= lam^2 sigma^2/2 + this on the grid
    moment_certificate: float = 1e-9     # mu(|f|^beta) <= c^beta + this for the witness

    # learning
    marginal_exact: float = 1e-12        # joint-law marginal reproduction
    generic_pathway: float = 1e-12       # two code paths, one formula
    bound_domination: float = 1e-9       # bound >= |gen err| - this


TOLERANCES = Tolerances()


def with_overrides(**kwargs) -> Tolerances:
    """A copy of the default record with the given fields replaced."""
    return replace(TOLERANCES, **kwargs)
