"""Desk-scale learning experiments with exact enumeration.

A learning problem is a finite sample space with a data law, a finite
hypothesis set, a bounded loss table, and a sample size.  The Gibbs family
(prior exponentially tilted by negative empirical risk) is the canonical
algorithm: its kernel is closed-form and spans data independence (gamma = 0)
through empirical risk minimisation (gamma -> inf, uniform over ties).

Everything is enumerated exactly: the dataset space, the joint law of
(sample, hypothesis), per-sample joints, and the super-sample disintegration
behind the conditional bound.  Information quantities are in nats.  Joint
laws are kept as raw arrays; a dataset space of size |Z|**n has no use for a
dense metric matrix.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from . import convex
from .config import TOLERANCES, Tolerances
from .divergences import ChiSquareForm, KL, chi_square_between_weights, kl_between_weights
from .errors import BudgetExceeded
from .spaces import (
    DiscreteMeasure,
    FiniteMetricSpace,
    RealFunction,
    central_moment,
    label_space,
)
from .tci import subgaussian_fit

#: exact-enumeration size budget |Z|**n * |H|
ENUMERATION_BUDGET = 10_000_000


@dataclass
class LearningProblem:
    """Finite sample space, hypothesis labels, loss table, data law, n."""

    z_space: FiniteMetricSpace
    h_labels: tuple
    loss: np.ndarray          # shape (|H|, |Z|)
    data_law: DiscreteMeasure
    n: int

    def __post_init__(self):
        self.h_labels = tuple(str(h) for h in self.h_labels)
        self.loss = np.array(self.loss, dtype=float)
        n_z, n_h = self.z_space.n_points, len(self.h_labels)
        if self.loss.shape != (n_h, n_z):
            raise ValueError(f"loss table must be {n_h}x{n_z}, got {self.loss.shape}")
        if not np.all(np.isfinite(self.loss)):
            raise ValueError("loss entries must be finite")
        if not self.data_law.space.same_as(self.z_space):
            raise ValueError("data law must live on the sample space")
        if self.n < 1 or int(self.n) != self.n:
            raise ValueError("sample size n must be a positive integer")
        self.n = int(self.n)
        if n_z ** self.n * n_h > ENUMERATION_BUDGET:
            raise BudgetExceeded(
                f"|Z|^n * |H| = {n_z ** self.n * n_h} exceeds {ENUMERATION_BUDGET}"
            )
        self.loss.setflags(write=False)

    @classmethod
    def from_tables(cls, z_labels, h_labels, loss, p_z, n) -> "LearningProblem":
        """Convenience constructor from plain label lists and arrays."""
        space = label_space(z_labels)
        return cls(z_space=space, h_labels=tuple(h_labels), loss=np.asarray(loss, float),
                   data_law=DiscreteMeasure(space, p_z), n=int(n))

    @property
    def n_z(self) -> int:
        return self.z_space.n_points

    @property
    def n_h(self) -> int:
        return len(self.h_labels)

    @property
    def loss_range(self) -> tuple[float, float]:
        return float(self.loss.min()), float(self.loss.max())

    def true_risk(self) -> np.ndarray:
        """L_P(h) = P_Z(loss(h, .)) for every hypothesis."""
        return self.loss @ self.data_law.weights


@dataclass
class GibbsAlgorithm:
    """Posterior kernel P(h | s) proportional to prior(h) * exp(-gamma*n*L_s(h))."""

    prior: np.ndarray
    gamma: float

    def __post_init__(self):
        p = np.array(np.asarray(self.prior, dtype=float), dtype=float)
        if np.any(p < 0) or p.sum() <= 0:
            raise ValueError("prior weights must be nonnegative with positive mass")
        p = p / p.sum()
        p.setflags(write=False)
        self.prior = p
        self.gamma = float(self.gamma)
        if self.gamma < 0:
            raise ValueError("the inverse temperature gamma must be nonnegative")


@dataclass
class JointLaw:
    """Exact joint law of (dataset, hypothesis) plus cached loss tables."""

    problem: LearningProblem
    datasets: np.ndarray       # (S, n) index matrix into the sample space
    p_s: np.ndarray            # (S,) product weights of the data law
    kernel: np.ndarray         # (S, H) rows are posteriors
    p_sh: np.ndarray           # (S, H) joint
    p_h: np.ndarray            # (H,) output marginal
    empirical_risk: np.ndarray  # (S, H) L_s(h)

    def __post_init__(self, tol: Tolerances = TOLERANCES):
        if np.max(np.abs(self.p_sh.sum(axis=1) - self.p_s)) > tol.marginal_exact:
            raise ValueError("joint does not reproduce the dataset marginal")
        if np.max(np.abs(self.p_sh.sum(axis=0) - self.p_h)) > tol.marginal_exact:
            raise ValueError("joint does not reproduce the hypothesis marginal")

    def product_weights(self) -> np.ndarray:
        """The product law P_S x P_H as an (S, H) table."""
        return np.outer(self.p_s, self.p_h)


def _enumerate_datasets(n_z: int, n: int) -> np.ndarray:
    return np.array(list(itertools.product(range(n_z), repeat=n)), dtype=np.int64)


def _posterior_rows(problem: LearningProblem, alg: GibbsAlgorithm,
                    empirical_risk: np.ndarray) -> np.ndarray:
    """Stable softmax of log prior - gamma * n * L_s(h), row-wise."""
    logits = np.log(np.where(alg.prior > 0, alg.prior, 1.0))
    logits = np.where(alg.prior > 0, logits, -np.inf)
    scores = logits[None, :] - alg.gamma * problem.n * empirical_risk
    return np.exp(scores - logsumexp(scores, axis=1, keepdims=True))


def gibbs_kernel(problem: LearningProblem, alg: GibbsAlgorithm) -> JointLaw:
    """Enumerate every dataset and assemble the exact joint law."""
    if len(alg.prior) != problem.n_h:
        raise ValueError("prior length must match the hypothesis count")
    datasets = _enumerate_datasets(problem.n_z, problem.n)
    p_z = problem.data_law.weights
    p_s = np.prod(p_z[datasets], axis=1)
    # L_s(h) = mean over positions of loss(h, z_i)
    empirical = problem.loss[:, datasets].mean(axis=2).T  # (S, H)
    kernel = _posterior_rows(problem, alg, empirical)
    p_sh = p_s[:, None] * kernel
    p_h = p_sh.sum(axis=0)
    return JointLaw(problem=problem, datasets=datasets, p_s=p_s, kernel=kernel,
                    p_sh=p_sh, p_h=p_h, empirical_risk=empirical)


def gen_err_exact(law: JointLaw, problem: LearningProblem | None = None) -> float:
    """Signed expectation of L_S(H) - L_P(H) under the joint law."""
    problem = problem or law.problem
    gap = law.empirical_risk - problem.true_risk()[None, :]
    return float(np.sum(law.p_sh * gap))


def mutual_information(law: JointLaw) -> float:
    """I(S; H) = KL(P_SH || P_S x P_H) in nats, exactly."""
    return kl_between_weights(law.p_sh, law.product_weights())


def _max_subgaussian_constant(problem: LearningProblem,
                              grid: np.ndarray | None = None) -> float:
    """max over h of the grid-certified sub-Gaussian constant of loss(h, .)."""
    out = 0.0
    for h in range(problem.n_h):
        fit = subgaussian_fit(problem.data_law,
                              RealFunction(problem.z_space, problem.loss[h]), grid)
        out = max(out, fit.sigma_sq)
    return out


def _max_loss_variance(problem: LearningProblem) -> float:
    """max over h of Var_{P_Z}(loss(h, .)); the exact moment constant."""
    return max(
        central_moment(problem.data_law, RealFunction(problem.z_space, problem.loss[h]), 2)
        for h in range(problem.n_h)
    )


def mi_bound(law: JointLaw, problem: LearningProblem | None = None, *,
             sigma_sq: float | None = None) -> float:
    """sqrt(2 sigma^2 I(S;H) / n) with the per-hypothesis sub-Gaussian fit."""
    problem = problem or law.problem
    if sigma_sq is None:
        sigma_sq = _max_subgaussian_constant(problem)
    return math.sqrt(2.0 * sigma_sq * mutual_information(law) / problem.n)


def chi2_bound(law: JointLaw, problem: LearningProblem | None = None, *,
               moment_k: float | None = None) -> float:
    """sqrt(2 K (chi^2(P_SH || P_S P_H) + 1) / n) with K the max loss variance."""
    problem = problem or law.problem
    if moment_k is None:
        moment_k = _max_loss_variance(problem)
    chi2 = chi_square_between_weights(law.p_sh, law.product_weights())
    return math.sqrt(2.0 * moment_k * (chi2 + 1.0) / problem.n)


def per_sample_joints(law: JointLaw) -> list[np.ndarray]:
    """The (|Z|, |H|) joint of (Z_i, H) for each sample position i."""
    problem = law.problem
    out = []
    for i in range(problem.n):
        table = np.zeros((problem.n_z, problem.n_h))
        np.add.at(table, law.datasets[:, i], law.p_sh)
        out.append(table)
    return out


@dataclass(frozen=True)
class IsmiBound:
    """Per-sample decomposition bounds; two variants over the same joints."""

    mi_variant: float
    chi2_variant: float
    per_sample_mi: tuple
    per_sample_chi2: tuple


def ismi_bound(law: JointLaw, problem: LearningProblem | None = None, *,
               sigma_sq: float | None = None, moment_k: float | None = None) -> IsmiBound:
    """(1/n) sum_i sqrt(2 s^2 I(Z_i;H)) and its chi-square counterpart."""
    problem = problem or law.problem
    if sigma_sq is None:
        sigma_sq = _max_subgaussian_constant(problem)
    if moment_k is None:
        moment_k = _max_loss_variance(problem)
    p_z = problem.data_law.weights
    mis, chis = [], []
    for table in per_sample_joints(law):
        product = np.outer(p_z, law.p_h)
        mis.append(kl_between_weights(table, product))
        chis.append(chi_square_between_weights(table, product))
    n = problem.n
    mi_variant = sum(math.sqrt(2.0 * sigma_sq * v) for v in mis) / n
    chi2_variant = sum(math.sqrt(2.0 * moment_k * (c + 1.0)) for c in chis) / n
    return IsmiBound(mi_variant=mi_variant, chi2_variant=chi2_variant,
                     per_sample_mi=tuple(mis), per_sample_chi2=tuple(chis))


def cmi_budget_ok(problem: LearningProblem, n: int | None = None) -> bool:
    n = problem.n if n is None else int(n)
    return problem.n_z ** (2 * n) * 2 ** n * problem.n_h <= ENUMERATION_BUDGET


def cmi_bound(problem: LearningProblem, alg: GibbsAlgorithm,
              n: int | None = None) -> float:
    """Super-sample conditional bound E[sqrt(2 c(s~) D(...) / n)].

    For each super-sample of n pairs, a uniform selector picks one element
    per pair to form the training sample; D is the divergence of the
    conditional (sample, hypothesis) joint from the product of its marginals.
    The disintegrated constant c(s~) is the squared within-pair loss range
    max_{i,h} |loss(h, pair_i[1]) - loss(h, pair_i[0])|^2, which is what the
    ghost-pair concentration argument certifies.
    """
    n = problem.n if n is None else int(n)
    if not cmi_budget_ok(problem, n):
        raise BudgetExceeded("super-sample enumeration exceeds the size budget")
    p_z = problem.data_law.weights
    loss = problem.loss
    selectors = np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.int64)
    positions = np.arange(n)
    total = 0.0
    for tilde in itertools.product(range(problem.n_z), repeat=2 * n):
        weight = float(np.prod(p_z[list(tilde)]))
        if weight == 0.0:
            continue
        pairs = np.array([(tilde[i], tilde[n + i]) for i in range(n)], dtype=np.int64)
        # squared within-pair range over hypotheses and positions
        c_tilde = float(np.max(np.abs(loss[:, pairs[:, 1]] - loss[:, pairs[:, 0]]))) ** 2
        # every selection at once: (2^n, n) datasets, (2^n, H) posterior rows
        chosen = pairs[positions[None, :], selectors]
        empirical = loss[:, chosen].mean(axis=2).T
        rows = _posterior_rows(problem, alg, empirical) / len(selectors)
        # merge selections that produced the same dataset
        joint_by_dataset: dict[tuple, np.ndarray] = {}
        for dataset, row in zip(map(tuple, chosen), rows):
            acc = joint_by_dataset.setdefault(dataset, np.zeros(problem.n_h))
            acc += row
        joint = np.stack(list(joint_by_dataset.values()))
        p_sel = joint.sum(axis=1)
        p_hyp = joint.sum(axis=0)
        div = kl_between_weights(joint, np.outer(p_sel, p_hyp))
        total += weight * math.sqrt(2.0 * c_tilde * div / n)
    return total


@dataclass
class BoundReport:
    """Exact generalization error next to every applicable bound."""

    gen_err: float
    abs_gen_err: float
    mi_bound: float | None = None
    chi2_bound: float | None = None
    ismi_bound: float | None = None
    ismi_chi2_bound: float | None = None
    cmi_bound: float | None = None
    constants: dict = field(default_factory=dict)
    hypothesis_checks: dict = field(default_factory=dict)
    generic: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def clean(x):
            if isinstance(x, float) and not math.isfinite(x):
                return repr(x)
            return x

        return {
            "gen_err": self.gen_err,
            "abs_gen_err": self.abs_gen_err,
            "mi_bound": clean(self.mi_bound),
            "chi2_bound": clean(self.chi2_bound),
            "ismi_bound": clean(self.ismi_bound),
            "ismi_chi2_bound": clean(self.ismi_chi2_bound),
            "cmi_bound": clean(self.cmi_bound),
            "constants": {k: clean(v) for k, v in self.constants.items()},
            "hypothesis_checks": self.hypothesis_checks,
            "generic": {k: clean(v) for k, v in self.generic.items()},
        }


def bound_report(problem: LearningProblem, alg: GibbsAlgorithm, *,
                 bounds: tuple = ("mi", "chi2", "ismi", "cmi")) -> BoundReport:
    """Assemble the exact error and every requested bound for one config.

    The generic divergence pathway (sample-size scaling of a quadratic rate,
    then the generalized inverse of its conjugate) is evaluated alongside the
    closed-form bounds; the two must agree to float precision, which the test
    suite pins at 1e-12.
    """
    law = gibbs_kernel(problem, alg)
    gen = gen_err_exact(law, problem)
    sigma_sq = _max_subgaussian_constant(problem)
    moment_k = _max_loss_variance(problem)
    info = mutual_information(law)
    chi2 = chi_square_between_weights(law.p_sh, law.product_weights())
    lo, hi = problem.loss_range

    report = BoundReport(gen_err=gen, abs_gen_err=abs(gen))
    report.constants = {
        "sigma_sq": sigma_sq,
        "moment_k": moment_k,
        "moment_k_subgaussian_ceiling": 2.0 * sigma_sq * math.exp(2.0 / math.e),
        "hoeffding_sigma_sq": (hi - lo) ** 2 / 4.0,
        "mutual_information": info,
        "chi_square": chi2,
        # informational: the tilt the quadratic route optimises at, and the
        # threshold past which a sub-exponential squared loss would break it
        "lambda_star": math.sqrt(2.0 * info / sigma_sq) if sigma_sq > 0 else 0.0,
        "mi_validity_threshold": 1.0 / (32.0 * sigma_sq) if sigma_sq > 0 else math.inf,
        "mi_validity_ok": bool(sigma_sq == 0.0 or info < 1.0 / (32.0 * sigma_sq)),
    }
    # bounded losses always satisfy both moment hypotheses on a finite space
    report.hypothesis_checks = {
        "mi": sigma_sq >= 0.0,
        "chi2": moment_k >= 0.0,
        "ismi": sigma_sq >= 0.0 and moment_k >= 0.0,
    }

    if "mi" in bounds:
        report.mi_bound = mi_bound(law, problem, sigma_sq=sigma_sq)
    if "chi2" in bounds:
        report.chi2_bound = chi2_bound(law, problem, moment_k=moment_k)
    if "ismi" in bounds:
        ismi = ismi_bound(law, problem, sigma_sq=sigma_sq, moment_k=moment_k)
        report.ismi_bound = ismi.mi_variant
        report.ismi_chi2_bound = ismi.chi2_variant
    if "cmi" in bounds:
        if cmi_budget_ok(problem):
            report.cmi_bound = cmi_bound(problem, alg)
            report.hypothesis_checks["cmi"] = True
        else:
            report.cmi_bound = None
            report.hypothesis_checks["cmi"] = False

    # generic pathway: scaled rate, conjugate, generalized inverse
    if sigma_sq > 0.0:
        scaled = convex.scale_by_n(convex.Quadratic(sigma_sq), problem.n)
        report.generic["mi_bound"] = convex.conjugate(scaled).generalized_inverse(info)
    else:
        report.generic["mi_bound"] = 0.0
    if moment_k > 0.0:
        scaled = convex.scale_by_n(convex.Quadratic(2.0 * moment_k), problem.n)
        report.generic["chi2_bound"] = convex.conjugate(scaled).generalized_inverse(
            (chi2 + 1.0) / 2.0)
    else:
        report.generic["chi2_bound"] = 0.0
    return report


# ---------------------------------------------------------------------------
# the shipped experiment family
# ---------------------------------------------------------------------------

TINY_GIBBS_GAMMAS = (0.0, 0.5, 1.0, 2.0, 10.0, 1e6)


def tiny_gibbs_bases() -> list[dict]:
    """Base problem tables for the shipped sweep (before choosing n, gamma)."""
    return [
        {
            "name": "two-point-flip",
            "z_labels": ("z0", "z1"), "h_labels": ("h0", "h1"),
            "loss": [[0.0, 1.0], [1.0, 0.0]],
            "p_z": (0.5, 0.5), "prior": (0.5, 0.5),
            "n_values": (1, 2, 3, 4, 5, 6),
        },
        {
            "name": "two-point-skewed",
            "z_labels": ("z0", "z1"), "h_labels": ("h0", "h1", "h2"),
            "loss": [[0.0, 1.0], [1.0, 0.0], [0.4, 0.4]],
            "p_z": (0.7, 0.3), "prior": (0.5, 0.25, 0.25),
            "n_values": (1, 2, 3, 4, 5, 6),
        },
        {
            "name": "two-point-wide-loss",
            "z_labels": ("z0", "z1"), "h_labels": ("h0", "h1"),
            "loss": [[-1.0, 2.0], [1.5, -0.5]],
            "p_z": (0.4, 0.6), "prior": (0.5, 0.5),
            "n_values": (1, 2, 3, 4, 5, 6),
        },
        {
            "name": "three-point",
            "z_labels": ("a", "b", "c"), "h_labels": ("h0", "h1", "h2"),
            "loss": [[0.0, 0.5, 1.0], [1.0, 0.2, 0.0], [0.3, 0.9, 0.1]],
            "p_z": (0.5, 0.3, 0.2), "prior": (1 / 3, 1 / 3, 1 / 3),
            "n_values": (1, 2, 3, 4, 5),
        },
        {
            "name": "three-point-sharp",
            "z_labels": ("a", "b", "c"), "h_labels": ("h0", "h1"),
            "loss": [[0.0, 1.0, 0.25], [0.9, 0.05, 0.65]],
            "p_z": (0.2, 0.45, 0.35), "prior": (0.8, 0.2),
            "n_values": (1, 2, 3, 4, 5, 6),
        },
        {
            "name": "four-point",
            "z_labels": ("a", "b", "c", "d"), "h_labels": ("h0", "h1", "h2", "h3", "h4"),
            "loss": [
                [0.0, 0.25, 0.5, 1.0],
                [1.0, 0.5, 0.25, 0.0],
                [0.2, 0.8, 0.2, 0.8],
                [0.6, 0.1, 0.7, 0.3],
                [0.45, 0.45, 0.45, 0.55],
            ],
            "p_z": (0.4, 0.3, 0.2, 0.1), "prior": (0.2, 0.2, 0.2, 0.2, 0.2),
            "n_values": (1, 2, 3, 4),
        },
        {
            "name": "four-point-uniform",
            "z_labels": ("a", "b", "c", "d"), "h_labels": ("h0", "h1", "h2"),
            "loss": [[0.0, 0.0, 1.0, 1.0], [1.0, 1.0, 0.0, 0.0], [0.5, 0.1, 0.5, 0.9]],
            "p_z": (0.25, 0.25, 0.25, 0.25), "prior": (0.4, 0.4, 0.2),
            "n_values": (1, 2, 3, 4),
        },
    ]


def tiny_gibbs_configs(gammas=TINY_GIBBS_GAMMAS):
    """Yield (name, LearningProblem, GibbsAlgorithm) over the shipped family."""
    for base in tiny_gibbs_bases():
        for n in base["n_values"]:
            problem = LearningProblem.from_tables(
                base["z_labels"], base["h_labels"], base["loss"], base["p_z"], n)
            for gamma in gammas:
                alg = GibbsAlgorithm(prior=np.asarray(base["prior"], float), gamma=gamma)
                yield f"{base['name']}/n={n}/gamma={gamma:g}", problem, alg
