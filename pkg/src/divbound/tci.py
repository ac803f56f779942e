"""The inequality engine: forward bounds, converse checks, constants, sweeps.

The forward direction turns a divergence value into an upper bound on
``nu(f) - mu(f)`` through the generalized inverse of a rate's conjugate; the
converse direction starts from a transport-style inequality holding for all
``nu`` and checks the implied bound on the dual functional over a lambda
grid.  Constants are estimated from data: ``subgaussian_fit`` certifies the
smallest quadratic dominating a centered cumulant generating function on a
grid, ``moment_constant`` searches the 1-Lipschitz polytope for the largest
centered beta-th moment (the convex objective attains its maximum at a
vertex, so the search hops between vertices via linear programs with random
restarts).

Every flagged violation is recomputed in extended precision (mpmath) before
it is reported, separating float noise from genuine counterexamples.  Trials
use per-index child streams of the master seed, so runs are bit-reproducible
regardless of the thread count (capped by DIVBOUND_THREADS).
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np
from scipy.optimize import linprog
from scipy.special import logsumexp

from . import convex
from .config import TOLERANCES, Tolerances
from .divergences import (
    KL,
    ChiSquareForm,
    DivergenceKind,
    Hellinger,
    TotalVariation,
    divergence,
)
from .errors import (
    Infinite,
    InsufficientBudget,
    InsufficientGrid,
    InternalError,
    NotStrictlyConvex,
    PositivityViolation,
)
from .spaces import (
    DiscreteMeasure,
    RealFunction,
    SeededRng,
    expectation,
    require_shared_space,
)
from .transport import w1_dual, wasserstein

DEFAULT_GRID_SPAN = (1e-4, 1e2)
DEFAULT_GRID_POINTS = 512


def lambda_grid(lo: float = DEFAULT_GRID_SPAN[0], hi: float = DEFAULT_GRID_SPAN[1],
                points: int = DEFAULT_GRID_POINTS, sign_symmetric: bool = False) -> np.ndarray:
    """Log-spaced lambda grid; sign-symmetric variants mirror across zero."""
    if points < 1:
        raise InsufficientGrid("a lambda grid needs at least one point")
    g = np.geomspace(lo, hi, points)
    if sign_symmetric:
        g = np.concatenate([-g[::-1], g])
    return g


def _thread_count(threads: int | None) -> int:
    if threads is None:
        raw = os.environ.get("DIVBOUND_THREADS", "1")
        try:
            threads = int(raw)
        except ValueError:
            threads = 1
    return max(1, int(threads))


def _map_trials(fn, count: int, threads: int | None):
    """Apply fn(0..count-1) preserving order; parallel when threads > 1."""
    workers = _thread_count(threads)
    if workers <= 1 or count <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(count)))


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SubGaussianFit:
    """Grid-certified quadratic dominating a centered CGF.

    Certifies cgf(mu, f, lam) <= lam**2 * sigma_sq / 2 for every grid lam.
    """

    sigma_sq: float
    lambda_grid: np.ndarray
    max_ratio_at: float


def subgaussian_fit(mu: DiscreteMeasure, f: RealFunction,
                    grid: np.ndarray | None = None) -> SubGaussianFit:
    """The minimal grid-certified sub-Gaussian constant of f under mu.

    sigma_sq = max over grid lambdas of 2 * cgf(mu, f, lam) / lam**2.  The
    grid must carry both signs: the hypothesis quantifies over all real lam,
    and the signed maximum also keeps the fit at or above the variance.
    """
    if grid is None:
        grid = lambda_grid(sign_symmetric=True)
    grid = np.asarray(grid, dtype=float)
    grid = grid[grid != 0.0]
    if grid.size == 0:
        raise InsufficientGrid("subgaussian_fit needs a nonempty lambda grid")
    if not (np.any(grid > 0) and np.any(grid < 0)):
        raise InsufficientGrid("the fit grid must span negative and positive lambda")
    require_shared_space(mu, f)
    dev = f.values - expectation(mu, f)
    cgf_vals = _log_mgf_grid(mu.weights, dev, grid)
    ratios = 2.0 * cgf_vals / grid ** 2
    best = int(np.argmax(ratios))
    sigma_sq = max(float(ratios[best]), 0.0)
    return SubGaussianFit(sigma_sq=sigma_sq, lambda_grid=grid, max_ratio_at=float(grid[best]))


@dataclass(frozen=True)
class MomentConstant:
    """Certified lower bound on the Lipschitz moment constant.

    c = mu(|witness|**beta)**(1/beta) for the best centered 1-Lipschitz
    witness found; the true constant is the maximum over the whole polytope.
    """

    c: float
    beta: float
    witness_f: RealFunction


def lipschitz_projected(values: np.ndarray, metric: np.ndarray) -> np.ndarray:
    """The largest 1-Lipschitz function below the data: min_j values_j + d(., j)."""
    values = np.asarray(values, dtype=float)
    return np.min(values[None, :] + metric, axis=1)


def moment_constant(mu: DiscreteMeasure, beta: float, search_budget: int,
                    rng: SeededRng) -> MomentConstant:
    """max mu(|f|**beta)**(1/beta) over centered 1-Lipschitz f, by search.

    The objective is convex, so the maximum sits at a vertex of the polytope
    {f : f_i - f_j <= d_ij, mu(f) = 0}.  Each linear program lands on a
    vertex; hops follow the objective gradient until no vertex improves, and
    restarts (centered distance functions, then ``search_budget`` random
    directions) cover the vertex set.  The result is a certified lower bound
    on the true constant.
    """
    if beta <= 1.0:
        raise ValueError(f"beta must exceed 1, got {beta}")
    if search_budget < 1:
        raise InsufficientBudget("moment search needs a positive budget")
    space = mu.space
    n = space.n_points
    if n > 16:
        raise ValueError("moment search is restricted to spaces of at most 16 points")
    if n == 1:
        return MomentConstant(c=0.0, beta=float(beta),
                              witness_f=RealFunction(space, np.zeros(1)))

    d = space.metric
    w = mu.weights
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    a_ub = np.zeros((len(pairs), n))
    b_ub = np.empty(len(pairs))
    for r, (i, j) in enumerate(pairs):
        a_ub[r, i] = 1.0
        a_ub[r, j] = -1.0
        b_ub[r] = d[i, j]
    a_eq = w[None, :]
    b_eq = np.zeros(1)

    def vertex_for(direction: np.ndarray) -> np.ndarray:
        res = linprog(-direction, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
                      bounds=[(None, None)] * n, method="highs-ds")
        if res.status != 0:
            raise InternalError(f"moment-search LP failed: {res.message}")
        return np.asarray(res.x, dtype=float)

    def objective(x: np.ndarray) -> float:
        return float(np.dot(w, np.abs(x) ** beta))

    def gradient(x: np.ndarray) -> np.ndarray:
        return beta * w * np.abs(x) ** (beta - 1.0) * np.sign(x)

    gen = rng.generator
    directions = []
    for i in range(n):
        g = d[i] - np.dot(w, d[i])
        directions.append(gradient(g) if np.any(g) else g)
        directions.append(-directions[-1])
    for _ in range(int(search_budget)):
        directions.append(gen.standard_normal(n))

    best_val = -1.0
    best_x = np.zeros(n)
    for direction in directions:
        if not np.any(direction):
            direction = gen.standard_normal(n)
        x = vertex_for(direction)
        val = objective(x)
        for _ in range(64):
            grad = gradient(x)
            if not np.any(grad):
                break
            y = vertex_for(grad)
            improved = objective(y)
            if improved > val + 1e-13:
                x, val = y, improved
            else:
                break
        if val > best_val:
            best_val, best_x = val, x
    c = best_val ** (1.0 / beta) if best_val > 0.0 else 0.0
    return MomentConstant(c=float(c), beta=float(beta),
                          witness_f=RealFunction(space, best_x))


def _log_mgf_grid(weights: np.ndarray, values: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """log sum w exp(lam v) across a lambda grid; log1p path for small rows."""
    table = np.outer(grid, values)
    out = np.empty(grid.size)
    small = table.max(axis=1) < 30.0
    if np.any(small):
        out[small] = np.log1p(np.expm1(table[small]) @ weights)
    if np.any(~small):
        out[~small] = logsumexp(table[~small], b=weights[None, :], axis=1)
    return out


def _dual_psi_grid(kind: DivergenceKind, weights: np.ndarray, g_vals: np.ndarray,
                   grid: np.ndarray) -> np.ndarray:
    """psi_mu(lam * g) for every lambda on the grid, vectorised per kind.

    Moment duals scale as a power of |lam|; the KL dual needs a full
    log-mgf evaluation per lambda, done in one shot over an outer product.
    """
    if isinstance(kind, KL):
        return _log_mgf_grid(weights, g_vals, grid)
    if isinstance(kind, ChiSquareForm):
        return 0.5 * float(np.dot(weights, g_vals ** 2)) * grid ** 2
    if isinstance(kind, Hellinger):
        beta = kind.beta
        return float(np.dot(weights, np.abs(g_vals) ** beta)) / beta * np.abs(grid) ** beta
    # fall back to the scalar dual (raises UnsupportedDual for TV)
    return np.array([kind.dual(weights, lam * g_vals) for lam in grid])


# ---------------------------------------------------------------------------
# forward bound
# ---------------------------------------------------------------------------

def forward_bound(kind: DivergenceKind, phi: convex.ConvexRate,
                  mu: DiscreteMeasure, nu: DiscreteMeasure,
                  duality: str = convex.LEGENDRE_FENCHEL) -> float:
    """(phi*)^{-1} evaluated at D(nu || mu): the divergence-to-mean bound.

    Licensed when the positivity condition (phi')^{-1}((phi*)^{-1}(D)) > 0
    holds; a zero divergence makes the bound zero, which is valid on its own.
    Raises Infinite on support violations and PositivityViolation when the
    licence fails at positive divergence.
    """
    dv = divergence(kind, nu, mu)
    if not dv.is_finite:
        raise Infinite("the divergence is infinite; the bound does not apply")
    conj = convex.conjugate(phi, duality)
    bound = conj.generalized_inverse(dv.value)
    if dv.value > 0.0:
        try:
            lam_star = float(phi.derivative_inverse(bound))
        except NotStrictlyConvex:
            lam_star = None  # cannot verify; shipped closed-form kinds never land here
        if lam_star is not None and not lam_star > 0.0:
            raise PositivityViolation(
                f"optimal lambda {lam_star} is not positive at divergence {dv.value}"
            )
    return float(bound)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass
class TciReport:
    """Outcome of a trial sweep: violations counted at slack < -1e-9 only."""

    trials: int
    violations: int
    skipped: int
    worst_slack: float
    witnesses: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        def clean(x):
            if isinstance(x, float) and not math.isfinite(x):
                return repr(x)
            return x

        return {
            "trials": self.trials,
            "violations": self.violations,
            "skipped": self.skipped,
            "worst_slack": clean(self.worst_slack),
            "witnesses": self.witnesses,
            "config": self.config,
        }


def _random_measure_on_support(mu: DiscreteMeasure, rng: SeededRng,
                               floor: float) -> DiscreteMeasure:
    """Random probability measure carried by the support of mu (so nu << mu)."""
    idx = np.flatnonzero(mu.weights > 0.0)
    m = idx.size
    full = np.zeros(mu.space.n_points)
    if m == 1:
        full[idx[0]] = 1.0
        return DiscreteMeasure(mu.space, full)
    if not 0.0 <= floor < 1.0 / m:
        raise ValueError(f"floor must be in [0, 1/{m}) for this support")
    sub = rng.generator.dirichlet(np.ones(m))
    full[idx] = (1.0 - m * floor) * sub + floor
    return DiscreteMeasure(mu.space, full)


# ---------------------------------------------------------------------------
# extended-precision rechecks
# ---------------------------------------------------------------------------

_MP_DPS = 50


def _mp_divergence(kind: DivergenceKind, nu_w, mu_w):
    with mp.workdps(_MP_DPS):
        total = mp.mpf(0)
        for v, w in zip(nu_w, mu_w):
            v, w = mp.mpf(float(v)), mp.mpf(float(w))
            if w == 0:
                if v > 0 and math.isinf(kind.slope_at_infinity):
                    return mp.inf
                if v > 0:
                    total += kind.slope_at_infinity * v
                continue
            r = v / w
            if isinstance(kind, KL):
                total += v * mp.log(r) if v > 0 else 0
            elif isinstance(kind, ChiSquareForm):
                total += w * r ** 2 / 2
            elif isinstance(kind, Hellinger):
                total += w * abs(r) ** mp.mpf(kind.alpha) / mp.mpf(kind.alpha)
            elif isinstance(kind, TotalVariation):
                total += w * abs(r - 1)
            else:
                return None
        return total


def _mp_generalized_inverse(phi: convex.ConvexRate, t):
    with mp.workdps(_MP_DPS):
        t = mp.mpf(float(t)) if not isinstance(t, mp.mpf) else t
        if t <= 0:
            return mp.mpf(0)
        if isinstance(phi, convex.Quadratic):
            return mp.sqrt(2 * mp.mpf(phi.c) * t)
        if isinstance(phi, convex.Power):
            alpha = mp.mpf(phi.beta) / (mp.mpf(phi.beta) - 1)
            return (alpha * mp.mpf(phi.c) ** alpha * t) ** (1 / alpha)
        if isinstance(phi, convex.ScaledRate):
            inner = _mp_generalized_inverse(phi.source, t * phi.n)
            return inner / phi.n if inner is not None else None
        return None


def _confirm_forward_violation(kind, phi, mu_w, nu_w, f_vals, tol) -> bool:
    """True when extended precision confirms lhs > bound + tol."""
    d = _mp_divergence(kind, nu_w, mu_w)
    if d is None:
        return True  # cannot recheck; trust the float arithmetic
    if d == mp.inf:
        return False
    bound = _mp_generalized_inverse(phi, d)
    if bound is None:
        return True
    with mp.workdps(_MP_DPS):
        lhs = mp.fsum(
            (mp.mpf(float(nv)) - mp.mpf(float(mv))) * mp.mpf(float(fv))
            for nv, mv, fv in zip(nu_w, mu_w, f_vals)
        )
        return lhs - bound > mp.mpf(tol)


def _mp_dual_excess(kind, phi, mu_w, g_vals, lam) -> float | None:
    """psi_mu(lam * g) - phi(lam) in extended precision, or None if unsupported."""
    with mp.workdps(_MP_DPS):
        lam = mp.mpf(float(lam))
        if isinstance(kind, KL):
            psi = mp.log(mp.fsum(
                mp.mpf(float(w)) * mp.exp(lam * mp.mpf(float(g)))
                for w, g in zip(mu_w, g_vals)
            ))
        elif isinstance(kind, ChiSquareForm):
            psi = mp.fsum(
                mp.mpf(float(w)) * (lam * mp.mpf(float(g))) ** 2
                for w, g in zip(mu_w, g_vals)
            ) / 2
        elif isinstance(kind, Hellinger):
            beta = mp.mpf(kind.alpha) / (mp.mpf(kind.alpha) - 1)
            psi = mp.fsum(
                mp.mpf(float(w)) * abs(lam * mp.mpf(float(g))) ** beta
                for w, g in zip(mu_w, g_vals)
            ) / beta
        else:
            return None
        if isinstance(phi, convex.Quadratic):
            phival = mp.mpf(phi.c) * lam ** 2 / 2
        elif isinstance(phi, convex.Power):
            phival = abs(mp.mpf(phi.c) * lam) ** mp.mpf(phi.beta) / mp.mpf(phi.beta)
        elif isinstance(phi, convex.ScaledRate) and isinstance(phi.source, (convex.Quadratic, convex.Power)):
            inner = _mp_dual_excess(kind, phi.source, mu_w, g_vals, lam)
            if inner is None:
                return None
            src = phi.source
            srcval = (mp.mpf(src.c) * lam ** 2 / 2 if isinstance(src, convex.Quadratic)
                      else abs(mp.mpf(src.c) * lam) ** mp.mpf(src.beta) / mp.mpf(src.beta))
            return float(mp.mpf(inner) + srcval - srcval / phi.n)
        else:
            return None
        return float(psi - phival)


# ---------------------------------------------------------------------------
# verification sweeps
# ---------------------------------------------------------------------------

def verify_forward(kind: DivergenceKind, phi: convex.ConvexRate, mu: DiscreteMeasure,
                   f: RealFunction, rng: SeededRng, trials: int, *,
                   floor: float = 1e-3, grid: np.ndarray | None = None,
                   tol: Tolerances = TOLERANCES, threads: int | None = None) -> TciReport:
    """Sample random nu << mu and count violations of the forward bound.

    Pre-checks the dual-side hypothesis psi_mu(lam (f - mu(f))) <= phi(lam)
    over a positive lambda grid; when the pre-check fails, all trials are
    skipped and reported as such.  With the pre-check passed, the contract is
    zero violations; any counterexample is recomputed in extended precision
    before it is believed.
    """
    require_shared_space(mu, f)
    if grid is None:
        grid = lambda_grid()
    grid = np.asarray(grid, dtype=float)
    g_vals = f.values - expectation(mu, f)
    psi_vals = _dual_psi_grid(kind, mu.weights, g_vals, grid)
    excess = float(np.max(psi_vals - np.asarray(phi.value(grid), dtype=float)))
    config = {
        "kind": kind.cli_name(), "phi": phi.describe(), "trials": trials,
        "seed": rng.seed, "floor": floor, "hypothesis_excess": excess,
    }
    if excess > tol.hypothesis_slack:
        return TciReport(trials=0, violations=0, skipped=trials,
                         worst_slack=math.inf, config=config)

    def one(t: int):
        child = rng.child(t)
        nu = _random_measure_on_support(mu, child, floor)
        lhs = float(np.dot(nu.weights - mu.weights, f.values))
        bound = forward_bound(kind, phi, mu, nu)
        slack = bound - lhs
        witness = None
        confirmed = False
        if slack < -tol.violation_slack:
            confirmed = _confirm_forward_violation(
                kind, phi, mu.weights, nu.weights, f.values, tol.violation_slack)
            if confirmed:
                witness = {"trial": t, "slack": slack, "lhs": lhs, "bound": bound,
                           "nu": nu.weights.tolist()}
        return slack, confirmed, witness

    results = _map_trials(one, trials, threads)
    slacks = [r[0] for r in results]
    witnesses = [r[2] for r in results if r[2] is not None]
    return TciReport(
        trials=trials, violations=len(witnesses), skipped=0,
        worst_slack=min(slacks) if slacks else math.inf,
        witnesses=witnesses, config=config,
    )


def verify_converse(kind: DivergenceKind, phi: convex.ConvexRate, mu: DiscreteMeasure,
                    f_family_sampler, rng: SeededRng, trials: int, *,
                    grid: np.ndarray | None = None, sign_symmetric: bool | None = None,
                    forward_check_trials: int = 8, floor: float = 1e-3,
                    tol: Tolerances = TOLERANCES, threads: int | None = None) -> TciReport:
    """Check the dual-side inequality psi_mu(lam f) <= phi(lam) over sampled f.

    Functions are centered internally.  A small forward pre-check per trial
    (random nu against the generalized-inverse bound) is recorded in the
    config echo; the converse contract is zero violations whenever the
    forward inequality holds with the exact constant.
    """
    if sign_symmetric is None:
        sign_symmetric = isinstance(kind, KL)
    if grid is None:
        grid = lambda_grid(sign_symmetric=sign_symmetric)
    grid = np.asarray(grid, dtype=float)
    grid = grid[grid != 0.0]
    if grid.size == 0:
        raise InsufficientGrid("converse checks need a nonempty lambda grid")

    forward_failures = [0]

    def one(t: int):
        trial_rng = rng.child(t)
        f = f_family_sampler(trial_rng.child(0))
        require_shared_space(mu, f)
        g_vals = f.values - expectation(mu, f)
        psi_vals = _dual_psi_grid(kind, mu.weights, g_vals, grid)
        phi_vals = np.asarray(phi.value(grid), dtype=float)
        slacks = phi_vals - psi_vals
        worst = float(np.min(slacks))
        witness = None
        if worst < -tol.violation_slack:
            lam_worst = float(grid[int(np.argmin(slacks))])
            hp = _mp_dual_excess(kind, phi, mu.weights, g_vals, lam_worst)
            if hp is None or hp > tol.violation_slack:
                witness = {"trial": t, "slack": worst, "lambda": lam_worst,
                           "f": f.values.tolist()}
        fails = 0
        check_rng = trial_rng.child(1)
        for j in range(forward_check_trials):
            nu = _random_measure_on_support(mu, check_rng.child(j), floor)
            lhs = float(np.dot(nu.weights - mu.weights, f.values))
            if lhs > forward_bound(kind, phi, mu, nu) + tol.violation_slack:
                fails += 1
        return worst, witness, fails

    results = _map_trials(one, trials, threads)
    worsts = [r[0] for r in results]
    witnesses = [r[1] for r in results if r[1] is not None]
    forward_failures[0] = sum(r[2] for r in results)
    config = {
        "kind": kind.cli_name(), "phi": phi.describe(), "trials": trials,
        "seed": rng.seed, "forward_precheck_failures": forward_failures[0],
        "sign_symmetric": sign_symmetric,
    }
    return TciReport(
        trials=trials, violations=len(witnesses), skipped=0,
        worst_slack=min(worsts) if worsts else math.inf,
        witnesses=witnesses, config=config,
    )


def tci_check(mu: DiscreteMeasure, phi: convex.ConvexRate, kind: DivergenceKind,
              rng: SeededRng, trials: int, *, floor: float = 1e-3,
              tol: Tolerances = TOLERANCES, threads: int | None = None) -> TciReport:
    """Sample nu << mu and count violations of W1(mu, nu) <= (phi*)^{-1}(D).

    The flagged-violation recheck recomputes the bound in extended precision
    and certifies the left side from below with the dual transport value, so
    a reported witness is a genuine counterexample, not solver noise.
    """
    def one(t: int):
        child = rng.child(t)
        nu = _random_measure_on_support(mu, child, floor)
        lhs = wasserstein(1.0, mu, nu).distance
        bound = forward_bound(kind, phi, mu, nu)
        slack = bound - lhs
        witness = None
        if slack < -tol.violation_slack:
            dual_cert = w1_dual(mu, nu).distance
            d = _mp_divergence(kind, nu.weights, mu.weights)
            hp_bound = _mp_generalized_inverse(phi, d) if d is not None else None
            confirmed = (hp_bound is None
                         or float(hp_bound) < dual_cert - tol.violation_slack)
            if confirmed:
                witness = {"trial": t, "slack": slack, "w1": lhs, "bound": bound,
                           "nu": nu.weights.tolist()}
        return slack, witness

    results = _map_trials(one, trials, threads)
    slacks = [r[0] for r in results]
    witnesses = [r[1] for r in results if r[1] is not None]
    config = {"kind": kind.cli_name(), "phi": phi.describe(), "trials": trials,
              "seed": rng.seed, "floor": floor}
    return TciReport(
        trials=trials, violations=len(witnesses), skipped=0,
        worst_slack=min(slacks) if slacks else math.inf,
        witnesses=witnesses, config=config,
    )


def lipschitz_family_sampler(mu: DiscreteMeasure, *, floor: float = 1e-3,
                             rescale: bool = True):
    """Sampler over the 1-Lipschitz family used by converse checks.

    Alternates between dual potentials of W1 against random measures (the
    extremal directions of the Kantorovich-Rubinstein supremum) and random
    functions pushed into the Lipschitz ball by the lower envelope
    projection.  With ``rescale`` the projected functions are scaled to
    seminorm one when possible.
    """
    space = mu.space
    metric = space.metric
    diam = space.diameter()

    def sample(rng: SeededRng) -> RealFunction:
        gen = rng.generator
        if gen.integers(2) == 0:
            nu = _random_measure_on_support(mu, rng.child(0), floor)
            raw = w1_dual(mu, nu).dual_potential.values
            vals = lipschitz_projected(raw, metric)
        else:
            raw = gen.uniform(-diam, diam, space.n_points)
            vals = lipschitz_projected(raw, metric)
            if rescale:
                off = ~np.eye(space.n_points, dtype=bool)
                seminorm = float(np.max(
                    np.abs(vals[:, None] - vals[None, :])[off] / metric[off]))
                if seminorm > 1e-12:
                    vals = vals / seminorm
        return RealFunction(space, vals)

    return sample
