"""Discrete optimal transport on finite metric spaces.

The primal Kantorovich program

    min sum_ij plan_ij * d(i,j)**p   s.t. plan has marginals (mu, nu)

is solved by a successive-shortest-path min-cost-flow scheme specialised to
dense transport instances: exact at desk scale (instances are capped at 64
points), monotone progress so no anti-cycling machinery is needed, and the
node potentials certify optimality, giving an internal duality gap.

The Kantorovich-Rubinstein dual for W1,

    max nu(f) - mu(f)   s.t. f(i) - f(j) <= d(i,j) for all pairs,

is an independent linear program handed to scipy's HiGHS backend.  Strong
duality between the two routes is part of the test contract, so neither path
reuses the other's machinery.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .config import TOLERANCES, Tolerances
from .errors import DegenerateSpace, InternalError
from .spaces import DiscreteMeasure, FiniteMetricSpace, RealFunction, require_shared_space

#: instances beyond this size are refused; robustness beats throughput here
MAX_POINTS = 64


class CouplingPlan:
    """A joint mass matrix with prescribed marginals.

    Entries in [-tol.plan_entry, 0) are clamped to zero; marginal residuals
    beyond ``tol.marginal_residual`` are rejected.
    """

    def __init__(self, space: FiniteMetricSpace, matrix, row_marginal, col_marginal,
                 *, tol: Tolerances = TOLERANCES):
        matrix = np.array(matrix, dtype=float)
        n = space.n_points
        if matrix.shape != (n, n):
            raise ValueError(f"plan must be {n}x{n}, got {matrix.shape}")
        if np.any(matrix < -tol.plan_entry):
            raise ValueError("plan entries must be nonnegative")
        matrix[matrix < 0.0] = 0.0
        row_marginal = np.asarray(row_marginal, dtype=float)
        col_marginal = np.asarray(col_marginal, dtype=float)
        if (np.max(np.abs(matrix.sum(axis=1) - row_marginal)) > tol.marginal_residual
                or np.max(np.abs(matrix.sum(axis=0) - col_marginal)) > tol.marginal_residual):
            raise ValueError("plan marginals do not match the prescribed measures")
        matrix.setflags(write=False)
        self.space = space
        self.matrix = matrix

    def marginal_residual(self, mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
        """Largest deviation of the plan's marginals from (mu, nu)."""
        return max(
            float(np.max(np.abs(self.matrix.sum(axis=1) - mu.weights))),
            float(np.max(np.abs(self.matrix.sum(axis=0) - nu.weights))),
        )


@dataclass
class TransportResult:
    distance: float
    p: float
    plan: CouplingPlan
    dual_potential: RealFunction | None = None
    duality_gap: float = 0.0
    extras: dict = field(default_factory=dict)


def hamming_space(n_points: int, labels=None) -> FiniteMetricSpace:
    """The space with d(x, y) = 1 whenever x != y."""
    if n_points < 2:
        raise DegenerateSpace("a 0/1 metric space needs at least two points")
    if labels is None:
        labels = [f"x{i}" for i in range(n_points)]
    metric = np.ones((n_points, n_points)) - np.eye(n_points)
    return FiniteMetricSpace(labels, metric)


def _min_cost_flow(cost: np.ndarray, a: np.ndarray, b: np.ndarray):
    """Dense transport LP by successive shortest paths with node potentials.

    cost: (m, n) nonnegative; a, b: marginals with equal total mass.
    Returns (flow, primal_value, dual_value) where the dual value comes from
    the feasible potentials maintained by the algorithm, so
    ``primal_value - dual_value`` certifies the optimality error.
    """
    m, n = cost.shape
    flow = np.zeros((m, n))
    a_rem = a.astype(float).copy()
    b_rem = b.astype(float).copy()
    pot = np.zeros(m + n)  # rows 0..m-1, cols m..m+n-1
    eps = 1e-15 * max(1.0, float(a.sum()))
    flow_floor = 1e-15

    guard = 4 * m * n + 16
    for _ in range(guard):
        if a_rem.max() <= eps or b_rem.max() <= eps:
            break
        dist = np.full(m + n, np.inf)
        parent = np.full(m + n, -1, dtype=np.int64)
        dist[:m][a_rem > eps] = 0.0
        settled = np.zeros(m + n, dtype=bool)
        target = -1
        while True:
            cand = np.where(settled, np.inf, dist)
            x = int(np.argmin(cand))
            if not np.isfinite(cand[x]):
                break
            settled[x] = True
            if x >= m and b_rem[x - m] > eps:
                target = x
                break
            if x < m:
                # forward edges row x -> every column, reduced cost >= 0
                rc = np.maximum(cost[x] + pot[x] - pot[m:], 0.0)
                nd = dist[x] + rc
                better = nd < dist[m:]
                dist[m:] = np.where(better, nd, dist[m:])
                parent[m:][better] = x
            else:
                # backward edges along existing flow into column x
                j = x - m
                carrying = flow[:, j] > flow_floor
                rc = np.maximum(-cost[:, j] + pot[x] - pot[:m], 0.0)
                nd = dist[x] + rc
                better = carrying & (nd < dist[:m])
                dist[:m] = np.where(better, nd, dist[:m])
                parent[:m][better] = x
        if target < 0:
            raise InternalError("transport instance disconnected; marginals inconsistent")

        # walk the shortest path back to its source row, collecting the bottleneck
        path = []
        node = target
        theta = b_rem[target - m]
        while parent[node] >= 0:
            prev = int(parent[node])
            if node >= m:
                path.append((prev, node - m, 1.0))
            else:
                path.append((node, prev - m, -1.0))
                theta = min(theta, flow[node, prev - m])
            node = prev
        theta = min(theta, a_rem[node])
        if not theta > 0.0:
            raise InternalError("transport augmentation stalled")
        for i, j, sign in path:
            flow[i, j] += sign * theta
            if flow[i, j] < 0.0:
                flow[i, j] = 0.0
        a_rem[node] = max(a_rem[node] - theta, 0.0)
        b_rem[target - m] = max(b_rem[target - m] - theta, 0.0)

        finite = np.isfinite(dist)
        pot[finite] += np.minimum(dist[finite], dist[target])
    else:
        raise InternalError("transport solver exceeded its iteration guard")

    primal = float(np.sum(flow * cost))
    # pot yields feasible LP duals: u_i = -pot[i], v_j = pot[m+j] with u+v <= cost
    dual = float(np.dot(b, pot[m:]) - np.dot(a, pot[:m]))
    return flow, primal, dual


def _check_transport_inputs(mu: DiscreteMeasure, nu: DiscreteMeasure) -> FiniteMetricSpace:
    space = require_shared_space(mu, nu)
    if not (mu.is_probability and nu.is_probability):
        raise ValueError("transport distances are defined for probability pairs")
    if space.n_points > MAX_POINTS:
        raise ValueError(f"instances are capped at {MAX_POINTS} points")
    return space


def wasserstein(p: float, mu: DiscreteMeasure, nu: DiscreteMeasure) -> TransportResult:
    """W_p(mu, nu) through the primal coupling program.

    Solves min sum plan_ij d(i,j)**p over couplings of (mu, nu) and returns
    the p-th root of the optimum together with an optimal plan.  The reported
    duality gap is the solver's internal primal/dual certificate.
    """
    if p < 1:
        raise ValueError("the order p must be at least 1")
    space = _check_transport_inputs(mu, nu)
    k = space.n_points

    rows = np.flatnonzero(mu.weights > 0.0)
    cols = np.flatnonzero(nu.weights > 0.0)
    a = mu.weights[rows] / mu.weights[rows].sum()
    b = nu.weights[cols] / nu.weights[cols].sum()
    cost = space.metric[np.ix_(rows, cols)] ** p

    flow, primal, dual = _min_cost_flow(cost, a, b)

    full = np.zeros((k, k))
    full[np.ix_(rows, cols)] = flow
    plan = CouplingPlan(space, full, mu.weights, nu.weights)
    distance = float(primal ** (1.0 / p)) if primal > 0.0 else 0.0
    return TransportResult(
        distance=distance, p=float(p), plan=plan,
        duality_gap=abs(primal - dual),
        extras={"primal_value": primal, "dual_value": dual},
    )


def w1_dual(mu: DiscreteMeasure, nu: DiscreteMeasure) -> TransportResult:
    """W1 through the Kantorovich-Rubinstein dual program.

    Solves max nu(f) - mu(f) over potentials with |f(i) - f(j)| <= d(i,j)
    (f(0) pinned to zero; the objective is shift-invariant) and reports the
    gap against an independently computed primal optimum.
    """
    space = _check_transport_inputs(mu, nu)
    k = space.n_points
    d = space.metric

    # one inequality per ordered pair: f_i - f_j <= d(i,j)
    pairs = [(i, j) for i in range(k) for j in range(k) if i != j]
    a_ub = np.zeros((len(pairs), k))
    b_ub = np.empty(len(pairs))
    for r, (i, j) in enumerate(pairs):
        a_ub[r, i] = 1.0
        a_ub[r, j] = -1.0
        b_ub[r] = d[i, j]
    objective = -(nu.weights - mu.weights)  # linprog minimises
    bounds = [(0.0, 0.0)] + [(None, None)] * (k - 1)
    res = linprog(objective, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if res.status != 0:
        raise InternalError(f"dual LP failed: {res.message}")
    potential = np.asarray(res.x, dtype=float)
    dual_value = float(np.dot(nu.weights - mu.weights, potential))

    primal_result = wasserstein(1.0, mu, nu)
    gap = abs(primal_result.distance - dual_value)
    return TransportResult(
        distance=dual_value, p=1.0, plan=primal_result.plan,
        dual_potential=RealFunction(space, potential),
        duality_gap=gap,
        extras={"primal_value": primal_result.distance},
    )
