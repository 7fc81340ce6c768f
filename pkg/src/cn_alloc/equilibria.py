"""Exact and approximate Cournot-Nash equilibria.

The equilibrium allocation minimizes the transport cost plus a quadratic
fairness penalty on the gap between the user allocation nu and the scaled
demand N/N_t. With gamma flattened column-major this is the quadratic program

    minimize    gamma' H gamma + L' gamma,
    subject to  T_n gamma = mu   (equality supply)  or  T_n gamma <= mu,
                T_m gamma <= N/N_t,   gamma >= 0,

with H = Id_m kron 1_{n,n} and L_(i,j) = w * c_ij - 2 N_j / N_t, where w is a
configurable weight on the transport term (1.0 reproduces the plain
cost-plus-fairness objective; experiment drivers use 1/N_t, the
resource-block-unit equivalent). H is never materialized: gamma' H gamma is
just the sum of squared column sums.

The exact solver runs a sparse interior-point method and then re-solves the
plan through the transport LP at fixed nu, which returns a basic (vertex)
plan with identical marginals and no interior-point dust. The approximate
solver implements the closed-form allocation of the simplified per-user
problem (a Euclidean projection onto the probability simplex computed by
iterative zero-fixing) followed by the same transport stage.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import clarabel
import numpy as np
import scipy.sparse as sp

from .errors import (
    DegenerateProjectionError,
    InvalidParameterError,
    NonConvergenceError,
    ProvablyInfeasibleError,
)
from .radio import RadioInstance
from .transport import Marginal, TransportPlan, solve_transport, transport_operators

SUPPLY_MODES = ("equality", "inequality")
ALLOCATE_MODES = ("demand_capped", "simplex_equality")

DEFAULT_TOL = 1e-8
ZERO_TOL = 1e-12


@dataclass(frozen=True)
class ExactProblem:
    """A radio instance together with the supply-constraint mode."""

    instance: RadioInstance
    supply_mode: str = "inequality"

    def __post_init__(self):
        if self.supply_mode not in SUPPLY_MODES:
            raise InvalidParameterError(f"supply_mode must be one of {SUPPLY_MODES}")

    @property
    def demand_scaled(self) -> np.ndarray:
        return self.instance.demand_scaled


@dataclass(frozen=True)
class Diagnostics:
    method: str
    kkt_residual: float
    iterations: int
    active_zero_count: int


@dataclass(frozen=True)
class Equilibrium:
    """A solved allocation: user marginal, plan, objective, diagnostics."""

    nu: np.ndarray
    gamma: TransportPlan
    objective: float
    diagnostics: Diagnostics


def objective_value(gamma: np.ndarray, instance: RadioInstance, cost_weight: float = 1.0) -> float:
    """Transport cost plus fairness penalty of a plan.

    Returns w * sum(c * gamma) + sum_j (nu_j - N_j/N_t)^2 with nu the column
    sums of gamma. Computed matrix-free; the quadratic form gamma' H gamma
    would equal sum_j nu_j^2 and differs from the fairness term only by a
    constant, which is included here so the value is exactly W_c + s.
    """
    gamma = np.asarray(gamma, dtype=float)
    if gamma.shape != instance.cost.shape:
        raise InvalidParameterError(
            f"gamma must be {instance.cost.shape}, got {gamma.shape}"
        )
    if (gamma < 0).any():
        raise InvalidParameterError("gamma must be nonnegative")
    nu = gamma.sum(axis=0)
    resid = nu - instance.demand_scaled
    return float(cost_weight * (instance.cost * gamma).sum() + (resid * resid).sum())


# ---------------------------------------------------------------------------
# Simplex projection: iterative zero-fixing and the independent sort oracle
# ---------------------------------------------------------------------------


def project_sum_one_zerofix(v: np.ndarray) -> tuple[np.ndarray, int, int]:
    """Euclidean projection onto {x >= 0, sum x = 1} by iterative zero-fixing.

    Projects onto the sum-one hyperplane of the current support, zeroes any
    coordinates that came out negative, and repeats on the reduced support.
    The support shrinks strictly, so the loop reprojects at most m - 1 times.

    Returns (projection, k, reprojections) where k counts the zero
    coordinates of the result (coordinates landing exactly at zero count).
    """
    v = np.atleast_1d(np.asarray(v, dtype=float))
    m = v.size
    if m < 1:
        raise InvalidParameterError("need at least one coordinate")
    support = np.ones(m, dtype=bool)
    shift = (v.sum() - 1.0) / m
    nu = v - shift
    reprojections = 0
    while True:
        negative = support & (nu < 0.0)
        if not negative.any():
            break
        support &= ~negative
        if not support.any():
            raise DegenerateProjectionError(
                "zero-fixing emptied the support; cannot satisfy the sum-to-one constraint"
            )
        count = int(support.sum())
        shift = (v[support].sum() - 1.0) / count
        nu = np.where(support, v - shift, 0.0)
        reprojections += 1
    nu = np.where(support, np.maximum(nu, 0.0), 0.0)
    k = int(np.count_nonzero(nu == 0.0))
    return nu, k, reprojections


def simplex_project_oracle(v: np.ndarray) -> np.ndarray:
    """Projection onto the probability simplex via sort-and-threshold.

    Independent reference for the zero-fixing loop; used only by tests.
    """
    v = np.atleast_1d(np.asarray(v, dtype=float))
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u - (css - 1.0) / idx > 0)[0][-1]
    tau = (css[rho] - 1.0) / (rho + 1.0)
    return np.maximum(v - tau, 0.0)


# ---------------------------------------------------------------------------
# Approximate equilibria (simplified per-user problem + transport stage)
# ---------------------------------------------------------------------------


def approx_allocate(
    instance: RadioInstance, mode: str = "demand_capped", cost_weight: float = 1.0
) -> tuple[np.ndarray, int]:
    """Closed-form user allocation of the simplified problem.

    The simplified objective replaces each user's transport cost by its
    cheapest-link cost, giving the unconstrained optimum
    nu0_j = N_j/N_t - w * cmin_j / 2.

    simplex_equality mode projects nu0 onto {sum nu = 1, nu >= 0} with the
    zero-fixing loop. demand_capped mode clips nu0 at zero and keeps it when
    the total fits under 1, falling back to the simplex projection otherwise.
    Returns (nu, k) with k the number of zero coordinates.
    """
    if mode not in ALLOCATE_MODES:
        raise InvalidParameterError(f"mode must be one of {ALLOCATE_MODES}")
    nu0 = instance.demand_scaled - cost_weight * instance.cost.min(axis=0) / 2.0
    if mode == "simplex_equality":
        nu, k, _ = project_sum_one_zerofix(nu0)
        return nu, k
    clipped = np.maximum(nu0, 0.0)
    if clipped.sum() <= 1.0:
        return clipped, int(np.count_nonzero(clipped == 0.0))
    nu, k, _ = project_sum_one_zerofix(nu0)
    return nu, k


def approx_solve(
    instance: RadioInstance, mode: str = "demand_capped", cost_weight: float = 1.0
) -> Equilibrium:
    """Approximate equilibrium: per-user allocation, then optimal transport.

    When the allocated total falls short of the supply total, the transport
    stage balances the marginals with a zero-cost virtual user absorbing the
    surplus; the virtual column is dropped from the returned plan.
    """
    nu0 = instance.demand_scaled - cost_weight * instance.cost.min(axis=0) / 2.0
    if mode == "simplex_equality":
        nu, k, reprojections = project_sum_one_zerofix(nu0)
    else:
        clipped = np.maximum(nu0, 0.0)
        if clipped.sum() <= 1.0:
            nu, k, reprojections = clipped, int(np.count_nonzero(clipped == 0.0)), 0
        else:
            nu, k, reprojections = project_sum_one_zerofix(nu0)

    n, m = instance.n, instance.m
    total = nu.sum()
    if total <= ZERO_TOL:
        # Empty network: nothing is shipped.
        plan = TransportPlan(gamma=np.zeros((n, m)), cost_value=0.0)
        feas_residual = 0.0
    else:
        surplus = 1.0 - total
        if surplus > ZERO_TOL:
            cost_ext = np.hstack([instance.cost, np.zeros((n, 1))])
            nu_ext = np.append(nu, surplus)
            ext = solve_transport(Marginal(instance.mu), Marginal(nu_ext), cost_ext)
            gamma = ext.gamma[:, :m]
            plan = TransportPlan(gamma=gamma, cost_value=float((instance.cost * gamma).sum()))
        else:
            plan = solve_transport(Marginal(instance.mu), Marginal(nu), instance.cost)
        feas_residual = float(np.abs(plan.col_sums - nu).max())

    return Equilibrium(
        nu=nu,
        gamma=plan,
        objective=objective_value(plan.gamma, instance, cost_weight),
        diagnostics=Diagnostics(
            method="approximate",
            kkt_residual=feas_residual,
            iterations=reprojections,
            active_zero_count=k,
        ),
    )


# ---------------------------------------------------------------------------
# Exact equilibria (sparse interior point + transport polish)
# ---------------------------------------------------------------------------


def _qp_data(instance: RadioInstance, supply_mode: str, cost_weight: float):
    n, m = instance.n, instance.m
    nm = n * m
    t = instance.demand_scaled
    p_mat = sp.kron(sp.identity(m, format="csr"), np.full((n, n), 2.0), format="csc")
    q = (cost_weight * instance.cost - 2.0 * t[None, :]).ravel(order="F")
    t_n, t_m = transport_operators(n, m)
    a_mat = sp.vstack([t_n, t_m, -sp.identity(nm, format="csr")], format="csc")
    b = np.concatenate([instance.mu, t, np.zeros(nm)])
    if supply_mode == "equality":
        cones = [clarabel.ZeroConeT(n), clarabel.NonnegativeConeT(m + nm)]
    else:
        cones = [clarabel.NonnegativeConeT(n + m + nm)]
    return p_mat, q, a_mat, b, cones


def _kkt_residual(instance, supply_mode, cost_weight, gamma, z) -> float:
    """Max violation of the first-order conditions at (gamma, z).

    z stacks the duals of the supply rows, the demand-cap rows, and the sign
    bounds, in the row order of the constraint matrix.
    """
    n, m = instance.n, instance.m
    t = instance.demand_scaled
    nu = gamma.sum(axis=0)
    grad = (2.0 * nu[None, :] - 2.0 * t[None, :] + cost_weight * instance.cost).ravel(order="F")
    z_sup, z_cap, z_bnd = z[:n], z[n : n + m], z[n + m :]
    stat = grad + np.tile(z_sup, m) + np.repeat(z_cap, n) - z_bnd
    r_stat = np.abs(stat).max()

    row_sums = gamma.sum(axis=1)
    sup_slack = instance.mu - row_sums
    cap_slack = t - nu
    g_flat = gamma.ravel(order="F")

    r_pf = max(0.0, float(-g_flat.min()), float(-cap_slack.min()))
    if supply_mode == "equality":
        r_pf = max(r_pf, float(np.abs(sup_slack).max()))
        r_comp = max(
            float(np.abs(z_cap * cap_slack).max()),
            float(np.abs(z_bnd * g_flat).max()),
        )
        r_sign = max(0.0, float(-min(z_cap.min(initial=0.0), z_bnd.min(initial=0.0))))
    else:
        r_pf = max(r_pf, max(0.0, float(-sup_slack.min())))
        r_comp = max(
            float(np.abs(z_sup * sup_slack).max(initial=0.0)),
            float(np.abs(z_cap * cap_slack).max()),
            float(np.abs(z_bnd * g_flat).max()),
        )
        r_sign = max(0.0, float(-z.min()))
    return float(max(r_stat, r_pf, r_comp, r_sign))


def _polish_plan(instance: RadioInstance, gamma_ip: np.ndarray) -> np.ndarray | None:
    """Re-solve the plan through the transport LP at fixed marginals.

    The interior point converges to the analytic center of the optimal face,
    which scatters tiny positive mass over non-basic entries. Re-solving at
    the same row and column sums yields a basic plan with identical
    marginals (hence identical objective terms in nu) and a transport cost
    no larger than the iterate's.
    """
    rows = np.maximum(gamma_ip.sum(axis=1), 0.0)
    cols = np.maximum(gamma_ip.sum(axis=0), 0.0)
    total = cols.sum()
    if total <= ZERO_TOL:
        return np.zeros_like(gamma_ip)
    # Absorb float rounding so both totals agree exactly.
    rows[np.argmax(rows)] += total - rows.sum()
    try:
        plan = solve_transport(Marginal(rows), Marginal(cols), instance.cost)
    except Exception:
        return None
    return plan.gamma


def _active_set_refine(
    instance: RadioInstance,
    supply_mode: str,
    cost_weight: float,
    gamma: np.ndarray,
    z: np.ndarray,
):
    """Newton refinement on the active set identified by the interior point.

    Interior-point termination leaves O(sqrt(gap)) errors in nu at binding
    constraints. Fixing the plan support (from the basic polished plan) and
    the active constraint set (dual larger than slack), the optimum of the
    restricted equality-constrained program is a linear solve. Returns
    (gamma, duals) or None when the identified sets are inconsistent; the
    caller validates via the full KKT residual.
    """
    n, m = instance.n, instance.m
    t = instance.demand_scaled
    z_sup, z_cap = z[:n], z[n : n + m]

    support = np.argwhere(gamma > 0.0)
    if len(support) == 0:
        return None
    nu = gamma.sum(axis=0)
    rows = gamma.sum(axis=1)
    if supply_mode == "equality":
        act_sup = np.arange(n)
    else:
        act_sup = np.nonzero(z_sup >= np.maximum(instance.mu - rows, 0.0))[0]
    act_cap = np.nonzero(z_cap >= np.maximum(t - nu, 0.0))[0]

    ns, na, nc = len(support), len(act_sup), len(act_cap)
    sup_pos = {int(i): k for k, i in enumerate(act_sup)}
    cap_pos = {int(j): k for k, j in enumerate(act_cap)}
    size = ns + na + nc
    mat = np.zeros((size, size))
    rhs = np.zeros(size)

    col_members: dict[int, list[int]] = {}
    for s, (i, j) in enumerate(support):
        col_members.setdefault(int(j), []).append(s)
    # stationarity rows, one per supported entry
    for s, (i, j) in enumerate(support):
        i, j = int(i), int(j)
        for s2 in col_members[j]:
            mat[s, s2] += 2.0
        if i in sup_pos:
            mat[s, ns + sup_pos[i]] = 1.0
        if j in cap_pos:
            mat[s, ns + na + cap_pos[j]] = 1.0
        rhs[s] = 2.0 * t[j] - cost_weight * instance.cost[i, j]
    # active supply rows
    for k, i in enumerate(act_sup):
        for s, (si, sj) in enumerate(support):
            if int(si) == int(i):
                mat[ns + k, s] = 1.0
        rhs[ns + k] = instance.mu[int(i)]
    # active cap rows
    for k, j in enumerate(act_cap):
        for s in col_members.get(int(j), []):
            mat[ns + na + k, s] = 1.0
        rhs[ns + na + k] = t[int(j)]

    sol, *_ = np.linalg.lstsq(mat, rhs, rcond=None)
    if not np.isfinite(sol).all() or np.abs(mat @ sol - rhs).max() > 1e-9:
        return None

    gamma_new = np.zeros_like(gamma)
    vals = sol[:ns]
    if vals.min() < -1e-9:
        return None
    for s, (i, j) in enumerate(support):
        gamma_new[int(i), int(j)] = max(float(vals[s]), 0.0)

    y_full = np.zeros(n)
    y_full[act_sup] = sol[ns : ns + na]
    zc_full = np.zeros(m)
    zc_full[act_cap] = sol[ns + na :]
    # bound duals from stationarity; negativity shows up in the residual
    nu_new = gamma_new.sum(axis=0)
    grad = 2.0 * nu_new[None, :] - 2.0 * t[None, :] + cost_weight * instance.cost
    w_bnd = grad + y_full[:, None] + zc_full[None, :]
    w_bnd[gamma_new > 0.0] = 0.0
    z_new = np.concatenate([y_full, zc_full, np.maximum(w_bnd, 0.0).ravel(order="F")])
    return gamma_new, z_new


def solve_exact(
    problem: ExactProblem,
    tol: float = DEFAULT_TOL,
    cost_weight: float = 1.0,
    max_iter: int = 200,
) -> Equilibrium:
    """Solve the exact equilibrium quadratic program.

    Runs a sparse interior-point solve, verifies the KKT residual at the
    returned point, and polishes the plan through the transport LP (the
    user marginal nu is unique by strict convexity; the plan is any
    transport-optimal plan for it). Raises ProvablyInfeasibleError when
    equality supply exceeds the total demand cap and NonConvergenceError
    (carrying the best iterate) when the residual tolerance cannot be met.
    """
    if not tol > 0:
        raise InvalidParameterError("tol must be > 0")
    instance = problem.instance
    if problem.supply_mode == "equality":
        cap_total = instance.demand_scaled.sum()
        if cap_total < 1.0 - 1e-12:
            raise ProvablyInfeasibleError(
                f"equality supply needs sum(N/N_t) >= 1, got {cap_total:.6g}"
            )

    p_mat, q, a_mat, b, cones = _qp_data(instance, problem.supply_mode, cost_weight)

    sol = None
    for tight in (True, False):
        settings = clarabel.DefaultSettings()
        settings.verbose = False
        settings.max_iter = max_iter
        if tight:
            settings.tol_gap_abs = 1e-11
            settings.tol_gap_rel = 1e-11
            settings.tol_feas = 1e-11
        solver = clarabel.DefaultSolver(p_mat, q, a_mat, b, cones, settings)
        sol = solver.solve()
        if str(sol.status) in ("Solved", "AlmostSolved"):
            break

    n, m = instance.n, instance.m
    gamma_ip = np.asarray(sol.x, dtype=float).reshape((n, m), order="F")
    gamma_ip = np.maximum(gamma_ip, 0.0)
    z = np.asarray(sol.z, dtype=float)
    iterations = int(sol.iterations)

    if str(sol.status) not in ("Solved", "AlmostSolved"):
        raise NonConvergenceError(
            f"interior point terminated with status {sol.status}",
            best=gamma_ip,
            residual=float("nan"),
        )

    polished = _polish_plan(instance, gamma_ip)
    candidates = []
    if polished is not None:
        refined = _active_set_refine(instance, problem.supply_mode, cost_weight, polished, z)
        if refined is not None:
            candidates.append(refined)
        candidates.append((polished, z))
    candidates.append((gamma_ip, z))

    gamma, residual = None, np.inf
    for cand_gamma, cand_z in candidates:
        cand_res = _kkt_residual(instance, problem.supply_mode, cost_weight, cand_gamma, cand_z)
        if cand_res < residual:
            gamma, residual = cand_gamma, cand_res
    if residual > tol:
        raise NonConvergenceError(
            f"KKT residual {residual:.3e} exceeds tolerance {tol:.3e}",
            best=gamma,
            residual=residual,
        )

    nu = gamma.sum(axis=0)
    plan = TransportPlan(gamma=gamma, cost_value=float((instance.cost * gamma).sum()))
    return Equilibrium(
        nu=nu,
        gamma=plan,
        objective=objective_value(gamma, instance, cost_weight),
        diagnostics=Diagnostics(
            method="exact",
            kkt_residual=residual,
            iterations=iterations,
            active_zero_count=int(np.count_nonzero(nu <= ZERO_TOL)),
        ),
    )
