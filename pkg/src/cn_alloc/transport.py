"""Discrete optimal transport between the station and user marginals.

The plan gamma is an n x m nonnegative matrix with prescribed row sums (supply
marginal mu) and column sums (demand marginal nu); the solver minimizes the
linear cost sum(c * gamma). Vectorized with gamma flattened column-major, the
constraints read T_n gamma = mu and T_m gamma = nu with T_n = 1_{1,m} kron Id_n
and T_m = Id_m kron 1_{1,n}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .errors import InfeasibleMarginalsError, InvalidParameterError

BALANCE_TOL = 1e-9
FEASIBILITY_TOL = 1e-9


@dataclass(frozen=True)
class Marginal:
    """Nonnegative mass vector over stations or users."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        object.__setattr__(self, "weights", w)
        if (w < 0).any():
            raise InvalidParameterError("marginal weights must be >= 0")
        if not w.sum() > 0:
            raise InvalidParameterError("marginal total must be > 0")

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def __len__(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class TransportPlan:
    """An optimal plan and its transport cost."""

    gamma: np.ndarray
    cost_value: float

    @property
    def row_sums(self) -> np.ndarray:
        return self.gamma.sum(axis=1)

    @property
    def col_sums(self) -> np.ndarray:
        return self.gamma.sum(axis=0)


def transport_operators(n: int, m: int) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """The marginal operators (T_n, T_m) for column-major flattened plans."""
    t_n = sp.kron(sp.csr_matrix(np.ones((1, m))), sp.identity(n, format="csr"), format="csr")
    t_m = sp.kron(sp.identity(m, format="csr"), sp.csr_matrix(np.ones((1, n))), format="csr")
    return t_n, t_m


def balance_marginals(mu: Marginal, nu: Marginal) -> tuple[Marginal, Marginal]:
    """Equalize totals by appending a virtual node to the lighter marginal.

    The virtual node absorbs the surplus of the heavier side; its transport
    costs are zero (the caller extends the cost matrix with a zero row or
    column). Balanced inputs are returned unchanged.
    """
    gap = mu.total - nu.total
    if abs(gap) <= BALANCE_TOL:
        return mu, nu
    if gap > 0:
        return mu, Marginal(np.append(nu.weights, gap))
    return Marginal(np.append(mu.weights, -gap)), nu


def solve_transport(mu: Marginal, nu: Marginal, cost: np.ndarray) -> TransportPlan:
    """Solve the transport linear program between balanced marginals.

    Returns a basic optimal plan: row sums equal mu and column sums equal nu
    within 1e-9, and the cost value is the LP optimum. Raises
    InfeasibleMarginalsError when the totals disagree (callers rescale or use
    balance_marginals first) and InvalidParameterError on bad costs.
    """
    cost = np.asarray(cost, dtype=float)
    n, m = len(mu), len(nu)
    if cost.shape != (n, m):
        raise InvalidParameterError(f"cost must be {n} x {m}, got {cost.shape}")
    if not np.isfinite(cost).all() or (cost < 0).any():
        raise InvalidParameterError("costs must be finite and >= 0")
    if abs(mu.total - nu.total) > BALANCE_TOL:
        raise InfeasibleMarginalsError(
            f"marginal totals differ: {mu.total} vs {nu.total}; balance them first"
        )

    # Rescale costs for conditioning; the optimal plan set is scale-invariant.
    scale = cost.max()
    c_solve = cost / scale if scale > 0 else cost

    t_n, t_m = transport_operators(n, m)
    a_eq = sp.vstack([t_n, t_m], format="csr")
    b_eq = np.concatenate([mu.weights, nu.weights])
    res = linprog(
        c_solve.ravel(order="F"),
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=(0, None),
        method="highs",
        options={
            "primal_feasibility_tolerance": 1e-10,
            "dual_feasibility_tolerance": 1e-10,
        },
    )
    if not res.success:
        raise InfeasibleMarginalsError(f"transport LP failed: {res.message}")
    gamma = res.x.reshape((n, m), order="F")
    gamma = np.maximum(gamma, 0.0)
    return TransportPlan(gamma=gamma, cost_value=float((cost * gamma).sum()))
