"""Network indicators, Monte-Carlo density sweeps, and the working point.

Three indicators summarize an equilibrium: the user satisfaction ratio r_u
(mean allocated/requested resource-block ratio), the network load r_n
(fraction of all resource blocks allocated), and the cooperation proportion
r_c (fraction of users whose serving-station count differs from one; users
with no serving station count as cooperating, matching the indicator's
"!= 1" test literally).

The optimum working point is the density ratio where the satisfaction and
load curves intersect.
"""

from __future__ import annotations

import dataclasses
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .equilibria import (
    Equilibrium,
    ExactProblem,
    approx_solve,
    solve_exact,
)
from .errors import CnAllocError, InvalidParameterError
from .geometry import PointPattern, Window, sample_beta_ginibre, sample_poisson
from .radio import RadioInstance, RadioParams, build_instance

DEFAULT_SUPPORT_THRESHOLD = 1e-9

METHODS = ("exact", "approximate")
DEPLOYMENTS = ("poisson", "beta_ginibre")


@dataclass(frozen=True)
class Indicators:
    r_u: float
    r_n: float
    r_c: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.r_u, self.r_n, self.r_c)


@dataclass(frozen=True)
class Crossing:
    ratio: float
    level: float


@dataclass(frozen=True)
class SweepResult:
    """Per-ratio Monte-Carlo means and standard errors of the indicators."""

    ratios: np.ndarray
    r_u_mean: np.ndarray
    r_u_stderr: np.ndarray
    r_n_mean: np.ndarray
    r_n_stderr: np.ndarray
    r_c_mean: np.ndarray
    r_c_stderr: np.ndarray
    iterations_used: np.ndarray
    degenerate_count: np.ndarray
    error_count: np.ndarray
    crossing: Crossing | None


@dataclass(frozen=True)
class InstanceResult:
    """Outcome of one end-to-end instance; degenerate runs carry no payload."""

    degenerate: bool
    seed: object
    indicators: Indicators | None = None
    equilibrium: Equilibrium | None = None
    instance: RadioInstance | None = None
    stations: PointPattern | None = None
    users: PointPattern | None = None


def indicators(
    eq: Equilibrium,
    instance: RadioInstance,
    support_threshold: float = DEFAULT_SUPPORT_THRESHOLD,
) -> Indicators:
    """Evaluate (r_u, r_n, r_c) for a solved instance.

    Entries of gamma at or above ``support_threshold`` count as serving links.
    """
    m = instance.m
    nu = np.asarray(eq.nu, dtype=float)
    if nu.shape != (m,):
        raise InvalidParameterError("equilibrium and instance dimensions disagree")
    r_u = float(instance.n_total / m * (nu / instance.demand).sum())
    r_n = float(nu.sum())
    serving = (eq.gamma.gamma >= support_threshold).sum(axis=0)
    r_c = float(np.mean(serving != 1))
    return Indicators(r_u=r_u, r_n=r_n, r_c=r_c)


def _resolve_cost_weight(cost_weight, instance: RadioInstance) -> float:
    """'auto' weights the transport term at the resource-block scale (1/N_t)."""
    if cost_weight == "auto":
        return 1.0 / instance.n_total
    return float(cost_weight)


def run_instance(
    lambda_m: float,
    lambda_n: float,
    deployment: str = "poisson",
    params: RadioParams = RadioParams(),
    method: str = "exact",
    seed=0,
    *,
    beta: float = 1.0,
    window: Window = Window(1.0),
    supply_mode: str = "inequality",
    allocate_mode: str = "demand_capped",
    cost_weight="auto",
    support_threshold: float = DEFAULT_SUPPORT_THRESHOLD,
    tol: float = 1e-8,
) -> InstanceResult:
    """Sample one deployment, build the radio instance, and solve it.

    Deterministic given ``seed``: the station pattern, user pattern, and
    shadowing draws use independent child streams of the seed. Patterns with
    fewer than 2 stations or no users return a degenerate marker. Solver
    errors are re-raised with the instance seed attached (``.seed``).
    """
    if lambda_m <= 0 or lambda_n <= 0:
        raise InvalidParameterError("intensities must be > 0")
    if method not in METHODS:
        raise InvalidParameterError(f"method must be one of {METHODS}")
    if deployment not in DEPLOYMENTS:
        raise InvalidParameterError(f"deployment must be one of {DEPLOYMENTS}")

    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    seed_stations, seed_users, seed_shadowing = root.spawn(3)

    if deployment == "poisson":
        stations = sample_poisson(lambda_n, window, seed_stations)
    else:
        stations = sample_beta_ginibre(beta, lambda_n, window, seed_stations)
    users = sample_poisson(lambda_m, window, seed_users)

    if len(stations) < 2 or len(users) < 1:
        return InstanceResult(degenerate=True, seed=seed)

    instance = build_instance(stations, users, params, seed_shadowing)
    w = _resolve_cost_weight(cost_weight, instance)
    try:
        if method == "exact":
            eq = solve_exact(ExactProblem(instance, supply_mode), tol=tol, cost_weight=w)
        else:
            eq = approx_solve(instance, allocate_mode, cost_weight=w)
    except CnAllocError as err:
        err.seed = seed
        raise
    ind = indicators(eq, instance, support_threshold)
    return InstanceResult(
        degenerate=False,
        seed=seed,
        indicators=ind,
        equilibrium=eq,
        instance=instance,
        stations=stations,
        users=users,
    )


def _sweep_chunk(args) -> list[tuple[int, int, tuple | None, bool]]:
    """Worker task: run a block of (ratio_index, iteration_index) instances."""
    jobs, base_seed, lambda_n, deployment, beta, params, method, options = args
    out = []
    for ratio_index, iteration_index, ratio in jobs:
        seed = np.random.SeedSequence((base_seed, ratio_index, iteration_index))
        try:
            res = run_instance(
                ratio * lambda_n,
                lambda_n,
                deployment,
                params,
                method,
                seed,
                beta=beta,
                **options,
            )
        except CnAllocError:
            out.append((ratio_index, iteration_index, None, False))
            continue
        if res.degenerate:
            out.append((ratio_index, iteration_index, None, True))
        else:
            out.append((ratio_index, iteration_index, res.indicators.as_tuple(), False))
    return out


def _worker_count(workers: int | None) -> int:
    if workers is not None:
        return max(1, workers)
    env = os.environ.get("CN_ALLOC_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def sweep(
    ratios,
    iterations: int,
    method: str = "exact",
    deployment: str = "poisson",
    params: RadioParams = RadioParams(),
    base_seed: int = 0,
    *,
    lambda_n: float = 10.0,
    beta: float = 1.0,
    window: Window = Window(1.0),
    supply_mode: str = "inequality",
    allocate_mode: str = "demand_capped",
    cost_weight="auto",
    support_threshold: float = DEFAULT_SUPPORT_THRESHOLD,
    tol: float = 1e-8,
    workers: int | None = None,
) -> SweepResult:
    """Monte-Carlo sweep of the indicators over user/station density ratios.

    Every (ratio index, iteration index) pair maps to its own seed derived
    positionally from ``base_seed``, so results do not depend on execution
    order or worker count. Degenerate instances and per-instance solver
    errors are excluded from the averages and counted.
    """
    ratios = np.asarray(list(ratios), dtype=float)
    if iterations < 1:
        raise InvalidParameterError("iterations must be >= 1")
    if len(ratios) == 0:
        raise InvalidParameterError("need at least one ratio")
    if np.any(np.diff(ratios) <= 0):
        raise InvalidParameterError("ratios must be strictly increasing")

    options = dict(
        window=window,
        supply_mode=supply_mode,
        allocate_mode=allocate_mode,
        cost_weight=cost_weight,
        support_threshold=support_threshold,
        tol=tol,
    )
    jobs = [
        (ri, it, float(r)) for ri, r in enumerate(ratios) for it in range(iterations)
    ]
    n_workers = _worker_count(workers)
    chunk_size = max(1, len(jobs) // (4 * n_workers) or 1)
    chunks = [
        (jobs[i : i + chunk_size], base_seed, lambda_n, deployment, beta, params, method, options)
        for i in range(0, len(jobs), chunk_size)
    ]

    results: dict[tuple[int, int], tuple | None] = {}
    degenerate_flags: dict[tuple[int, int], bool] = {}
    if n_workers == 1 or len(jobs) == 1:
        outputs = [_sweep_chunk(chunk) for chunk in chunks]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            outputs = list(pool.map(_sweep_chunk, chunks))
    for out in outputs:
        for ratio_index, iteration_index, values, was_degenerate in out:
            results[(ratio_index, iteration_index)] = values
            degenerate_flags[(ratio_index, iteration_index)] = was_degenerate

    shape = len(ratios)
    means = np.zeros((shape, 3))
    stderrs = np.zeros((shape, 3))
    used = np.zeros(shape, dtype=int)
    degenerate = np.zeros(shape, dtype=int)
    errors = np.zeros(shape, dtype=int)
    for ri in range(shape):
        vals = []
        for it in range(iterations):
            v = results[(ri, it)]
            if v is not None:
                vals.append(v)
            elif degenerate_flags[(ri, it)]:
                degenerate[ri] += 1
            else:
                errors[ri] += 1
        if vals:
            arr = np.asarray(vals)
            means[ri] = arr.mean(axis=0)
            if len(vals) > 1:
                stderrs[ri] = arr.std(axis=0, ddof=1) / np.sqrt(len(vals))
            used[ri] = len(vals)

    result = SweepResult(
        ratios=ratios,
        r_u_mean=means[:, 0],
        r_u_stderr=stderrs[:, 0],
        r_n_mean=means[:, 1],
        r_n_stderr=stderrs[:, 1],
        r_c_mean=means[:, 2],
        r_c_stderr=stderrs[:, 2],
        iterations_used=used,
        degenerate_count=degenerate,
        error_count=errors,
        crossing=None,
    )
    return dataclasses.replace(result, crossing=find_crossing(result))


def find_crossing(result: SweepResult) -> Crossing | None:
    """First intersection of the satisfaction and load curves.

    Scans for the first sign change of r_u - r_n over the ratio grid and
    linearly interpolates the crossing ratio and common level; a grid point
    with an exact zero is returned as-is. None when the curves never meet.
    """
    ratios = result.ratios
    if len(ratios) < 2:
        return None
    d = result.r_u_mean - result.r_n_mean
    for i in range(len(ratios)):
        if d[i] == 0.0:
            return Crossing(ratio=float(ratios[i]), level=float(result.r_u_mean[i]))
        if i + 1 < len(ratios) and d[i] * d[i + 1] < 0.0:
            alpha = d[i] / (d[i] - d[i + 1])
            ratio = ratios[i] + alpha * (ratios[i + 1] - ratios[i])
            level = result.r_u_mean[i] + alpha * (result.r_u_mean[i + 1] - result.r_u_mean[i])
            return Crossing(ratio=float(ratio), level=float(level))
    return None
