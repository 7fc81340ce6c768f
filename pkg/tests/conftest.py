"""Shared fixtures and instance generators for the test suite."""

from __future__ import annotations

import os

import numpy as np
import pytest

from cn_alloc import RadioInstance, RadioParams, sweep


def accept_scale() -> float:
    """Dev knob: CN_ALLOC_ACCEPT_SCALE < 1 shrinks Monte-Carlo sizes for quick
    runs. Defaults to 1.0 (full, authoritative sizes)."""
    return float(os.environ.get("CN_ALLOC_ACCEPT_SCALE", "1.0"))


def scaled(count: int, minimum: int = 2) -> int:
    return max(minimum, int(round(count * accept_scale())))


def make_instance(
    rng: np.random.Generator,
    n: int,
    m: int,
    *,
    sinr_spread: float = 1.5,
    demand_low: int = 1,
    rb_low: int = 2,
    rb_high: int = 8,
) -> RadioInstance:
    """Synthetic radio instance with log-normal SINR draws."""
    sinr = np.exp(rng.normal(1.0, sinr_spread, size=(n, m)))
    demand = rng.integers(demand_low, 11, size=m)
    n_total = n * int(rng.integers(rb_low, rb_high + 1))
    return RadioInstance(
        sinr=sinr,
        cost=1.0 / sinr,
        demand=demand,
        n_total=n_total,
        mu=np.full(n, 1.0 / n),
    )


def make_equality_instance(rng: np.random.Generator, n: int, m: int) -> RadioInstance:
    """Instance whose total demand cap exceeds 1, as equality supply requires.

    Also keeps sum(nu0) >= 1 so the simplex-equality allocation only removes
    mass and stays below the per-user caps.
    """
    while True:
        inst = make_instance(rng, n, m, demand_low=5, rb_low=1, rb_high=3)
        t = inst.demand_scaled
        nu0 = t - inst.cost.min(axis=0) / 2.0
        if t.sum() >= 1.05 and nu0.sum() >= 1.0:
            return inst


DESK_PARAMS = RadioParams(rb_per_station=50)
DESK_RATIOS = np.arange(2.5, 20.0 + 0.625, 1.25)
DESK_SEED = 20260809


@pytest.fixture(scope="session")
def desk_exact_sweep():
    """Reduced-scale exact Poisson sweep shared by the acceptance criteria.

    Half-size stations (50 resource blocks each), with the density-ratio grid
    rescaled from 5..40 by the same factor, 200 iterations per point.
    """
    iters = scaled(200, minimum=20)
    return sweep(
        DESK_RATIOS,
        iters,
        "exact",
        "poisson",
        DESK_PARAMS,
        DESK_SEED,
    )


@pytest.fixture(scope="session")
def desk_approx_sweep():
    iters = scaled(200, minimum=20)
    return sweep(
        DESK_RATIOS,
        iters,
        "approximate",
        "poisson",
        DESK_PARAMS,
        DESK_SEED,
    )
