"""Per-instance radio quantities: SINR, transport costs, demand, supply marginal.

The channel model is log-distance path loss with i.i.d. log-normal shadowing
per (station, user) link, equal transmit power everywhere, and full frequency
reuse, so every other station interferes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInstanceError, InvalidParameterError
from .geometry import PointPattern, _rng_from


@dataclass(frozen=True)
class RadioParams:
    """Physical-layer and dimensioning parameters.

    ``capacity_target_bps`` is the per-user target rate C, ``rb_bandwidth_hz``
    the bandwidth of one resource block, ``rb_per_station`` the number of
    resource blocks each station owns, and ``rb_max_per_user`` the cap on the
    per-user request. ``min_distance`` floors the link distance to keep the
    path-loss gain finite.
    """

    pathloss_exponent: float = 3.0
    shadowing_sigma_db: float = 10.0
    tx_power: float = 1.0
    noise_power: float = 0.0
    capacity_target_bps: float = 4.0e6
    rb_bandwidth_hz: float = 1.8e5
    rb_per_station: int = 100
    rb_max_per_user: int = 10
    min_distance: float = 1e-3

    def __post_init__(self):
        if not self.pathloss_exponent > 2:
            raise InvalidParameterError("pathloss_exponent must be > 2")
        if self.shadowing_sigma_db < 0:
            raise InvalidParameterError("shadowing_sigma_db must be >= 0")
        if self.tx_power < 0 or self.noise_power < 0:
            raise InvalidParameterError("powers must be >= 0")
        if self.capacity_target_bps <= 0 or self.rb_bandwidth_hz <= 0:
            raise InvalidParameterError("capacity and bandwidth must be > 0")
        if self.rb_per_station < 1 or self.rb_max_per_user < 1:
            raise InvalidParameterError("resource-block counts must be >= 1")
        if not self.min_distance > 0:
            raise InvalidParameterError("min_distance must be > 0")


@dataclass(frozen=True)
class RadioInstance:
    """One network snapshot, ready for the allocation solvers.

    ``sinr`` and ``cost`` are n x m (row = station, column = user) with
    cost = 1/sinr elementwise. ``demand`` holds the integer per-user request
    N_j, ``n_total`` the total resource-block count, and ``mu`` the uniform
    supply marginal (1/n per station).
    """

    sinr: np.ndarray
    cost: np.ndarray
    demand: np.ndarray
    n_total: int
    mu: np.ndarray

    def __post_init__(self):
        sinr = np.asarray(self.sinr, dtype=float)
        object.__setattr__(self, "sinr", sinr)
        object.__setattr__(self, "cost", np.asarray(self.cost, dtype=float))
        object.__setattr__(self, "demand", np.asarray(self.demand, dtype=int))
        object.__setattr__(self, "mu", np.asarray(self.mu, dtype=float))
        if self.sinr.ndim != 2 or self.cost.shape != self.sinr.shape:
            raise InvalidParameterError("sinr and cost must be matching n x m matrices")
        n, m = self.sinr.shape
        if self.demand.shape != (m,) or self.mu.shape != (n,):
            raise InvalidParameterError("demand must have length m and mu length n")
        if not (self.sinr > 0).all():
            raise InvalidParameterError("all SINR values must be > 0")
        if not np.isfinite(self.cost).all() or not (self.cost > 0).all():
            raise InvalidParameterError("all costs must be finite and > 0")
        if (self.demand < 1).any():
            raise InvalidParameterError("demand entries must be >= 1")
        if not np.isclose(self.mu.sum(), 1.0, atol=1e-12):
            raise InvalidParameterError("mu must sum to 1")

    @property
    def n(self) -> int:
        return self.sinr.shape[0]

    @property
    def m(self) -> int:
        return self.sinr.shape[1]

    @property
    def demand_scaled(self) -> np.ndarray:
        """Per-user demand as a fraction of the total resource count."""
        return self.demand / self.n_total


def compute_sinr(
    stations: PointPattern, users: PointPattern, params: RadioParams, seed
) -> np.ndarray:
    """SINR matrix of every (station, user) link under full frequency reuse.

    Link gain is tx_power * shadow * max(d, min_distance)^(-alpha) with
    shadow = 10^(Z/10), Z ~ Normal(0, sigma_db^2) i.i.d. per link. The
    denominator of link (i, j) sums the gains of all other stations toward
    user j plus the noise power.
    """
    n, m = len(stations), len(users)
    if m < 1:
        raise DegenerateInstanceError("need at least one user")
    if n < 1:
        raise DegenerateInstanceError("need at least one station")
    if n == 1 and params.noise_power == 0:
        raise DegenerateInstanceError(
            "one station with zero noise power: interference denominator is 0"
        )
    rng = _rng_from(seed)
    sp = stations.points
    up = users.points
    d = np.hypot(sp[:, None, 0] - up[None, :, 0], sp[:, None, 1] - up[None, :, 1])
    d = np.maximum(d, params.min_distance)
    if params.shadowing_sigma_db > 0:
        shadow = 10.0 ** (rng.normal(0.0, params.shadowing_sigma_db, size=(n, m)) / 10.0)
    else:
        shadow = np.ones((n, m))
    gain = params.tx_power * shadow * d ** (-params.pathloss_exponent)
    # interference summed directly per link (subtracting the own gain from the
    # column total would cancel catastrophically when one gain dominates)
    off_diagonal = np.ones((n, n)) - np.eye(n)
    denom = off_diagonal @ gain + params.noise_power
    return gain / denom


def demand_vector(sinr: np.ndarray, params: RadioParams) -> np.ndarray:
    """Integer per-user resource-block request from the best-server SINR.

    N_j = min(ceil(C / (W_RB * log2(1 + max_i SINR_ij))), RB_max), at least 1.
    """
    sinr = np.asarray(sinr, dtype=float)
    best = sinr.max(axis=0)
    wanted = np.ceil(params.capacity_target_bps / (params.rb_bandwidth_hz * np.log2(1.0 + best)))
    return np.clip(wanted, 1, params.rb_max_per_user).astype(int)


def build_instance(
    stations: PointPattern, users: PointPattern, params: RadioParams, seed
) -> RadioInstance:
    """Assemble the full RadioInstance for one snapshot."""
    sinr = compute_sinr(stations, users, params, seed)
    n = sinr.shape[0]
    return RadioInstance(
        sinr=sinr,
        cost=1.0 / sinr,
        demand=demand_vector(sinr, params),
        n_total=params.rb_per_station * n,
        mu=np.full(n, 1.0 / n),
    )
