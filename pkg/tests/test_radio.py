"""Radio-model tests: SINR geometry, demand rule, instance assembly."""

import numpy as np
import pytest

from cn_alloc import (
    DegenerateInstanceError,
    InvalidParameterError,
    PointPattern,
    RadioInstance,
    RadioParams,
    Window,
    build_instance,
    compute_sinr,
    demand_vector,
)

NO_SHADOW = RadioParams(shadowing_sigma_db=0.0)


def _pattern(points, side=10.0):
    return PointPattern(np.asarray(points, float), Window(side), intensity_requested=1.0)


class TestComputeSinr:
    def test_two_equidistant_stations(self):
        stations = _pattern([(-1.0, 0.0), (1.0, 0.0)])
        users = _pattern([(0.0, 0.0)])
        sinr = compute_sinr(stations, users, NO_SHADOW, seed=0)
        assert sinr[0, 0] == pytest.approx(1.0)
        assert sinr[1, 0] == pytest.approx(1.0)

    def test_distance_ratio_gain(self):
        # distances 1 and 2, exponent 3: near-station SINR = (1^-3)/(2^-3) = 8
        stations = _pattern([(1.0, 0.0), (2.0, 0.0)])
        users = _pattern([(0.0, 0.0)])
        sinr = compute_sinr(stations, users, NO_SHADOW, seed=0)
        assert sinr[0, 0] == pytest.approx(8.0)
        assert sinr[1, 0] == pytest.approx(1.0 / 8.0)

    def test_two_station_sinr_product_is_one(self):
        rng = np.random.default_rng(7)
        for seed in range(50):
            pts = rng.uniform(-0.5, 0.5, size=(3, 2))
            stations = _pattern(pts[:2], side=1.0)
            users = _pattern(pts[2:], side=1.0)
            sinr = compute_sinr(stations, users, RadioParams(), seed=seed)
            assert sinr[0, 0] * sinr[1, 0] == pytest.approx(1.0, rel=1e-12)

    def test_single_station_degenerate(self):
        stations = _pattern([(0.0, 0.0)])
        users = _pattern([(1.0, 0.0)])
        with pytest.raises(DegenerateInstanceError):
            compute_sinr(stations, users, NO_SHADOW, seed=0)

    def test_single_station_with_noise_ok(self):
        stations = _pattern([(0.0, 0.0)])
        users = _pattern([(1.0, 0.0)])
        params = RadioParams(shadowing_sigma_db=0.0, noise_power=0.5)
        sinr = compute_sinr(stations, users, params, seed=0)
        assert sinr[0, 0] == pytest.approx(2.0)  # gain 1 over noise 0.5

    def test_shadowing_off_is_deterministic(self):
        stations = _pattern([(0.0, 0.0), (1.0, 1.0)])
        users = _pattern([(0.5, 0.0), (2.0, 2.0)])
        a = compute_sinr(stations, users, NO_SHADOW, seed=1)
        b = compute_sinr(stations, users, NO_SHADOW, seed=2)
        assert np.array_equal(a, b)

    def test_tx_power_scale_invariance(self):
        stations = _pattern([(0.0, 0.0), (1.0, 1.0), (3.0, 0.0)])
        users = _pattern([(0.5, 0.0), (2.0, 2.0)])
        base = compute_sinr(stations, users, RadioParams(), seed=5)
        doubled = compute_sinr(stations, users, RadioParams(tx_power=2.0), seed=5)
        assert np.array_equal(base, doubled)  # power-of-two scaling is exact

    def test_min_distance_floor(self):
        stations = _pattern([(0.0, 0.0), (5.0, 0.0)])
        users = _pattern([(0.0, 0.0)])  # exactly on the station
        sinr = compute_sinr(stations, users, NO_SHADOW, seed=0)
        assert np.isfinite(sinr).all()


class TestDemandVector:
    def test_spec_values(self):
        params = RadioParams()
        assert demand_vector(np.array([[15.0]]), params)[0] == 6
        assert demand_vector(np.array([[1.0]]), params)[0] == 10  # 23 capped
        assert demand_vector(np.array([[1.0e6]]), params)[0] == 2

    def test_monotone_in_best_sinr(self):
        params = RadioParams()
        rng = np.random.default_rng(11)
        for _ in range(1000):
            s = rng.uniform(0.05, 1000.0)
            bump = s * rng.uniform(1.0, 3.0)
            n_low = demand_vector(np.array([[s]]), params)[0]
            n_high = demand_vector(np.array([[bump]]), params)[0]
            assert n_high <= n_low

    def test_at_least_one(self):
        params = RadioParams()
        assert demand_vector(np.array([[1e12]]), params)[0] >= 1


class TestBuildInstance:
    def test_totals_and_mu(self):
        stations = _pattern([(-1.0, 0.0), (1.0, 0.0)])
        users = _pattern([(0.0, 0.1), (0.2, 0.0), (1.0, 1.0)])
        inst = build_instance(stations, users, NO_SHADOW, seed=0)
        assert inst.n_total == 200
        assert np.allclose(inst.mu, [0.5, 0.5])
        assert inst.n == 2 and inst.m == 3

    def test_cost_is_exact_reciprocal(self):
        stations = _pattern([(-1.0, 0.0), (1.0, 0.0)])
        users = _pattern([(0.3, 0.1)])
        inst = build_instance(stations, users, RadioParams(), seed=4)
        assert np.array_equal(inst.cost, 1.0 / inst.sinr)

    def test_reciprocal_value(self):
        inst = RadioInstance(
            sinr=np.array([[4.0]]),
            cost=np.array([[0.25]]),
            demand=np.array([3]),
            n_total=10,
            mu=np.array([1.0]),
        )
        assert inst.cost[0, 0] == 0.25

    def test_demand_in_range(self):
        rng = np.random.default_rng(3)
        for seed in range(20):
            pts = rng.uniform(-0.5, 0.5, size=(8, 2))
            stations = _pattern(pts[:4], side=1.0)
            users = _pattern(pts[4:], side=1.0)
            inst = build_instance(stations, users, RadioParams(), seed=seed)
            assert ((inst.demand >= 1) & (inst.demand <= 10)).all()

    def test_invariant_validation(self):
        with pytest.raises(InvalidParameterError):
            RadioInstance(
                sinr=np.array([[1.0]]),
                cost=np.array([[2.0]]),  # not 1/sinr is fine, but negative isn't
                demand=np.array([0]),  # demand below 1 rejected
                n_total=10,
                mu=np.array([1.0]),
            )
        with pytest.raises(InvalidParameterError):
            RadioParams(pathloss_exponent=2.0)
        with pytest.raises(InvalidParameterError):
            RadioParams(min_distance=0.0)
