"""Equilibria tests: objective, projections, approximate and exact solvers."""

import numpy as np
import pytest

from cn_alloc import (
    ExactProblem,
    InvalidParameterError,
    ProvablyInfeasibleError,
    RadioInstance,
    approx_allocate,
    approx_solve,
    objective_value,
    project_sum_one_zerofix,
    simplex_project_oracle,
    solve_exact,
)

from conftest import make_equality_instance, make_instance, scaled
from oracles import reference_qp_minimize


def _tiny_instance(cost, demand, n_total):
    cost = np.asarray(cost, dtype=float)
    n = cost.shape[0]
    return RadioInstance(
        sinr=1.0 / cost,
        cost=cost,
        demand=np.asarray(demand, dtype=int),
        n_total=n_total,
        mu=np.full(n, 1.0 / n),
    )


class TestObjectiveValue:
    def test_zero_plan(self):
        inst = _tiny_instance([[0.5, 0.8]], [2, 3], 10)
        t = inst.demand_scaled
        assert objective_value(np.zeros((1, 2)), inst) == pytest.approx((t**2).sum())

    def test_one_dimensional_example(self):
        # gamma=0.4, c=0.2, N/N_t=0.5 -> 0.4*0.2 + (0.4-0.5)^2 = 0.09
        inst = _tiny_instance([[0.2]], [5], 10)
        assert objective_value(np.array([[0.4]]), inst) == pytest.approx(0.09)

    def test_columns_matching_demand_with_negligible_cost(self):
        inst = _tiny_instance([[1e-300, 1e-300]], [2, 3], 10)
        gamma = inst.demand_scaled[None, :]
        assert objective_value(gamma, inst) == pytest.approx(0.0, abs=1e-15)

    def test_dimension_mismatch(self):
        inst = _tiny_instance([[0.5]], [1], 10)
        with pytest.raises(InvalidParameterError):
            objective_value(np.zeros((2, 2)), inst)


class TestZeroFixProjection:
    def test_interior_shift(self):
        nu, k, _ = project_sum_one_zerofix(np.array([0.7, 0.5]))
        assert np.allclose(nu, [0.6, 0.4])
        assert k == 0

    def test_zero_fixing_pass(self):
        # first pass gives (1.4, -0.4); zero the negative; reproject -> (1, 0)
        nu, k, reprojections = project_sum_one_zerofix(np.array([1.5, -0.3]))
        assert np.allclose(nu, [1.0, 0.0])
        assert k == 1
        assert reprojections == 1

    def test_idempotence(self):
        rng = np.random.default_rng(0)
        for _ in range(scaled(1000, minimum=200)):
            m = int(rng.integers(1, 30))
            v = rng.normal(0.0, 1.0, m)
            nu, _, _ = project_sum_one_zerofix(v)
            again, _, _ = project_sum_one_zerofix(nu)
            assert np.abs(again - nu).max() <= 1e-12

    def test_matches_sort_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(scaled(1000, minimum=200)):
            m = int(rng.integers(2, 60))
            scale = 10.0 ** rng.integers(-3, 3)
            v = rng.normal(0.0, scale, m)
            nu, _, _ = project_sum_one_zerofix(v)
            ref = simplex_project_oracle(v)
            assert np.abs(nu - ref).max() <= 1e-10

    def test_termination_bound(self):
        rng = np.random.default_rng(2)
        for _ in range(scaled(1000, minimum=200)):
            m = int(rng.integers(2, 40))
            v = rng.normal(-1.0, 2.0, m)
            _, _, reprojections = project_sum_one_zerofix(v)
            assert reprojections <= m - 1


class TestSimplexOracle:
    def test_cases(self):
        assert np.allclose(simplex_project_oracle([0.7, 0.5]), [0.6, 0.4])
        assert np.allclose(simplex_project_oracle([1.0, 0.0, 0.0]), [1.0, 0.0, 0.0])
        assert np.allclose(simplex_project_oracle([2.0, 2.0]), [0.5, 0.5])


class TestApproxAllocate:
    def test_demand_capped_keeps_clipped_vector(self):
        # nu0 = t - cmin/2 = (0.3, 0.2); total 0.5 <= 1 so returned unchanged
        inst = _tiny_instance([[0.2, 0.3], [5.0, 5.0]], [8, 7], 20)
        nu, k = approx_allocate(inst, "demand_capped")
        assert np.allclose(nu, [0.3, 0.2])
        assert k == 0

    def test_demand_capped_clips_negatives(self):
        inst = _tiny_instance([[2.0, 0.3], [5.0, 5.0]], [2, 7], 20)
        nu, k = approx_allocate(inst, "demand_capped")
        assert nu[0] == 0.0
        assert k == 1

    def test_simplex_equality_mode(self):
        inst = _tiny_instance([[0.2, 0.3], [5.0, 5.0]], [18, 17], 20)
        nu, k = approx_allocate(inst, "simplex_equality")
        assert nu.sum() == pytest.approx(1.0)
        assert k == 0

    def test_bad_mode(self):
        inst = _tiny_instance([[0.5]], [1], 10)
        with pytest.raises(InvalidParameterError):
            approx_allocate(inst, "nonsense")

    def test_demand_cap_respected(self):
        rng = np.random.default_rng(3)
        for _ in range(scaled(500, minimum=100)):
            inst = make_instance(rng, int(rng.integers(1, 5)), int(rng.integers(1, 9)))
            nu, _ = approx_allocate(inst, "demand_capped")
            assert (nu <= inst.demand_scaled + 1e-9).all()
            assert nu.sum() <= 1.0 + 1e-9

    def test_uniqueness_bitwise(self):
        rng = np.random.default_rng(4)
        inst = make_instance(rng, 3, 6)
        a, _ = approx_allocate(inst, "demand_capped")
        b, _ = approx_allocate(inst, "demand_capped")
        assert np.array_equal(a, b)


class TestApproxSolve:
    def test_column_sums_match_allocation(self):
        rng = np.random.default_rng(5)
        for _ in range(scaled(200, minimum=40)):
            inst = make_instance(rng, int(rng.integers(1, 5)), int(rng.integers(1, 8)))
            eq = approx_solve(inst, "demand_capped")
            assert np.abs(eq.gamma.col_sums - eq.nu).max() <= 1e-9
            assert eq.diagnostics.method == "approximate"

    def test_single_station_plan_is_allocation(self):
        rng = np.random.default_rng(6)
        inst = make_instance(rng, 1, 6)
        eq = approx_solve(inst, "demand_capped")
        assert np.allclose(eq.gamma.gamma[0], eq.nu, atol=1e-12)

    def test_empty_network(self):
        # costs so high nothing is worth allocating
        inst = _tiny_instance([[400.0, 500.0]], [1, 1], 10)
        eq = approx_solve(inst, "demand_capped")
        assert eq.nu.sum() == 0.0
        assert eq.gamma.gamma.sum() == 0.0

    def test_row_sums_within_supply(self):
        rng = np.random.default_rng(7)
        for _ in range(scaled(200, minimum=40)):
            inst = make_instance(rng, int(rng.integers(2, 5)), int(rng.integers(2, 8)))
            eq = approx_solve(inst, "demand_capped")
            assert (eq.gamma.row_sums <= inst.mu + 1e-9).all()


class TestSolveExact:
    def test_one_dimensional_interior_optimum(self):
        # minimize g^2 + (0.2 - 1.0) g -> g* = 0.4 with both caps slack
        inst = _tiny_instance([[0.2]], [5], 10)
        eq = solve_exact(ExactProblem(inst, "inequality"))
        assert eq.nu[0] == pytest.approx(0.4, abs=1e-8)
        assert eq.gamma.gamma[0, 0] == pytest.approx(0.4, abs=1e-8)
        assert eq.objective == pytest.approx(0.09, abs=1e-8)

    def test_one_dimensional_cap_binds_with_negligible_cost(self):
        inst = _tiny_instance([[1e-12]], [5], 10)
        eq = solve_exact(ExactProblem(inst, "inequality"))
        assert eq.nu[0] == pytest.approx(0.5, abs=1e-8)

    def test_equality_infeasible_low_demand(self):
        inst = _tiny_instance([[0.5, 0.5]], [2, 3], 100)  # caps total 0.05
        with pytest.raises(ProvablyInfeasibleError):
            solve_exact(ExactProblem(inst, "equality"))

    def test_matches_reference_minimizer(self):
        rng = np.random.default_rng(8)
        insts = [make_instance(rng, 2, 2) for _ in range(scaled(20, minimum=8))]
        cost = np.stack([i.cost for i in insts])
        caps = np.stack([i.demand_scaled for i in insts])
        _, obj_ref = reference_qp_minimize(cost, caps, insts[0].mu, iters=20000)
        for b, inst in enumerate(insts):
            eq = solve_exact(ExactProblem(inst, "inequality"))
            assert eq.objective == pytest.approx(obj_ref[b], abs=1e-4)
            assert eq.diagnostics.kkt_residual <= 1e-8

    def test_marginal_consistency_and_bounds(self):
        rng = np.random.default_rng(9)
        for _ in range(scaled(100, minimum=20)):
            inst = make_instance(rng, int(rng.integers(2, 5)), int(rng.integers(2, 7)))
            eq = solve_exact(ExactProblem(inst, "inequality"))
            assert np.abs(eq.gamma.col_sums - eq.nu).max() <= 1e-9
            assert (eq.nu >= -1e-12).all()
            assert (eq.nu <= inst.demand_scaled + 1e-9).all()
            assert eq.nu.sum() <= 1.0 + 1e-9
            assert (eq.gamma.row_sums <= inst.mu + 1e-9).all()

    def test_nu_unique_under_permutation(self):
        # nu is unique by strict convexity; permuting the problem must not move it
        rng = np.random.default_rng(10)
        for _ in range(scaled(20, minimum=8)):
            inst = make_instance(rng, 3, 5)
            perm = rng.permutation(inst.m)
            permuted = RadioInstance(
                sinr=inst.sinr[:, perm],
                cost=inst.cost[:, perm],
                demand=inst.demand[perm],
                n_total=inst.n_total,
                mu=inst.mu,
            )
            a = solve_exact(ExactProblem(inst, "inequality"))
            b = solve_exact(ExactProblem(permuted, "inequality"))
            assert np.abs(a.nu[perm] - b.nu).max() <= 1e-6

    def test_determinism(self):
        rng = np.random.default_rng(11)
        inst = make_instance(rng, 3, 5)
        a = solve_exact(ExactProblem(inst, "inequality"))
        b = solve_exact(ExactProblem(inst, "inequality"))
        assert np.array_equal(a.nu, b.nu)
        assert a.objective == b.objective

    def test_equality_mode_allocates_full_supply(self):
        rng = np.random.default_rng(12)
        inst = make_equality_instance(rng, 2, 4)
        eq = solve_exact(ExactProblem(inst, "equality"))
        assert eq.nu.sum() == pytest.approx(1.0, abs=1e-8)
        assert np.abs(eq.gamma.row_sums - inst.mu).max() <= 1e-8


class TestExactDominatesApproximate:
    def test_inequality_demand_capped(self):
        rng = np.random.default_rng(13)
        for _ in range(scaled(100, minimum=25)):
            inst = make_instance(rng, int(rng.integers(1, 5)), int(rng.integers(1, 8)))
            exact = solve_exact(ExactProblem(inst, "inequality"))
            approx = approx_solve(inst, "demand_capped")
            assert exact.objective <= approx.objective + 1e-8

    def test_equality_simplex(self):
        rng = np.random.default_rng(14)
        for _ in range(scaled(50, minimum=15)):
            inst = make_equality_instance(rng, 2, 5)
            exact = solve_exact(ExactProblem(inst, "equality"))
            approx = approx_solve(inst, "simplex_equality")
            assert exact.objective <= approx.objective + 1e-8
