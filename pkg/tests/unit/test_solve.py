"""
Тесты решателей: обращение p-Лапласиана, чисто сингулярная задача,
лестница, нижние/верхние решения, Ньютон с дефляцией.
"""

import numpy as np
import pytest

from app.eigen import first_eigenpair
from app.exceptions import (
    ConvergedToDeflated,
    MeshTooCoarseNearBoundary,
    NegativeLambda,
    NegativeRhs,
    NoSuchMu,
    NotSubSolution,
)
from app.grid import build_grid
from app.plap import residual, residual_scale, scaled_residual_sup
from app.schemas import LIMIT, ProblemParams
from app.solve import (
    LadderResult,
    _check_boundary_layer,
    aitken,
    boosted_lambda,
    invert_plap,
    max_certified_c,
    monotone_violation,
    regularization_ladder,
    singular_map,
    small_branch_threshold,
    solve_full,
    solve_pure_singular,
    sub_solution,
)


def torsion(r, p, dim_N):
    return (p - 1.0) / p * dim_N ** (-1.0 / (p - 1.0)) * (1.0 - r ** (p / (p - 1.0)))


class TestInvertPlap:
    @pytest.mark.parametrize("p, dim_N", [(2.0, 2), (2.0, 3), (3.0, 3)])
    def test_reproduces_torsion_function(self, p, dim_N):
        grid = build_grid(2048, 3.0, dim_N)
        u = invert_plap(grid.field(1.0), p)
        exact = torsion(grid.nodes, p, dim_N)
        assert np.max(np.abs(u.values - exact)) <= 1e-4 * np.max(exact)
        assert u.values[-1] == 0.0

    def test_monotone_in_rhs(self, grid3):
        small = invert_plap(grid3.field(1.0), 3.0)
        large = invert_plap(grid3.sample(lambda r: 1.0 + r), 3.0)
        assert np.all(large.interior > small.interior)

    def test_negative_rhs(self, grid3):
        rhs = grid3.field(1.0)
        values = rhs.values.copy()
        values[3] = -1.0
        with pytest.raises(NegativeRhs) as exc_info:
            invert_plap(rhs.with_values(values), 2.0)
        assert exc_info.value.details["node"] == 3

    def test_conjugate_gradients_agree_with_flux_solution(self):
        grid = build_grid(32, 1.0, 3)
        rhs = grid.sample(lambda r: 1.0 + r**2)
        exact = invert_plap(rhs, 2.0)
        by_cg = invert_plap(rhs, 2.0, tol=1e-12, method="cg")
        assert np.max(np.abs(by_cg.values - exact.values)) <= 1e-3 * exact.sup_norm

    def test_unknown_method(self, grid3):
        with pytest.raises(ValueError):
            invert_plap(grid3.field(1.0), 2.0, method="multigrid")


class TestPureSingular:
    def test_finite_n_solution_lies_in_bracket(self, grid3, pure_params):
        params = pure_params.with_n(4)
        result = solve_pure_singular(params, grid3)
        assert result.residual_sup <= 1e-9
        lower, upper = result.bracket
        assert np.all(result.u.values >= lower.values - 1e-12)
        assert np.all(result.u.values <= upper.values + 1e-12)

    def test_solution_between_residual_sub_and_super(self, grid3, pure_params):
        params = pure_params.with_n(10)
        below = grid3.field(0.0)
        above = invert_plap(grid3.field(params.lambda_ * 10**params.delta), params.p)
        assert np.all(residual(below, params).interior <= 0)
        assert np.all(residual(above, params).interior >= -1e-10 * residual_scale(above, params))

        u = solve_pure_singular(params, grid3).u
        assert np.all(below.values <= u.values + 1e-8)
        assert np.all(u.values <= above.values + 1e-8)

    def test_fixed_point_of_singular_map(self, grid3, pure_params):
        params = pure_params.with_n(2)
        u = solve_pure_singular(params, grid3).u
        assert singular_map(u, params).sup_distance(u) <= 1e-6 * u.sup_norm

    def test_limit_solution(self, grid3, pure_params):
        result = solve_pure_singular(pure_params, grid3)
        assert result.residual_sup <= 1e-9
        assert np.all(result.u.interior > 0)
        assert result.u.values[-1] == 0.0
        assert scaled_residual_sup(result.u, pure_params) == pytest.approx(result.residual_sup)

    def test_power_term_is_ignored(self, grid3, model_params, pure_params):
        with_power = solve_pure_singular(model_params.with_n(3), grid3).u
        without = solve_pure_singular(pure_params.with_n(3), grid3).u
        np.testing.assert_array_equal(with_power.values, without.values)

    def test_requires_positive_lambda(self, grid3, pure_params):
        with pytest.raises(NegativeLambda):
            solve_pure_singular(pure_params.with_lambda(0.0), grid3)

    def test_boundary_layer_guard(self, pure_params):
        grid = build_grid(64, 3.0, 3)
        u = grid.field(np.append(np.ones(grid.m), 0.0))
        with pytest.raises(MeshTooCoarseNearBoundary):
            _check_boundary_layer(u, pure_params)


class TestLadder:
    def test_monotone_in_n(self, grid3, pure_params):
        ladder = regularization_ladder(pure_params, grid3, [1, 2, 4, 8])
        assert [n for n, _ in ladder.entries] == [1, 2, 4, 8]
        assert ladder.monotone_violation <= 1e-8 * ladder.max_sup_norm
        sups = [u.sup_norm for _, u in ladder.entries]
        assert sups == sorted(sups)

    def test_permutation_breaks_monotonicity(self, grid3, pure_params):
        ladder = regularization_ladder(pure_params, grid3, [1, 4, 16])
        assert ladder.permuted().monotone_violation > 1e-3 * ladder.max_sup_norm

    def test_full_problem_ladder(self, grid3, model_params):
        ladder = regularization_ladder(model_params, grid3, [1, 2, 4])
        assert ladder.monotone_violation <= 1e-8 * ladder.max_sup_norm

    def test_power_problem_is_solved_once(self, grid3, model_params):
        """При λ = 0 решение одно для всех n (основное состояние −Δu = u²)."""
        ladder = regularization_ladder(model_params.with_lambda(0.0), grid3, [1, 10, 100])
        fields = [u for _, u in ladder.entries]
        assert [n for n, _ in ladder.entries] == [1, 10, 100]
        assert all(u is fields[0] for u in fields)
        assert ladder.extrapolated_limit is fields[0]
        assert ladder.monotone_violation == 0.0
        assert fields[0].sup_norm == pytest.approx(4.35287**2, rel=1e-2)
        assert np.all(fields[0].interior > 0)

    def test_power_problem_without_source_has_no_solution(self, grid3, pure_params):
        with pytest.raises(NegativeLambda):
            regularization_ladder(pure_params.with_lambda(0.0), grid3, [1, 2])

    @pytest.mark.parametrize("n_list", [[], [2, 1], [0, 1], [1, 1, 2]])
    def test_rejects_bad_n_list(self, grid3, pure_params, n_list):
        with pytest.raises(ValueError):
            regularization_ladder(pure_params, grid3, n_list)

    def test_aitken_on_geometric_sequence(self):
        x = [np.array([1.0 - 0.5**k]) for k in (1, 2, 3)]
        assert aitken(*x)[0] == pytest.approx(1.0)

    def test_aitken_falls_back_on_linear_sequence(self):
        x = [np.array([v]) for v in (1.0, 2.0, 3.0)]
        assert aitken(*x)[0] == 3.0

    def test_monotone_violation(self, grid3):
        low = grid3.field(1.0)
        high = grid3.field(2.0)
        assert monotone_violation([low, high]) == 0.0
        assert monotone_violation([high, low]) == 1.0

    def test_extrapolated_limit_from_last_three(self, grid3):
        fields = [grid3.field(1.0 - 0.5**k) for k in (1, 2, 3)]
        ladder = LadderResult(
            entries=list(zip([1, 2, 4], fields)),
            extrapolated_limit=fields[-1],
            monotone_violation=monotone_violation(fields),
        )
        assert ladder.max_sup_norm == pytest.approx(0.875)


class TestSubSolution:
    @pytest.fixture
    def eigen(self, grid3):
        return first_eigenpair(grid3, 2.0)

    @pytest.mark.parametrize("n", [LIMIT, 8])
    def test_certified_coefficient(self, eigen, pure_params, n):
        params = pure_params.with_n(n)
        c = max_certified_c(params, eigen)
        assert c > 0
        sub = sub_solution(params, eigen, c)
        assert np.all(sub.interior > 0)
        assert sub.values[-1] == 0.0
        R = residual(sub, params).interior
        assert np.all(R <= 1e-8 * residual_scale(sub, params))

    def test_lies_below_solution(self, grid3, eigen, pure_params):
        sub = sub_solution(pure_params, eigen, max_certified_c(pure_params, eigen))
        u = solve_pure_singular(pure_params, grid3).u
        assert np.all(sub.values <= u.values + 1e-6 * u.sup_norm)

    def test_large_coefficient_is_rejected(self, eigen, pure_params):
        with pytest.raises(NotSubSolution) as exc_info:
            sub_solution(pure_params, eigen, 1e6)
        assert 0 <= exc_info.value.node < eigen.phi1.grid.m

    def test_coefficient_must_be_positive(self, eigen, pure_params):
        with pytest.raises(ValueError):
            sub_solution(pure_params, eigen, 0.0)


class TestBoostedLambda:
    def test_mu_solves_balance(self, model_params):
        params = model_params.with_lambda(0.01)
        boost = boosted_lambda(params, T=0.5, delta0=18.9)
        T, k = 0.5, params.delta + params.p - 1.0
        A = 0.5 * ((boost.mu / T) ** k - boost.mu ** (params.delta + params.q))
        assert A == pytest.approx(0.01, rel=1e-8)
        assert 0 < boost.mu < boost.delta2
        assert boost.lambda_star == pytest.approx((boost.mu / T) ** k)
        assert boost.lambda_star > 0.01

    def test_large_lambda_has_no_mu(self, model_params):
        with pytest.raises(NoSuchMu):
            boosted_lambda(model_params.with_lambda(1e6), T=0.5, delta0=18.9)


class TestSolveFull:
    def test_minimal_solution_dominates_pure(self, grid3, model_params):
        pure = solve_pure_singular(model_params, grid3).u
        result = solve_full(model_params, pure)
        assert result.residual_sup <= 1e-9
        assert np.all(result.u.values >= pure.values - 1e-8)

    def test_deflated_root_is_reported(self, grid3, model_params):
        minimal = solve_full(model_params, solve_pure_singular(model_params, grid3).u).u
        with pytest.raises(ConvergedToDeflated) as exc_info:
            solve_full(model_params, minimal, deflated=[minimal])
        assert exc_info.value.details["index"] == 0


class TestSmallBranchThreshold:
    def test_limit_closed_form(self, model_params):
        # (λ(p+δ−1)/(q−p+1))^(1/(q+δ)) = (0.3)^(1/4)
        assert small_branch_threshold(model_params) == pytest.approx(0.3**0.25)

    def test_finite_n_root(self, model_params):
        params = model_params.with_n(10)
        M = small_branch_threshold(params)
        lhs = params.lambda_ * 3.0 * M + params.lambda_ * 1.0 / 10
        rhs = 1.0 * M**2 * (M + 0.1) ** 3
        assert lhs == pytest.approx(rhs, rel=1e-9)

    def test_approaches_limit(self, model_params):
        limit = small_branch_threshold(model_params)
        assert small_branch_threshold(model_params.with_n(10**6)) == pytest.approx(limit, rel=1e-3)

    def test_zero_lambda(self, model_params):
        assert small_branch_threshold(model_params.with_lambda(0.0)) == 0.0
