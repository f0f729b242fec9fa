"""
Тесты численных проверок на синтетических и вычисленных полях.
"""

import numpy as np
import pytest

from app.eigen import first_eigenpair
from app.exceptions import PreconditionNotMet, WindowTooSmall
from app.grid import build_grid
from app.branch import find_roots, nonexistence_bound
from app.solve import LadderResult, invert_plap, monotone_violation
from app.verify import (
    check_boundary_exponent,
    check_branch_solutions,
    check_comparison,
    check_delta0,
    check_full_dominates_pure,
    check_interior_floor,
    check_interior_seminorm,
    check_monotone_ladder,
    check_nonexistence,
    check_picone,
    check_scaling_law,
    check_small_branch,
    check_super_bounds_minimal,
    check_uniform_hopf,
    classify_refinement,
    picone_pairing,
)


def ladder_of(fields):
    return LadderResult(
        entries=list(zip([1, 2, 4][: len(fields)], fields)),
        extrapolated_limit=fields[-1],
        monotone_violation=monotone_violation(fields),
    )


@pytest.fixture
def eigen(grid3):
    return first_eigenpair(grid3, 2.0)


class TestLadderChecks:
    def test_monotone_ladder_passes_and_permutation_fails(self, grid3):
        base = grid3.sample(lambda r: 1.0 - r**2)
        ladder = ladder_of([base.with_values(k * base.values) for k in (1.0, 2.0, 3.0)])
        assert check_monotone_ladder(ladder).status == "pass"
        assert check_monotone_ladder(ladder.permuted(), name="permuted").status == "fail"

    def test_interior_floor(self, grid3):
        base = grid3.sample(lambda r: 1.0 - r**2)
        good = ladder_of([base, base.with_values(2.0 * base.values)])
        assert check_interior_floor(good).status == "pass"
        bad = ladder_of([base, base.with_values(0.5 * base.values)])
        assert check_interior_floor(bad).status == "fail"

    def test_uniform_hopf(self, grid3):
        base = grid3.sample(lambda r: 1.0 - r)
        steady = ladder_of([base, base.with_values(1.5 * base.values)])
        assert check_uniform_hopf(steady).status == "pass"
        fading = ladder_of([base, base.with_values(0.1 * base.values)])
        assert check_uniform_hopf(fading).status == "fail"

    def test_interior_seminorm_is_informational(self, grid3):
        base = grid3.sample(lambda r: 1.0 - r**2)
        result = check_interior_seminorm(ladder_of([base, base.with_values(2.0 * base.values)]), 2.0)
        assert result.status == "info"
        assert result.measured == pytest.approx(4.0)


class TestPicone:
    def test_equality_at_eigenfunction(self, eigen):
        result = check_picone(eigen.phi1, eigen)
        assert abs(result.measured) <= 1e-6
        assert result.status == "pass"

    def test_nonnegative_for_positive_field(self, grid3, eigen):
        u = invert_plap(grid3.field(1.0), 2.0)
        assert picone_pairing(u, eigen.phi1, 2.0) >= -1e-10

    def test_requires_positive_interior(self, grid3, eigen):
        with pytest.raises(PreconditionNotMet):
            check_picone(grid3.field(0.0), eigen)


class TestComparison:
    def test_larger_source_gives_larger_solution(self, grid3):
        ones, twos = grid3.field(1.0), grid3.field(2.0)
        result = check_comparison(invert_plap(twos, 2.0), invert_plap(ones, 2.0), twos, ones)
        assert result.status == "pass"
        assert result.extra["slope_gap"] > 0

    def test_precondition_on_sources(self, grid3):
        ones, twos = grid3.field(1.0), grid3.field(2.0)
        with pytest.raises(PreconditionNotMet):
            check_comparison(invert_plap(ones, 2.0), invert_plap(twos, 2.0), ones, twos)
        with pytest.raises(PreconditionNotMet):
            check_comparison(invert_plap(ones, 2.0), invert_plap(ones, 2.0), ones, ones)


class TestBoundaryExponent:
    @pytest.fixture
    def grid(self):
        return build_grid(1024, 3.0, 3)

    def test_exact_power(self, grid):
        u = grid.sample(lambda r: (1.0 - r) ** (2.0 / 3.0))
        result = check_boundary_exponent(u, p=2.0, delta=2.0)
        assert result.status == "pass"
        assert result.extra["slope"] == pytest.approx(2.0 / 3.0, abs=1e-8)

    def test_wrong_exponent_fails(self, grid):
        u = grid.sample(lambda r: 1.0 - r)
        assert check_boundary_exponent(u, p=2.0, delta=2.0).status == "fail"

    def test_logarithmic_factor_at_delta_one(self, grid):
        d = np.maximum(1.0 - grid.nodes, 1e-300)
        u = grid.field(np.append((d * np.log(1.0 / d) ** 0.5)[:-1], 0.0))
        assert check_boundary_exponent(u, p=2.0, delta=1.0).status == "pass"

    def test_window_too_small(self):
        grid = build_grid(32, 1.0, 3)
        with pytest.raises(WindowTooSmall):
            check_boundary_exponent(grid.sample(lambda r: 1.0 - r), p=2.0, delta=2.0)


class TestClassifyRefinement:
    @pytest.mark.parametrize(
        "values, expected",
        [
            ([1.0, 1.01, 1.02], "BOUNDED"),
            ([1.0, 2.0, 4.0], "DIVERGING"),
            ([1.0, 1.1, 1.5], "INCONCLUSIVE"),
        ],
    )
    def test_classes(self, values, expected):
        assert classify_refinement(values) == expected


class TestSolutionChecks:
    def test_scaling_law(self, grid3, pure_params):
        result = check_scaling_law(pure_params, grid3, [(1.0, 16.0)])
        assert result.measured <= 1e-6
        assert result.status == "pass"

    def test_full_dominates_pure(self, grid3, model_params):
        assert check_full_dominates_pure(model_params, grid3, 1e-9).status == "pass"

    def test_small_branch_uniqueness(self, grid3, model_params):
        result = check_small_branch(model_params.with_lambda(0.05), grid3, 1e-9)
        assert result.status == "pass"
        assert result.extra["threshold"] > 0

    def test_small_branch_is_informational_for_weak_singularity(self, grid3, model_params):
        params = model_params.model_copy(update={"delta": 0.5, "lambda_": 0.05})
        assert check_small_branch(params, grid3, 1e-9).status == "info"

    def test_power_only_checks_at_zero_lambda(self, grid3, model_params):
        params = model_params.with_lambda(0.0)
        assert check_small_branch(params, grid3, 1e-9).status == "info"
        assert check_full_dominates_pure(params, grid3, 1e-9).status == "info"
        assert check_super_bounds_minimal(params, grid3, 1e-9).status == "info"

    def test_delta0_gap_scan_starts_near_zero(self, model_params, monkeypatch):
        scans = []

        def fake_roots(params, lo, hi, samples, rtol):
            scans.append((lo, hi, samples))
            return []

        monkeypatch.setattr("app.verify.ground_state_norm", lambda params, rtol: 20.0)
        monkeypatch.setattr("app.verify.find_roots", fake_roots)
        result = check_delta0(model_params)

        assert result.status == "pass"
        assert scans == [(pytest.approx(2e-5), 10.0, 240)]

    @pytest.mark.slow
    def test_delta0_gap(self, model_params):
        result = check_delta0(model_params)
        assert result.status == "pass"
        assert result.measured == pytest.approx(4.35287**2, rel=1e-4)
        assert result.extra["roots_below"] == []
        assert result.extra["scan"][0] <= 1e-6 * result.measured * (1 + 1e-12)
        assert result.extra["scan"][1] == pytest.approx(result.measured / 2.0)


class TestBranchChecks:
    @pytest.fixture
    def params(self, model_params):
        return model_params.with_n(10).with_lambda(1e-3)

    def test_shooting_roots_polish_into_two_solutions(self, grid3, eigen, params):
        roots = find_roots(params, 1e-4, 1e3, 150)
        results = {r.name: r for r in check_branch_solutions(params, grid3, eigen, roots, 1e-9)}

        assert set(results) == {
            "shooting_newton[lower]", "shooting_newton[upper]",
            "picone_branch[lower]", "picone_branch[upper]",
        }
        assert results["picone_branch[lower]"].status == "pass"
        assert results["picone_branch[upper]"].status == "pass"
        for tag, M in zip(("lower", "upper"), roots):
            agreement = results[f"shooting_newton[{tag}]"]
            assert agreement.extra["M"] == M
            assert agreement.extra["sup_norm"] == pytest.approx(M, rel=1e-2)
            assert agreement.extra["polish_distance"] >= 0.0

    def test_no_roots_gives_no_checks(self, grid3, eigen, params):
        assert check_branch_solutions(params, grid3, eigen, [], 1e-9) == []

    def test_nonexistence_beyond_picone_bound(self, grid3, eigen, params):
        bound = nonexistence_bound(params, eigen)
        result = check_nonexistence(params.with_lambda(1.5 * bound), grid3, eigen, 1e-9)
        assert result.status == "pass"
        assert result.measured == 0.0
        assert result.extra["seeds"] == 10

    def test_nonexistence_fails_where_solutions_exist(self, grid3, eigen, params):
        result = check_nonexistence(params, grid3, eigen, 1e-9)
        assert result.status == "fail"
        assert result.measured >= 1.0
