"""
Тесты стрельбы, поиска корней калибра и развёртки по λ.
"""

import numpy as np
import pytest

from app.branch import (
    BifurcationDiagram,
    DiagramPoint,
    ShotKind,
    _tag_roots,
    find_roots,
    ground_state,
    ground_state_norm,
    nonexistence_bound,
    reconstruct,
    scan_range,
    shoot,
    sweep_lambda,
)
from app.eigen import EigenPair, first_eigenpair

# ξ₁²: квадрат первого нуля решения Лейна–Эмдена с показателем 2 в R³
LANE_EMDEN_NORM = 4.35287**2


@pytest.fixture
def power_only(model_params):
    """−Δu = u² (λ = 0)."""
    return model_params.with_lambda(0.0)


@pytest.fixture
def eigen(grid3):
    return first_eigenpair(grid3, 2.0)


class TestShoot:
    def test_small_center_value_stays_positive(self, power_only):
        shot = shoot(power_only, 1.0)
        assert shot.kind is ShotKind.POSITIVE_AT_ONE
        assert shot.gauge > 0
        assert shot.r_end == 1.0

    def test_large_center_value_crosses(self, power_only):
        shot = shoot(power_only, 100.0)
        assert shot.kind is ShotKind.CROSSED_BEFORE
        # нуль в ξ₁/√M
        assert shot.r_end == pytest.approx(4.35287 / 10.0, rel=1e-4)
        assert shot.gauge == pytest.approx(-(1.0 - shot.r_end))

    def test_rejects_nonpositive_center(self, power_only):
        with pytest.raises(ValueError):
            shoot(power_only, 0.0)

    def test_limit_gauge_close_to_regularized(self, model_params):
        # при u(1) порядка единицы сдвиг 1/n почти не меняет калибр
        limit = shoot(model_params, 5.0).gauge
        regularized = shoot(model_params.with_n(100), 5.0).gauge
        assert np.isfinite(limit)
        assert limit == pytest.approx(regularized, abs=0.05)

    def test_reconstruct_matches_center_value(self, power_only, grid3):
        M = ground_state_norm(power_only)
        u = reconstruct(power_only, M, grid3)
        assert u.values[0] == pytest.approx(M, rel=1e-6)
        assert u.values[-1] == 0.0
        assert np.all(np.diff(u.values) <= 1e-12)

    def test_ground_state_is_positive_inside(self, power_only, grid3):
        u = ground_state(power_only, grid3, LANE_EMDEN_NORM)
        assert u.values[-1] == 0.0
        assert np.all(u.interior > 0)
        assert u.sup_norm == pytest.approx(LANE_EMDEN_NORM, rel=1e-6)

    def test_ground_state_ignores_lambda(self, model_params, grid3):
        u = ground_state(model_params, grid3, LANE_EMDEN_NORM)
        expected = reconstruct(model_params.with_lambda(0.0), LANE_EMDEN_NORM, grid3)
        assert np.allclose(u.values[:-1], np.maximum(expected.values[:-1], 1e-14))


class TestRoots:
    def test_ground_state_norm(self, power_only):
        assert ground_state_norm(power_only) == pytest.approx(LANE_EMDEN_NORM, rel=1e-4)

    def test_single_root_at_zero_lambda(self, power_only):
        roots = find_roots(power_only, 1.0, 100.0, 60)
        assert len(roots) == 1
        assert roots[0] == pytest.approx(LANE_EMDEN_NORM, rel=1e-4)

    def test_two_roots_for_small_lambda(self, model_params):
        params = model_params.with_n(10).with_lambda(1e-3)
        roots = find_roots(params, 1e-4, 1e3, 150)
        assert len(roots) == 2
        assert roots[0] < 1.0 < roots[1]

    def test_empty_interval(self, power_only):
        with pytest.raises(ValueError):
            find_roots(power_only, 2.0, 1.0, 10)

    def test_scan_range_brackets_both_scales(self, model_params):
        lo, hi = scan_range(model_params, LANE_EMDEN_NORM)
        assert lo < 1e-2 * LANE_EMDEN_NORM
        assert hi == pytest.approx(1e3 * LANE_EMDEN_NORM)


class TestNonexistenceBound:
    def test_closed_form_without_singular_weight(self, model_params, eigen):
        # δ → 0: max (λ₁s − s²) = λ₁²/4
        params = model_params.model_copy(update={"delta": 0.0})
        bound = nonexistence_bound(params, eigen)
        assert bound == pytest.approx(eigen.lambda1**2 / 4.0, rel=1e-8)

    def test_weight_raises_bound(self, model_params, eigen):
        assert nonexistence_bound(model_params, eigen) > eigen.lambda1**2 / 4.0

    def test_uses_given_eigenvalue(self, model_params, grid3):
        fake = EigenPair(lambda1=1.0, phi1=grid3.field(0.0), p=2.0)
        params = model_params.model_copy(update={"delta": 0.0})
        assert nonexistence_bound(params, fake) == pytest.approx(0.25, rel=1e-8)


class TestTagging:
    def test_two_roots_are_lower_and_upper(self):
        assert _tag_roots([0.1, 10.0], []) == ["lower", "upper"]

    def test_single_root_follows_nearest_previous(self):
        previous = [
            DiagramPoint(lambda_=0.1, M=0.2, sup_norm=0.2, branch="lower"),
            DiagramPoint(lambda_=0.1, M=15.0, sup_norm=15.0, branch="upper"),
        ]
        assert _tag_roots([14.0], previous) == ["upper"]
        assert _tag_roots([0.25], previous) == ["lower"]

    def test_single_root_without_history_is_lower(self):
        assert _tag_roots([3.0], []) == ["lower"]


class TestDiagram:
    def test_summary_flags_open_right(self):
        diagram = BifurcationDiagram(
            points=[DiagramPoint(lambda_=0.1, M=1.0, sup_norm=1.0, branch="lower")],
            fold_lambda=None,
            picone_bound=5.0,
        )
        summary = diagram.summary()
        assert summary["open_right"] is True
        assert summary["max_sup_norm"] == 1.0
        assert summary["points"] == 1

    def test_empty_diagram_is_not_open(self):
        diagram = BifurcationDiagram(points=[], fold_lambda=None, picone_bound=5.0)
        assert not diagram.open_right
        assert diagram.max_sup_norm == 0.0


class TestSweep:
    def test_rejects_unsorted_grid(self, model_params, eigen):
        with pytest.raises(ValueError):
            sweep_lambda(model_params, [0.2, 0.1], 50, eigen, delta0=LANE_EMDEN_NORM)

    def test_empty_grid(self, model_params, eigen):
        diagram = sweep_lambda(model_params, [], 50, eigen, delta0=LANE_EMDEN_NORM)
        assert diagram.points == []
        assert diagram.picone_bound > 0

    @pytest.mark.slow
    def test_two_branches_below_fold(self, model_params, eigen):
        params = model_params.with_n(10)
        diagram = sweep_lambda(params, [1e-3, 3e-3], 150, eigen, delta0=LANE_EMDEN_NORM)
        assert [c for _, c in diagram.root_counts] == [2, 2]
        assert {pt.branch for pt in diagram.points} == {"lower", "upper"}
        for tag_low, tag_up in zip(diagram.branch("lower"), diagram.branch("upper")):
            assert tag_low.M < tag_up.M
        assert diagram.fold_lambda is None
        assert diagram.open_right
