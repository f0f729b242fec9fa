"""
Тесты кэша калибровки T и δ₀ (SQLite через SQLAlchemy).
"""

import pytest

from app import calibration
from app.database import database_path, session_scope
from app.models import CalibrationRecord
from app.solve import solve_pure_singular


@pytest.fixture
def counted(monkeypatch):
    """Подменить измерения счётчиками вызовов."""
    calls = {"T": 0, "delta0": 0}

    def fake_T(params, grid, tol=None):
        calls["T"] += 1
        return 0.5 + 0.1 * params.delta

    def fake_delta0(params, ode_rtol=None):
        calls["delta0"] += 1
        return 18.9

    monkeypatch.setattr(calibration, "measure_T", fake_T)
    monkeypatch.setattr(calibration, "measure_delta0", fake_delta0)
    return calls


class TestCache:
    def test_T_is_measured_once(self, counted, grid3, model_params, isolated_cache):
        first = calibration.get_T(model_params, grid3)
        second = calibration.get_T(model_params, grid3)
        assert first == second == pytest.approx(0.7)
        assert counted["T"] == 1
        assert database_path(isolated_cache).exists()

    def test_key_includes_delta_and_grid(self, counted, grid3, fine_grid3, model_params):
        calibration.get_T(model_params, grid3)
        calibration.get_T(model_params.model_copy(update={"delta": 3.0}), grid3)
        calibration.get_T(model_params, fine_grid3)
        assert counted["T"] == 3

    def test_lambda_and_q_do_not_split_T(self, counted, grid3, model_params):
        calibration.get_T(model_params, grid3)
        calibration.get_T(model_params.model_copy(update={"q": 2.5, "lambda_": 7.0}), grid3)
        assert counted["T"] == 1

    def test_refresh_overwrites(self, counted, grid3, model_params):
        calibration.get_T(model_params, grid3)
        calibration.get_T(model_params, grid3, refresh=True)
        assert counted["T"] == 2
        with session_scope() as db:
            assert db.query(CalibrationRecord).filter_by(kind="T").count() == 1

    def test_delta0_keyed_by_q(self, counted, model_params):
        assert calibration.get_delta0(model_params) == 18.9
        calibration.get_delta0(model_params.with_lambda(3.0))
        calibration.get_delta0(model_params.model_copy(update={"q": 2.5}))
        assert counted["delta0"] == 2

    def test_explicit_cache_dir(self, counted, grid3, model_params, tmp_path):
        other = tmp_path / "other"
        calibration.get_T(model_params, grid3, cache_dir=other)
        calibration.get_T(model_params, grid3)
        assert counted["T"] == 2
        assert database_path(other).exists()


    def test_super_solution_uses_cached_constants(self, counted, grid3, model_params, monkeypatch):
        seen = []

        def fake_super(params, grid, T, delta0, tol=None):
            seen.append((T, delta0))
            return grid.field(0.0)

        monkeypatch.setattr(calibration, "super_solution", fake_super)
        calibration.cached_super_solution(model_params, grid3)
        calibration.cached_super_solution(model_params, grid3)

        assert seen == [(pytest.approx(0.7), 18.9)] * 2
        assert counted == {"T": 1, "delta0": 1}

class TestMeasurements:
    def test_T_is_sup_norm_at_unit_lambda(self, grid3, model_params):
        T = calibration.measure_T(model_params.with_lambda(0.3), grid3)
        unit = solve_pure_singular(model_params.pure().with_lambda(1.0), grid3).u
        assert T == pytest.approx(unit.sup_norm, rel=1e-12)

    def test_delta0_is_ground_state_norm(self, model_params):
        assert calibration.measure_delta0(model_params) == pytest.approx(4.35287**2, rel=1e-4)
