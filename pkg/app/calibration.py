"""
Калибровка констант T и δ₀ с кэшем в SQLite.

    T  — ‖v‖∞ решения предельной чисто сингулярной задачи при λ = 1,
         так что ‖v_λ‖∞ = T λ^{1/(δ+p−1)}; зависит от (N, p, δ) и сетки.
    δ₀ — наименьшая sup-норма радиального решения −Δₚu = u^q; зависит от (N, p, q).

Кэш пишется один раз и дальше только читается.
"""

from pathlib import Path
from typing import Callable, Optional

from sqlalchemy.exc import IntegrityError

from app.branch import ground_state_norm
from app.database import session_scope
from app.grid import Field, RadialGrid
from app.log import get_logger
from app.models import CalibrationRecord
from app.schemas import LIMIT, ProblemParams
from app.solve import solve_pure_singular, super_solution

log = get_logger(__name__)


def measure_T(params: ProblemParams, grid: RadialGrid, tol: Optional[float] = None) -> float:
    """Решить предельную задачу при λ = 1 и вернуть sup-норму."""
    unit = params.model_copy(update={"lambda_": 1.0, "reg_index": LIMIT, "q_term": False})
    return solve_pure_singular(unit, grid, tol).u.sup_norm


def measure_delta0(params: ProblemParams, ode_rtol: Optional[float] = None) -> float:
    """δ₀ стрельбой при λ = 0."""
    return ground_state_norm(params.with_lambda(0.0), ode_rtol)


def _get_or_measure(
    key: dict[str, float],
    measure: Callable[[], float],
    cache_dir: Optional[Path],
    refresh: bool,
) -> float:
    if not refresh:
        with session_scope(cache_dir) as db:
            row = db.query(CalibrationRecord).filter_by(**key).one_or_none()
            if row is not None:
                log.debug("calibration.hit", **key, value=row.value)
                return float(row.value)

    value = measure()
    try:
        with session_scope(cache_dir) as db:
            existing = db.query(CalibrationRecord).filter_by(**key).one_or_none()
            if existing is None:
                db.add(CalibrationRecord(**key, value=value))
            else:
                existing.value = value
    except IntegrityError:
        # Другой процесс успел записать то же значение
        log.debug("calibration.race", **key)
    log.info("calibration.stored", **key, value=value)
    return value


def get_T(
    params: ProblemParams,
    grid: RadialGrid,
    cache_dir: Optional[Path] = None,
    refresh: bool = False,
) -> float:
    """T для (N, p, δ) на данной сетке: из кэша или измерением."""
    key = {
        "kind": "T", "dim_N": params.dim_N, "p": params.p, "q": 0.0,
        "delta": params.delta, "m": grid.m, "grading": grid.grading,
    }
    return _get_or_measure(key, lambda: measure_T(params, grid), cache_dir, refresh)


def get_delta0(
    params: ProblemParams,
    cache_dir: Optional[Path] = None,
    refresh: bool = False,
) -> float:
    """δ₀ для (N, p, q): из кэша или стрельбой."""
    key = {
        "kind": "delta0", "dim_N": params.dim_N, "p": params.p, "q": params.q,
        "delta": 0.0, "m": 0, "grading": 0.0,
    }
    return _get_or_measure(key, lambda: measure_delta0(params), cache_dir, refresh)


def cached_super_solution(
    params: ProblemParams,
    grid: RadialGrid,
    tol: Optional[float] = None,
    cache_dir: Optional[Path] = None,
) -> Field:
    """
    Верхнее решение с T и δ₀ из кэша калибровки.

    Raises:
        NoSuchMu: λ слишком велико для усиления.
        NotSuperSolution: сертификат не выполнен.
    """
    T = get_T(params, grid, cache_dir)
    delta0 = get_delta0(params, cache_dir)
    return super_solution(params, grid, T, delta0, tol)
