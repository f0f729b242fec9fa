"""
Точка входа toolkit: командная строка.

Запуск:
    python -m app.main verify --config run.json --out out/verify
    python -m app.main branch --config run.json --workers 4

Команда берётся из документа конфигурации или из позиционного аргумента.
Коды выхода: 0 — успех, 1 — проверка не пройдена, 2 — ошибка
конфигурации, 3 — сбой решателя (рядом с частичными артефактами
пишется маркер FAILED).
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np

from app.artifacts import write_diagram_csv, write_failed_marker, write_json, write_ladder, write_report
from app.branch import ground_state, nonexistence_bound, sweep_lambda
from app.calibration import get_delta0, get_T
from app.core import derived_exponents, validate_params
from app.eigen import first_eigenpair
from app.exceptions import (
    ConfigInvalid,
    NegativeLambda,
    NonPositiveDelta,
    OutOfExponentSet,
    SingularPlapError,
    SolverFailure,
)
from app.grid import Field, RadialGrid, build_grid
from app.log import configure_logging, get_logger
from app.plot import emit_plot
from app.schemas import RunConfig
from app.solve import max_certified_c, regularization_ladder, solve_full, solve_pure_singular, sub_solution
from app.verify import check_interior_floor, check_monotone_ladder, run_suite
from settings import settings

log = get_logger(__name__)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG_INVALID = 2
EXIT_SOLVER_FAILURE = 3

# Нижний край геометрической сетки λ относительно верхнего
LAMBDA_GRID_SPAN = 1e-4

_INEQUALITY_KEYS = {"N >= 2": "N", "1 < p": "p", "p < N": "p", "p - 1 < q": "q"}


# ==============================================================================
# Проверка параметров
# ==============================================================================

def _validate(config: RunConfig) -> None:
    """Параметры задачи до запуска решателей; ошибки — как ConfigInvalid."""
    try:
        validate_params(config.params())
    except OutOfExponentSet as exc:
        key = _INEQUALITY_KEYS.get(exc.inequality, "q")
        raise ConfigInvalid(exc.message, key=key, inequality=exc.inequality) from exc
    except NonPositiveDelta as exc:
        raise ConfigInvalid(exc.message, key="delta") from exc
    except NegativeLambda as exc:
        raise ConfigInvalid(exc.message, key="lambda") from exc


# ==============================================================================
# Команды
# ==============================================================================

def _ground_state(config: RunConfig, grid: RadialGrid) -> Field:
    params = config.params()
    return ground_state(params, grid, get_delta0(params))


def _seed(config: RunConfig, grid: RadialGrid) -> Field:
    params = config.params()
    if params.lambda_ == 0 and config.seed_kind != "eigen":
        # Без сингулярного члена чисто сингулярного решения нет
        base = _ground_state(config, grid)
    elif config.seed_kind == "pure":
        base = solve_pure_singular(params, grid, config.tol).u
    elif config.seed_kind == "sub":
        eigen = first_eigenpair(grid, params.p)
        base = sub_solution(params, eigen, max_certified_c(params, eigen))
    else:
        base = first_eigenpair(grid, params.p).phi1
    return base.with_values(config.seed_scale * base.values)


def _run_solve(config: RunConfig, grid: RadialGrid) -> int:
    params = config.params()
    out = config.output_dir
    if not params.q_term:
        result = solve_pure_singular(params, grid, config.tol)
        extra: dict[str, Any] = {}
    else:
        deflated: list[Field] = []
        extra = {}
        if config.deflate_minimal:
            if params.lambda_ == 0:
                start = _ground_state(config, grid)
            else:
                start = solve_pure_singular(params, grid, config.tol).u
            minimal = solve_full(params, start, tol=config.tol)
            minimal.u.to_csv(out / "minimal.csv")
            deflated.append(minimal.u)
            extra["minimal"] = minimal.to_record(out / "minimal.csv")
        result = solve_full(params, _seed(config, grid), deflated, config.tol)

    result.u.to_csv(out / "solution.csv")
    write_json(
        out / "solve.json",
        {"result": result.to_record(out / "solution.csv"), "grid": grid.descriptor(), **extra},
        config,
    )
    return EXIT_OK


def _run_ladder(config: RunConfig, grid: RadialGrid) -> int:
    out = config.output_dir
    ladder = regularization_ladder(config.params(), grid, config.n_list, config.tol)
    files = write_ladder(ladder, out)
    checks = [check_monotone_ladder(ladder), check_interior_floor(ladder)]
    write_json(
        out / "ladder.json",
        {
            "files": files,
            "n_list": [n for n, _ in ladder.entries],
            "sup_norms": [u.sup_norm for _, u in ladder.entries],
            "monotone_violation": ladder.monotone_violation,
            "checks": [c.model_dump(mode="json") for c in checks],
            "grid": grid.descriptor(),
        },
        config,
    )
    return EXIT_OK


def lambda_grid(upper: float, count: int) -> list[float]:
    """Геометрическая сетка из count точек на [10⁻⁴·upper, upper]."""
    if count == 0:
        return []
    if count == 1:
        return [upper]
    return [float(x) for x in np.geomspace(LAMBDA_GRID_SPAN * upper, upper, count)]


def _run_branch(config: RunConfig, grid: RadialGrid) -> int:
    params = config.params()
    out = config.output_dir
    eigen = first_eigenpair(grid, params.p)
    delta0 = get_delta0(params)
    upper = config.lambda_max if config.lambda_max is not None else nonexistence_bound(params, eigen)
    diagram = sweep_lambda(
        params,
        lambda_grid(upper, config.lambda_count),
        config.scan_samples,
        eigen,
        delta0=delta0,
        workers=config.workers,
        ode_rtol=config.ode_rtol,
    )
    write_diagram_csv(diagram, out / "diagram.csv")
    write_json(
        out / "summary.json",
        {
            **diagram.summary(),
            "delta0": delta0,
            "lambda1": eigen.lambda1,
            "root_counts": [[lam, c] for lam, c in diagram.root_counts],
        },
        config,
    )
    emit_plot(diagram, out / "diagram.svg")
    return EXIT_OK


def _run_verify(config: RunConfig, grid: RadialGrid) -> int:
    report = run_suite(config)
    write_report(report, config.output_dir, config)
    sys.stdout.write(report.to_table())
    return EXIT_VERIFY_FAILED if report.failed else EXIT_OK


def _run_calibrate(config: RunConfig, grid: RadialGrid) -> int:
    params = config.params()
    T = get_T(params, grid)
    delta0 = get_delta0(params)
    write_json(
        config.output_dir / "calibration.json",
        {
            "T": T,
            "delta0": delta0,
            "exponents": derived_exponents(params).model_dump(),
            "cache_dir": str(settings.cache.dir),
        },
        config,
    )
    return EXIT_OK


COMMANDS: dict[str, Callable[[RunConfig, RadialGrid], int]] = {
    "solve": _run_solve,
    "ladder": _run_ladder,
    "branch": _run_branch,
    "verify": _run_verify,
    "calibrate": _run_calibrate,
}


def run(config: RunConfig) -> int:
    """
    Выполнить команду запуска и записать артефакты в output_dir.

    Returns:
        int: Код выхода.

    Raises:
        ConfigInvalid: Параметры вне допустимого множества (с именем ключа).
    """
    _validate(config)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    log.info("command.start", command=config.command, output_dir=str(config.output_dir))
    try:
        grid = build_grid(config.m, config.grading, config.N)
        status = COMMANDS[config.command](config, grid)
    except (SingularPlapError, ValueError) as exc:
        failure = exc if isinstance(exc, SingularPlapError) else SolverFailure(str(exc), cause=type(exc).__name__)
        write_failed_marker(config.output_dir, failure, config)
        log.error("command.failed", command=config.command, **failure.to_record())
        return EXIT_SOLVER_FAILURE
    log.info("command.done", command=config.command, status=status)
    return status


# ==============================================================================
# Разбор аргументов
# ==============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="singular-plap",
        description="Радиальные решения −Δₚu = λu^(−δ) + u^q в единичном шаре",
    )
    parser.add_argument("command", nargs="?", choices=sorted(COMMANDS), help="Команда (иначе из конфига)")
    parser.add_argument("--config", type=Path, help="JSON-документ конфигурации")
    parser.add_argument("--out", type=Path, help="Каталог артефактов")
    parser.add_argument("--workers", type=int, help="Размер пула для branch")
    parser.add_argument("--tol", type=float, help="Допуск невязки")
    parser.add_argument("--m", type=int, help="Число ячеек сетки")
    parser.add_argument("--grading", type=float, help="Показатель сгущения сетки")
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    """
    Документ конфигурации с переопределениями из флагов.

    Raises:
        ConfigInvalid: Файл не читается, не JSON или не проходит валидацию.
    """
    document: dict[str, Any] = {}
    if args.config is not None:
        try:
            document = json.loads(args.config.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigInvalid(f"не удалось прочитать {args.config}: {exc}", key="--config") from exc
        if not isinstance(document, dict):
            raise ConfigInvalid("конфигурация должна быть JSON-объектом", key="<document>")
    if args.command is not None:
        document["command"] = args.command
    return RunConfig.from_document(document).with_overrides(
        output_dir=args.out, workers=args.workers, tol=args.tol, m=args.m, grading=args.grading
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    configure_logging(settings.log.level, settings.log.json_output)
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args)
        return run(config)
    except ConfigInvalid as exc:
        log.error("config.invalid", **exc.to_record())
        sys.stderr.write(f"ошибка конфигурации ({exc.key}): {exc.message}\n")
        return EXIT_CONFIG_INVALID


if __name__ == "__main__":
    sys.exit(main())
