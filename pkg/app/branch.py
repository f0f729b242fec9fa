"""
Перебор радиальных решений стрельбой, развёртка по λ и оценка точки поворота.

Стрельба интегрирует поток w = r^{N−1}Φₚ(u'):
    u' = Φₚ⁻¹(w / r^{N−1}),   w' = −r^{N−1}(λ f_n(u) + u^q),
    u(0) = M,  w(0) = 0,
до r = 1 или до первого нуля u. Калибр (gauge):
    u(1)          если u(1) > 0,
    −(1 − r*)     если u обнулилась в r* < 1.

Использование:
    from app.branch import find_roots, sweep_lambda

    roots = find_roots(params, 1e-3, 1e3, resolution=400)
    diagram = sweep_lambda(params, lambda_grid, resolution=400, workers=4)
"""

from dataclasses import dataclass, field
from enum import Enum
from multiprocessing import Pool
from typing import Any, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq, minimize_scalar

from app.eigen import EigenPair
from app.exceptions import StepUnderflow
from app.grid import Field, RadialGrid
from app.log import get_logger
from app.plap import POSITIVITY_FLOOR
from app.schemas import ProblemParams
from app.solve import aitken, small_branch_threshold
from settings import settings

log = get_logger(__name__)

# Лестница n для калибра предельной задачи
LIMIT_SHOT_LADDER = (10**2, 10**3, 10**4)

# Относительная точность корней и точки поворота
ROOT_RTOL = 1e-10
FOLD_RTOL = 1e-4

ODE_METHOD = "DOP853"


class ShotKind(str, Enum):
    POSITIVE_AT_ONE = "PositiveAtOne"
    CROSSED_BEFORE = "CrossedBefore"
    BLOWUP = "Blowup"


@dataclass(frozen=True, eq=False)
class ShotOutcome:
    """
    Итог одного выстрела из центра u(0) = M.

    Attributes:
        M: Значение в центре.
        kind: PositiveAtOne / CrossedBefore / Blowup.
        gauge: u(1) или −(1 − r*); непрерывен при смене вида.
        r_end: Радиус, на котором остановилось интегрирование.
    """

    M: float
    kind: ShotKind
    gauge: float
    r_end: float
    dense: Any = field(default=None, repr=False)
    r_start: float = 0.0
    series: tuple[float, float] = (0.0, 1.0)


# ==============================================================================
# Стрельба
# ==============================================================================

def _source_scalar(u: float, params: ProblemParams) -> float:
    out = 0.0
    if params.lambda_ > 0:
        out += params.lambda_ * max(u + params.shift, POSITIVITY_FLOOR) ** (-params.delta)
    if params.q_term:
        out += max(u, 0.0) ** params.q
    return out


def _shoot_finite(
    params: ProblemParams,
    M: float,
    rtol: float,
    atol: float,
    dense: bool,
) -> ShotOutcome:
    N, p = params.dim_N, params.p
    s0 = _source_scalar(M, params)

    # Старт по ряду u ≈ M − c r^{p/(p−1)}, w ≈ −s0 r^N / N
    length = (M ** (p - 1.0) / s0) ** (1.0 / p) if s0 > 0 else 1.0
    r0 = 1e-6 * min(1.0, length)
    c_M = (p - 1.0) / p * (s0 / N) ** (1.0 / (p - 1.0))
    u0 = M - c_M * r0 ** (p / (p - 1.0))
    w0 = -s0 * r0**N / N

    def rhs(r: float, y: np.ndarray) -> list[float]:
        u, w = y
        q = w / r ** (N - 1)
        du = np.sign(q) * abs(q) ** (1.0 / (p - 1.0))
        return [du, -(r ** (N - 1)) * _source_scalar(u, params)]

    def hit_zero(r: float, y: np.ndarray) -> float:
        return y[0]

    hit_zero.terminal = True  # type: ignore[attr-defined]
    hit_zero.direction = -1  # type: ignore[attr-defined]

    sol = solve_ivp(
        rhs, (r0, 1.0), [u0, w0],
        method=ODE_METHOD, rtol=rtol, atol=atol * max(M, 1e-300),
        events=hit_zero, dense_output=dense,
    )
    if sol.status == -1:
        raise StepUnderflow(
            f"интегратор остановился: {sol.message}",
            last_r=float(sol.t[-1]),
            last_u=float(sol.y[0, -1]),
            M=M,
        )

    extra = {"dense": sol.sol if dense else None, "r_start": r0, "series": (c_M, p / (p - 1.0))}
    if not np.all(np.isfinite(sol.y[:, -1])):
        return ShotOutcome(M=M, kind=ShotKind.BLOWUP, gauge=-1.0, r_end=float(sol.t[-1]), **extra)
    if sol.status == 1 and sol.t_events[0].size:
        r_star = float(sol.t_events[0][0])
        return ShotOutcome(
            M=M, kind=ShotKind.CROSSED_BEFORE, gauge=-(1.0 - r_star), r_end=r_star, **extra
        )
    return ShotOutcome(
        M=M, kind=ShotKind.POSITIVE_AT_ONE, gauge=float(sol.y[0, -1]), r_end=1.0, **extra
    )


def shoot(
    params: ProblemParams,
    M: float,
    ode_rtol: Optional[float] = None,
    ode_atol: Optional[float] = None,
    dense: bool = False,
) -> ShotOutcome:
    """
    Выстрел из центра со значением M.

    Для LIMIT калибр экстраполируется по Эйткену с n = 10², 10³, 10⁴
    (при λ = 0 сингулярный член отсутствует и экстраполяция не нужна).

    Raises:
        StepUnderflow: интегратор не смог продвинуться.
    """
    if M <= 0:
        raise ValueError(f"M должно быть > 0, получено {M}")
    rtol = ode_rtol if ode_rtol is not None else settings.solver.ode_rtol
    atol = ode_atol if ode_atol is not None else settings.solver.ode_atol

    if not params.is_limit or params.lambda_ == 0:
        finite = params if not params.is_limit else params.with_n(LIMIT_SHOT_LADDER[-1])
        return _shoot_finite(finite, M, rtol, atol, dense)

    shots = [_shoot_finite(params.with_n(n), M, rtol, atol, dense) for n in LIMIT_SHOT_LADDER]
    if any(s.kind is ShotKind.BLOWUP for s in shots):
        return shots[-1]
    gauges = [np.array([s.gauge]) for s in shots]
    gauge = float(aitken(*gauges)[0])
    last = shots[-1]
    kind = ShotKind.POSITIVE_AT_ONE if gauge > 0 else ShotKind.CROSSED_BEFORE
    r_end = 1.0 if gauge > 0 else 1.0 + gauge
    return ShotOutcome(
        M=M, kind=kind, gauge=gauge, r_end=r_end,
        dense=last.dense, r_start=last.r_start, series=last.series,
    )


def reconstruct(params: ProblemParams, M: float, grid: RadialGrid) -> Field:
    """
    Поле на сетке по выстрелу из M (корню калибра).

    Для LIMIT используется траектория n = 10⁴; за точкой обнуления
    и в граничном узле записывается ноль.
    """
    shot = shoot(params, M, dense=True)
    r = grid.nodes
    values = np.zeros_like(r)
    c_M, power = shot.series
    near = r < shot.r_start
    values[near] = M - c_M * r[near] ** power
    inside = (~near) & (r <= shot.r_end)
    values[inside] = shot.dense(r[inside])[0]
    values = np.maximum(values, 0.0)
    values[-1] = 0.0
    return grid.field(values)


def scan_gauge(params: ProblemParams, Ms: np.ndarray, ode_rtol: Optional[float] = None) -> np.ndarray:
    """Калибр на сетке значений M."""
    return np.array([shoot(params, float(M), ode_rtol).gauge for M in Ms])


def find_roots(
    params: ProblemParams,
    M_lo: float,
    M_hi: float,
    resolution: int,
    ode_rtol: Optional[float] = None,
) -> list[float]:
    """
    Корни калибра на [M_lo, M_hi]: скан по геометрической сетке
    и метод Брента на каждой смене знака (до 10⁻¹⁰ относительно).

    Пустой список — допустимый итог (решений при этом λ нет).
    """
    if not M_lo < M_hi:
        raise ValueError(f"нужно M_lo < M_hi, получено {M_lo}, {M_hi}")
    Ms = np.geomspace(M_lo, M_hi, resolution)
    gauges = scan_gauge(params, Ms, ode_rtol)

    roots: list[float] = []
    for i in range(len(Ms) - 1):
        g0, g1 = gauges[i], gauges[i + 1]
        if g0 == 0.0:
            roots.append(float(Ms[i]))
        elif g0 * g1 < 0:
            root = brentq(
                lambda M: shoot(params, M, ode_rtol).gauge,
                Ms[i], Ms[i + 1], rtol=ROOT_RTOL, xtol=1e-300,
            )
            roots.append(float(root))
    if gauges[-1] == 0.0:
        roots.append(float(Ms[-1]))
    log.debug("roots.found", lambda_=params.lambda_, count=len(roots))
    return roots


# ==============================================================================
# Границы
# ==============================================================================

def ground_state_norm(params: ProblemParams, ode_rtol: Optional[float] = None, resolution: int = 400) -> float:
    """
    δ₀ — наименьший корень калибра задачи −Δₚu = u^q (λ = 0).

    Raises:
        ValueError: если корней на [10⁻³, 10⁶] нет.
    """
    roots = find_roots(params.with_lambda(0.0), 1e-3, 1e6, resolution, ode_rtol)
    if not roots:
        raise ValueError("при λ = 0 корней калибра не найдено")
    return roots[0]


def ground_state(params: ProblemParams, grid: RadialGrid, M: Optional[float] = None) -> Field:
    """
    Решение −Δₚu = u^q (λ = 0) на сетке по выстрелу из δ₀.

    Внутренние узлы поднимаются до POSITIVITY_FLOOR, граничный остаётся нулём.
    """
    zero = params.with_lambda(0.0)
    M = M if M is not None else ground_state_norm(zero)
    u = reconstruct(zero, M, grid)
    values = u.values.copy()
    values[:-1] = np.maximum(values[:-1], POSITIVITY_FLOOR)
    return u.with_values(values)


def nonexistence_bound(params: ProblemParams, eigen: EigenPair) -> float:
    """
    Λ̄ = max_{s>0} (λ₁s^{p−1} − s^q)(s+1)^δ.

    Функция положительна на (0, s_max), s_max = λ₁^{1/(q−p+1)},
    и имеет единственный внутренний максимум.
    """
    p, q, delta, lam1 = params.p, params.q, params.delta, eigen.lambda1

    def g(s: float) -> float:
        return (lam1 * s ** (p - 1.0) - s**q) * (s + 1.0) ** delta

    s_max = lam1 ** (1.0 / (q - p + 1.0))
    opt = minimize_scalar(lambda s: -g(s), bounds=(0.0, s_max), method="bounded",
                          options={"xatol": 1e-12 * s_max})
    return float(g(float(opt.x)))


# ==============================================================================
# Развёртка по λ
# ==============================================================================

@dataclass(frozen=True)
class DiagramPoint:
    lambda_: float
    M: float
    sup_norm: float
    branch: str


@dataclass(frozen=True, eq=False)
class BifurcationDiagram:
    """
    Бифуркационная диаграмма.

    Attributes:
        points: Точки (λ, M, sup-норма, ветвь) по возрастанию λ и M.
        fold_lambda: Оценка точки поворота Λ; None, если не найдена.
        picone_bound: Граница несуществования Λ̄.
        root_counts: Число корней на каждом λ сетки.
    """

    points: list[DiagramPoint]
    fold_lambda: Optional[float]
    picone_bound: float
    root_counts: list[tuple[float, int]] = field(default_factory=list)

    @property
    def open_right(self) -> bool:
        """Точка поворота не найдена в пределах сетки."""
        return self.fold_lambda is None and bool(self.points)

    @property
    def max_sup_norm(self) -> float:
        return max((pt.sup_norm for pt in self.points), default=0.0)

    def branch(self, tag: str) -> list[DiagramPoint]:
        return [pt for pt in self.points if pt.branch == tag]

    def summary(self) -> dict[str, Any]:
        return {
            "fold_lambda": self.fold_lambda,
            "picone_bound": self.picone_bound,
            "open_right": self.open_right,
            "max_sup_norm": self.max_sup_norm,
            "points": len(self.points),
        }


def scan_range(params: ProblemParams, delta0: float) -> tuple[float, float]:
    """[10⁻³·μ, 10³·δ₀], μ — порог малой ветви при данном λ."""
    mu = small_branch_threshold(params) if params.lambda_ > 0 else delta0
    return 1e-3 * min(mu, delta0), 1e3 * delta0


def _roots_task(task: tuple[dict[str, Any], float, float, int, Optional[float]]) -> list[float]:
    record, lam, delta0, resolution, ode_rtol = task
    params = ProblemParams.from_record(record).with_lambda(lam)
    M_lo, M_hi = scan_range(params, delta0)
    return find_roots(params, M_lo, M_hi, resolution, ode_rtol)


def _tag_roots(roots: list[float], previous: list[DiagramPoint]) -> list[str]:
    """Ветви по непрерывности с предыдущим λ (ближайший корень в log M)."""
    def nearest(M: float) -> Optional[str]:
        if not previous:
            return None
        best = min(previous, key=lambda pt: abs(np.log(pt.M) - np.log(M)))
        return best.branch

    if len(roots) == 1:
        return [nearest(roots[0]) or "lower"]
    tags = []
    for i, M in enumerate(roots):
        if i == 0:
            tags.append("lower")
        elif i == len(roots) - 1:
            tags.append("upper")
        else:
            tags.append(nearest(M) or "upper")
    return tags


def sweep_lambda(
    params: ProblemParams,
    lambda_grid: Sequence[float],
    resolution: int,
    eigen: EigenPair,
    delta0: Optional[float] = None,
    workers: int = 1,
    ode_rtol: Optional[float] = None,
) -> BifurcationDiagram:
    """
    find_roots на каждом λ, теги ветвей и оценка точки поворота.

    Точка поворота уточняется бисекцией по предикату «корней ≥ 2» между
    последним λ с двумя корнями и первым λ без корней (до 10⁻⁴ относительно).
    Если ни одна точка сетки не даёт двух корней, бисекция идёт на (0, λ_first].

    Args:
        params: Параметры (λ игнорируется).
        lambda_grid: Возрастающая сетка λ > 0.
        resolution: Точек скана по M.
        eigen: Первая собственная пара (для Λ̄).
        delta0: δ₀; по умолчанию измеряется стрельбой.
        workers: Размер пула процессов.
    """
    grid = list(lambda_grid)
    if any(lam <= 0 for lam in grid) or grid != sorted(grid):
        raise ValueError("сетка λ должна быть возрастающей и положительной")
    bound = nonexistence_bound(params, eigen)
    if not grid:
        return BifurcationDiagram(points=[], fold_lambda=None, picone_bound=bound)

    d0 = delta0 if delta0 is not None else ground_state_norm(params, ode_rtol)
    record = params.to_record()
    tasks = [(record, lam, d0, resolution, ode_rtol) for lam in grid]
    if workers > 1:
        with Pool(processes=workers) as pool:
            all_roots = pool.map(_roots_task, tasks)
    else:
        all_roots = [_roots_task(task) for task in tasks]

    points: list[DiagramPoint] = []
    previous: list[DiagramPoint] = []
    for lam, roots in zip(grid, all_roots):
        current = [
            DiagramPoint(lambda_=lam, M=M, sup_norm=M, branch=tag)
            for M, tag in zip(roots, _tag_roots(roots, previous))
        ]
        points.extend(current)
        previous = current or previous

    counts = [(lam, len(roots)) for lam, roots in zip(grid, all_roots)]
    fold = _estimate_fold(params, counts, d0, resolution, ode_rtol)
    log.info("sweep.done", points=len(points), fold_lambda=fold, picone_bound=bound)
    return BifurcationDiagram(points=points, fold_lambda=fold, picone_bound=bound, root_counts=counts)


def _estimate_fold(
    params: ProblemParams,
    counts: list[tuple[float, int]],
    delta0: float,
    resolution: int,
    ode_rtol: Optional[float],
) -> Optional[float]:
    two = [lam for lam, c in counts if c >= 2]
    if two:
        lo = two[-1]
        after = [lam for lam, c in counts if lam > lo and c == 0]
        if not after:
            return None
        hi = after[0]
    else:
        zero = [lam for lam, c in counts if c == 0]
        if not zero:
            return None
        lo, hi = 0.0, zero[0]

    record = params.to_record()
    while hi - lo > FOLD_RTOL * hi:
        mid = 0.5 * (lo + hi)
        if len(_roots_task((record, mid, delta0, resolution, ode_rtol))) >= 2:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
