"""
Решатели: обращение p-Лапласиана, чисто сингулярная задача,
лестница регуляризаций, нижнее/верхнее решения и Ньютон с дефляцией.

Основные операции:
    invert_plap            — минимизатор (1/p)∫|∇w|^p − ∫ rhs·w
    solve_pure_singular    — −Δₚu = λ f_n(u)
    regularization_ladder  — u_n для возрастающих n
    sub_solution           — (cφ₁)^b и его сдвинутый вариант
    super_solution         — w_{n,λ*} по функции A(s)
    solve_full             — −Δₚu = λ f_n(u) + u^q
    small_branch_threshold — порог единственности малого решения
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Any, Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq, minimize, minimize_scalar

from app.core import derived_exponents
from app.exceptions import (
    ConvergedToDeflated,
    MeshTooCoarseNearBoundary,
    NegativeLambda,
    NegativeRhs,
    NoConvergence,
    NonpositiveInterior,
    NoSuchMu,
    NotSubSolution,
    NotSuperSolution,
    SingularPlapError,
)
from app.grid import Field, RadialGrid
from app.log import get_logger
from app.plap import (
    POSITIVITY_FLOOR,
    OperatorConfig,
    energy,
    energy_gradient,
    linearize,
    residual,
    residual_scale,
    singular_term,
)
from app.schemas import ProblemParams
from settings import settings

if TYPE_CHECKING:
    from app.eigen import EigenPair

log = get_logger(__name__)

# Продолжение по n перед прямым решением предельной задачи
CONTINUATION_N = (1, 10, 10**2, 10**3, 10**4, 10**5, 10**6)

# Минимальное sup-расстояние до известного решения
DEFLATION_DISTANCE = 1e-4

# Допуск сертификации нижнего/верхнего решения (в масштабе невязки)
CERTIFY_TOL = 1e-8


# ==============================================================================
# Результаты
# ==============================================================================

@dataclass(frozen=True, eq=False)
class SolveResult:
    """
    Решение дискретной задачи.

    Attributes:
        u: Поле решения.
        residual_sup: Масштабированная sup-норма невязки.
        iterations: Число итераций Ньютона.
        bracket: (нижнее, верхнее) — сертифицированная вилка sub ≤ u ≤ super.
        params: Параметры, для которых получено решение.
    """

    u: Field
    residual_sup: float
    iterations: int
    bracket: Optional[tuple[Field, Field]] = None
    params: Optional[ProblemParams] = None

    def to_record(self, csv_path: Path) -> dict[str, Any]:
        return {
            "params": self.params.to_record() if self.params else None,
            "residual_sup": self.residual_sup,
            "iterations": self.iterations,
            "csv": csv_path.name,
            "sup_norm": self.u.sup_norm,
        }


@dataclass(frozen=True, eq=False)
class LadderResult:
    """
    Лестница регуляризаций u_n.

    Attributes:
        entries: Пары (n, u_n) по возрастанию n.
        extrapolated_limit: Экстраполяция Эйткена последних трёх членов.
        monotone_violation: max (u_n − u_{n+1})₊ по узлам и соседним n.
    """

    entries: list[tuple[int, Field]]
    extrapolated_limit: Field
    monotone_violation: float

    @property
    def max_sup_norm(self) -> float:
        return max(u.sup_norm for _, u in self.entries)

    def permuted(self) -> "LadderResult":
        """Та же лестница в обратном порядке полей (негативный контроль)."""
        ns = [n for n, _ in self.entries]
        fields = [u for _, u in self.entries][::-1]
        entries = list(zip(ns, fields))
        return LadderResult(
            entries=entries,
            extrapolated_limit=self.extrapolated_limit,
            monotone_violation=monotone_violation([u for _, u in entries]),
        )


# ==============================================================================
# Обращение p-Лапласиана
# ==============================================================================

def invert_plap(
    rhs: Field,
    p: float,
    tol: Optional[float] = None,
    method: str = "flux",
) -> Field:
    """
    Единственный минимизатор (1/p)∫|∇w|^p − ∫ rhs·w при w(1) = 0.

    Уравнение Эйлера–Лагранжа дискретной энергии в 1-D телескопируется:
    −F_i = Σ_{k≤i} w_k rhs_k. Метод "flux" решает его точно за O(m),
    метод "cg" минимизирует ту же энергию сопряжёнными градиентами.

    Args:
        rhs: Неотрицательная правая часть (значение в r = 1 не используется).
        p: Показатель p-Лапласиана.
        tol: Допуск нормы градиента энергии (только для "cg").
        method: "flux" или "cg".

    Returns:
        Field: w ≥ 0, w(1) = 0.

    Raises:
        NegativeRhs: rhs < 0 во внутреннем узле.
        NoConvergence: "cg" исчерпал лимит итераций.
    """
    interior = rhs.interior
    if np.any(interior < 0):
        node = int(np.flatnonzero(interior < 0)[0])
        raise NegativeRhs(f"rhs < 0 в узле {node}", node=node, value=float(interior[node]))

    grid = rhs.grid
    if method == "flux":
        Q = np.cumsum(grid.quad_weights[:-1] * interior)
        slope = (Q / grid.face_area) ** (1.0 / (p - 1.0))
        values = np.zeros_like(rhs.values)
        values[:-1] = np.cumsum((grid.h * slope)[::-1])[::-1]
        return rhs.with_values(values)

    if method == "cg":
        return _invert_by_cg(rhs.with_values(np.append(interior, 0.0)), p, tol)

    raise ValueError(f"неизвестный метод {method!r}")


def _invert_by_cg(rhs: Field, p: float, tol: Optional[float]) -> Field:
    grid = rhs.grid
    gtol = tol if tol is not None else settings.solver.tol

    def lift(x: np.ndarray) -> Field:
        return grid.field(np.append(x, 0.0))

    result = minimize(
        lambda x: energy(lift(x), rhs, p),
        np.zeros(grid.m),
        jac=lambda x: energy_gradient(lift(x), rhs, p),
        method="CG",
        options={"gtol": gtol, "maxiter": 50 * grid.m},
    )
    # status 2: потеря точности в линейном поиске, минимум достигнут до округления
    if result.status == 1:
        raise NoConvergence(
            "CG исчерпал лимит итераций",
            last_value=float(np.max(np.abs(result.jac))),
            iterations=int(result.nit),
        )
    log.debug("invert.cg", iterations=int(result.nit), status=int(result.status))
    return lift(result.x)


def singular_map(v: Field, params: ProblemParams) -> Field:
    """S(v) = invert_plap(λ f_n(v)) — антитонное отображение чисто сингулярной задачи."""
    rhs = np.zeros_like(v.values)
    rhs[:-1] = singular_term(v.interior, params)
    return invert_plap(v.with_values(rhs), params.p)


# ==============================================================================
# Демпфированный Ньютон
# ==============================================================================

def _weighted_norm_sq(x: np.ndarray, weights: np.ndarray) -> float:
    return float(np.dot(weights, x * x))


def _deflation(u: np.ndarray, known: Sequence[np.ndarray], weights: np.ndarray) -> tuple[float, np.ndarray]:
    """
    Множитель M(u) = Π (1/‖u − u_k‖² + 1) и градиент log M.
    """
    factor = 1.0
    grad_log = np.zeros_like(u)
    for uk in known:
        e = u - uk
        nrm = max(_weighted_norm_sq(e, weights), 1e-300)
        mk = 1.0 / nrm + 1.0
        factor *= mk
        grad_log += (-2.0 * weights * e / nrm**2) / mk
    return factor, grad_log


def _damped_newton(
    u0: Field,
    params: ProblemParams,
    tol: float,
    max_iter: int,
    lower: Optional[Field] = None,
    upper: Optional[Field] = None,
    deflated: Sequence[Field] = (),
    label: str = "newton",
) -> SolveResult:
    """
    Ньютон с линейным поиском на ½Σ w (M·R/s)² (s заморожен на итерации).

    Пробные шаги ограничены правилом «доля до границы» (u > 0 внутри)
    и проецируются в вилку [lower, upper], если она задана.
    """
    grid = u0.grid
    w = grid.quad_weights[:-1]
    cfg = OperatorConfig(p=params.p)
    known = [k.interior for k in deflated]

    lo = lower.interior if lower is not None else None
    hi = upper.interior if upper is not None else None

    def project(x: np.ndarray) -> np.ndarray:
        if lo is not None:
            x = np.maximum(x, lo)
        if hi is not None:
            x = np.minimum(x, hi)
        return x

    def lift(x: np.ndarray) -> Field:
        return grid.field(np.append(x, 0.0))

    def merit(x: np.ndarray, scale: np.ndarray) -> float:
        R = residual(lift(x), params).interior
        factor = _deflation(x, known, w)[0] if known else 1.0
        return 0.5 * factor**2 * float(np.dot(w, (R / scale) ** 2))

    x = project(u0.interior.copy())
    if np.any(x <= 0):
        node = int(np.flatnonzero(x <= 0)[0])
        raise NonpositiveInterior(f"начальное приближение ≤ 0 в узле {node}", node=node)

    res = np.inf
    for iteration in range(max_iter + 1):
        u = lift(x)
        R = residual(u, params).interior
        scale = residual_scale(u, params)
        res = float(np.max(np.abs(R) / scale))
        log.debug(f"{label}.step", iteration=iteration, residual=res)

        if res <= tol:
            x, res = _polish(x, params, lift, project, res)
            return SolveResult(
                u=lift(x),
                residual_sup=res,
                iterations=iteration,
                bracket=(lower, upper) if lower is not None and upper is not None else None,
                params=params,
            )
        if iteration == max_iter:
            break

        d = linearize(u, params, cfg).solve(-w * R)
        if known:
            factor, grad_log = _deflation(x, known, w)
            denom = 1.0 - float(np.dot(grad_log, d))
            if denom > 1e-12:
                d = d / denom

        # Доля до границы: u остаётся положительным во внутренних узлах
        alpha = 1.0
        neg = d < 0
        if np.any(neg):
            alpha = min(1.0, 0.99 * float(np.min(x[neg] / -d[neg])))

        m0 = merit(x, scale)
        while alpha > 1e-12:
            trial = project(np.maximum(x + alpha * d, POSITIVITY_FLOOR))
            if merit(trial, scale) < (1.0 - 1e-4 * alpha) * m0:
                x = trial
                break
            alpha *= 0.5
        else:
            raise NoConvergence(
                f"{label}: линейный поиск не нашёл спуска",
                last_value=res,
                iteration=iteration,
            )

    raise NoConvergence(f"{label}: исчерпан лимит итераций", last_value=res, max_iter=max_iter)


def _polish(
    x: np.ndarray,
    params: ProblemParams,
    lift: Callable[[np.ndarray], Field],
    project: Callable[[np.ndarray], np.ndarray],
    res: float,
) -> tuple[np.ndarray, float]:
    """Один дополнительный полный шаг Ньютона, если он не ухудшает невязку."""
    u = lift(x)
    R = residual(u, params).interior
    d = linearize(u, params, OperatorConfig(p=params.p)).solve(-u.grid.quad_weights[:-1] * R)
    trial = project(x + d)
    if np.any(trial <= 0):
        return x, res
    tu = lift(trial)
    tres = float(np.max(np.abs(residual(tu, params).interior) / residual_scale(tu, params)))
    return (trial, tres) if tres <= res else (x, res)


# ==============================================================================
# Чисто сингулярная задача
# ==============================================================================

def solve_pure_singular(
    params: ProblemParams,
    grid: RadialGrid,
    tol: Optional[float] = None,
    seed: Optional[Field] = None,
) -> SolveResult:
    """
    Решить −Δₚu = λ f_n(u), u = 0 на границе.

    Конечное n: вилка U = invert_plap(λ n^δ) сверху и S(U) снизу,
    сжатая несколькими шагами S, затем Ньютон внутри вилки.

    LIMIT: продолжение по n = 1, 10, …, 10⁶, затем Ньютон на u^{−δ}
    внутри вилки [u_{n}, S(u_{n})].

    Источник u^q отключается (используется params.pure()).

    Raises:
        NegativeLambda: λ ≤ 0.
        NoConvergence: Ньютон не сошёлся.
        MeshTooCoarseNearBoundary: LIMIT, δ > 1, узел у границы в 10 раз
            выше граничной асимптотики C(1−r)^b.
    """
    params = params.pure()
    if params.lambda_ <= 0:
        raise NegativeLambda("чисто сингулярная задача требует λ > 0", lambda_=params.lambda_)
    tol = tol if tol is not None else settings.solver.tol
    max_iter = settings.solver.max_iter

    if not params.is_limit:
        upper = invert_plap(grid.field(params.lambda_ * params.reg_index**params.delta), params.p)
        lower = singular_map(upper, params)
        for _ in range(3):
            lower, upper = singular_map(upper, params), singular_map(lower, params)
        start = seed if seed is not None else lower
        return _damped_newton(
            start, params, tol, max_iter, lower=lower, upper=upper, label="pure"
        )

    previous: Optional[Field] = None
    for n in CONTINUATION_N:
        previous = solve_pure_singular(params.with_n(n), grid, tol, seed=previous).u

    lower = previous
    upper = singular_map(lower, params)
    start = seed if seed is not None else lower
    result = _damped_newton(
        start, params, tol, max_iter, lower=lower, upper=upper, label="pure.limit"
    )
    _check_boundary_layer(result.u, params)
    return result


def _check_boundary_layer(u: Field, params: ProblemParams) -> None:
    """Сравнить u_{m−1} с асимптотикой C(1−r)^b при δ > 1."""
    if params.delta <= 1:
        return
    p, delta = params.p, params.delta
    b = derived_exponents(params).boundary_exp
    C = (params.lambda_ / ((p - 1) * (1 - b) * b ** (p - 1))) ** (1.0 / (delta + p - 1))
    d = 1.0 - u.grid.nodes[-2]
    predicted = C * d**b
    if u.values[-2] > 10.0 * predicted:
        raise MeshTooCoarseNearBoundary(
            "сетка слишком грубая у границы",
            node_value=float(u.values[-2]),
            predicted=float(predicted),
            m=u.grid.m,
            grading=u.grid.grading,
        )


# ==============================================================================
# Лестница регуляризаций
# ==============================================================================

def aitken(x0: np.ndarray, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    """
    Δ²-экстраполяция Эйткена по узлам.

    Где знаменатель вырожден или поправка выводит за x2 против
    направления сходимости, возвращается x2.
    """
    denom = x2 - 2.0 * x1 + x0
    step = x2 - x1
    with np.errstate(divide="ignore", invalid="ignore"):
        limit = x2 - step**2 / denom
    ok = np.isfinite(limit) & (np.abs(denom) > 1e-300) & ((limit - x2) * step >= 0)
    return np.where(ok, limit, x2)


def monotone_violation(fields: Sequence[Field]) -> float:
    """max по узлам и соседним членам (u_k − u_{k+1})₊."""
    worst = 0.0
    for a, b in zip(fields, fields[1:]):
        worst = max(worst, float(np.max(a.values - b.values)))
    return max(worst, 0.0)


def _power_ladder(
    params: ProblemParams,
    grid: RadialGrid,
    n_list: Sequence[int],
    tol: Optional[float],
) -> LadderResult:
    # app.branch импортирует этот модуль
    from app.branch import ground_state

    try:
        u = solve_full(params.with_n(n_list[0]), ground_state(params, grid), tol=tol).u
    except SingularPlapError as exc:
        exc.details["n"] = n_list[0]
        raise
    log.debug("ladder.power", sup_norm=u.sup_norm, count=len(n_list))
    return LadderResult(
        entries=[(n, u) for n in n_list],
        extrapolated_limit=u,
        monotone_violation=0.0,
    )


def regularization_ladder(
    params: ProblemParams,
    grid: RadialGrid,
    n_list: Sequence[int],
    tol: Optional[float] = None,
) -> LadderResult:
    """
    Решения u_n для возрастающего списка n.

    С источником u^q решается полная задача (малая ветвь, старт
    с чисто сингулярного решения), иначе — чисто сингулярная.
    При λ = 0 задача от n не зависит: решается один раз из основного
    состояния, решение повторяется для всех n.
    Ошибки решателей помечаются ключом n.
    """
    if not n_list or any(n <= 0 for n in n_list) or list(n_list) != sorted(set(n_list)):
        raise ValueError(f"n_list должен быть непустым строго возрастающим списком n ≥ 1: {n_list}")

    if params.lambda_ == 0 and params.q_term:
        return _power_ladder(params, grid, n_list, tol)

    entries: list[tuple[int, Field]] = []
    previous: Optional[Field] = None
    for n in n_list:
        p_n = params.with_n(n)
        try:
            if params.q_term:
                seed = previous if previous is not None else solve_pure_singular(p_n, grid, tol).u
                u = solve_full(p_n, seed, tol=tol).u
            else:
                u = solve_pure_singular(p_n, grid, tol, seed=previous).u
        except SingularPlapError as exc:
            exc.details["n"] = n
            raise
        log.debug("ladder.entry", n=n, sup_norm=u.sup_norm)
        entries.append((n, u))
        previous = u

    fields = [u for _, u in entries]
    if len(fields) >= 3:
        limit = fields[-1].with_values(aitken(*(f.values for f in fields[-3:])))
    else:
        limit = fields[-1]

    return LadderResult(
        entries=entries,
        extrapolated_limit=limit,
        monotone_violation=monotone_violation(fields),
    )


# ==============================================================================
# Нижнее и верхнее решения
# ==============================================================================

def sub_solution(params: ProblemParams, eigen: "EigenPair", c: float) -> Field:
    """
    Нижнее решение из первой собственной функции.

    LIMIT: (cφ₁)^b;  конечное n: (cφ₁ + n^{−1/b})^b − 1/n,  b = p/(δ+p−1).
    Сдвинутый вариант тоже обращается в ноль на границе.

    Сертификат: невязка чисто сингулярной задачи ≤ 10⁻⁸·s_i во внутренних
    узлах (нижнее решение чисто сингулярной задачи — нижнее и для полной).

    Raises:
        NotSubSolution: с номером нарушающего узла (c слишком велико).
    """
    if c <= 0:
        raise ValueError(f"c должно быть > 0, получено {c}")
    b = derived_exponents(params).boundary_exp
    phi = np.maximum(eigen.phi1.values, 0.0)
    if params.is_limit:
        values = (c * phi) ** b
    else:
        n = params.reg_index
        values = (c * phi + n ** (-1.0 / b)) ** b - 1.0 / n
    values[-1] = 0.0
    sub = eigen.phi1.with_values(values)

    pure = params.pure()
    R = residual(sub, pure).interior
    excess = R - CERTIFY_TOL * residual_scale(sub, pure)
    if np.any(excess > 0):
        node = int(np.argmax(excess))
        raise NotSubSolution(
            f"неравенство нижнего решения нарушено в узле {node}",
            node=node,
            c=c,
            residual=float(R[node]),
        )
    return sub


def max_certified_c(params: ProblemParams, eigen: "EigenPair", iterations: int = 60) -> float:
    """
    Наибольшее c, для которого sub_solution сертифицируется (бисекция по log c).
    """
    def certifies(c: float) -> bool:
        try:
            sub_solution(params, eigen, c)
        except NotSubSolution:
            return False
        return True

    lo, hi = 1.0, 1.0
    while not certifies(lo):
        lo *= 0.5
        if lo < 1e-30:
            raise NotSubSolution("нет сертифицируемого c", node=-1)
    while certifies(hi):
        hi *= 2.0
        if hi > 1e30:
            return hi
    for _ in range(iterations):
        mid = np.sqrt(lo * hi)
        if certifies(mid):
            lo = mid
        else:
            hi = mid
    return float(lo)


@dataclass(frozen=True)
class BoostedLambda:
    """μ из A(μ) = λ₀ и λ* = (μ/T)^{δ+p−1}."""

    mu: float
    lambda_star: float
    delta2: float
    a_max: float


def boosted_lambda(params: ProblemParams, T: float, delta0: float) -> BoostedLambda:
    """
    Решить A(μ) = λ₀ на (0, δ₂), A(s) = ½((s/T)^{δ+p−1} − s^{δ+q}).

    δ₂ = min(δ₀, δ₁), δ₁ = ½(2q−2p+3)^{1/(p−q−1)} T^{(δ+p−1)/(p−q−1)}.

    Raises:
        NoSuchMu: λ₀ > max A на (0, δ₂).
    """
    p, q, delta, lam0 = params.p, params.q, params.delta, params.lambda_
    if lam0 <= 0:
        raise NegativeLambda("верхнее решение требует λ₀ > 0", lambda_=lam0)
    k = delta + p - 1.0

    def A(s: float) -> float:
        return 0.5 * ((s / T) ** k - s ** (delta + q))

    delta1 = 0.5 * (2 * q - 2 * p + 3) ** (1.0 / (p - q - 1)) * T ** (k / (p - q - 1))
    delta2 = min(delta0, delta1)

    opt = minimize_scalar(lambda s: -A(s), bounds=(0.0, delta2), method="bounded",
                          options={"xatol": 1e-12 * delta2})
    s_max = float(opt.x)
    a_max = A(s_max)
    if lam0 > a_max:
        raise NoSuchMu(
            "A(s) не достигает λ₀ на (0, δ₂)", lambda0=lam0, a_max=a_max, delta2=delta2
        )
    mu = brentq(lambda s: A(s) - lam0, 0.0, s_max, xtol=1e-15, rtol=1e-14)
    return BoostedLambda(mu=mu, lambda_star=(mu / T) ** k, delta2=delta2, a_max=a_max)


def super_solution(
    params: ProblemParams,
    grid: RadialGrid,
    T: float,
    delta0: float,
    tol: Optional[float] = None,
) -> Field:
    """
    Верхнее решение w_{n,λ*}: чисто сингулярное решение при λ* = (μ/T)^{δ+p−1}.

    Args:
        params: Параметры полной задачи, λ = λ₀.
        grid: Сетка (T должен быть откалиброван на ней же).
        T: Константа ‖v_λ‖ ≤ T λ^{1/(δ+p−1)}.
        delta0: Нижняя граница норм решений при λ = 0.

    Raises:
        NoSuchMu: λ₀ слишком велико.
        NotSuperSolution: неравенство R(w) ≥ −10⁻⁸·s нарушено.
    """
    boost = boosted_lambda(params, T, delta0)
    w = solve_pure_singular(params.with_lambda(boost.lambda_star), grid, tol).u

    R = residual(w, params).interior
    deficit = -R - CERTIFY_TOL * residual_scale(w, params)
    if np.any(deficit > 0):
        node = int(np.argmax(deficit))
        raise NotSuperSolution(
            f"неравенство верхнего решения нарушено в узле {node}",
            node=node,
            residual=float(R[node]),
            mu=boost.mu,
        )
    log.debug("super.solution", mu=boost.mu, lambda_star=boost.lambda_star)
    return w


# ==============================================================================
# Полная задача
# ==============================================================================

def solve_full(
    params: ProblemParams,
    seed: Field,
    deflated: Sequence[Field] = (),
    tol: Optional[float] = None,
) -> SolveResult:
    """
    Решить −Δₚu = λ f_n(u) + u^q демпфированным Ньютоном.

    Невязка умножается на Π_k (1/‖u − u_k‖² + 1), что уводит итерации
    от уже известных решений.

    Raises:
        NoConvergence: Ньютон не сошёлся.
        ConvergedToDeflated: результат ближе 10⁻⁴ к известному решению.
    """
    tol = tol if tol is not None else settings.solver.tol
    result = _damped_newton(
        seed, params, tol, settings.solver.max_iter, deflated=deflated, label="full"
    )
    for k, known in enumerate(deflated):
        dist = result.u.sup_distance(known)
        if dist < DEFLATION_DISTANCE:
            raise ConvergedToDeflated(
                "Ньютон вернулся к известному решению", index=k, distance=dist
            )
    return result


def small_branch_threshold(params: ProblemParams) -> float:
    """
    M_n — положительный корень
        λ(p+δ−1)M + λ(p−1)/n = (q−p+1) M^q (M+1/n)^{1+δ}.

    При s < M_n функция s ↦ (λ f_n(s) + s^q)/s^{p−1} убывает,
    так что решение с нормой ниже M_n единственно.
    """
    p, q, delta, lam = params.p, params.q, params.delta, params.lambda_
    if lam == 0:
        return 0.0
    if params.is_limit:
        return float((lam * (p + delta - 1) / (q - p + 1)) ** (1.0 / (q + delta)))

    eps = params.shift

    def g(M: float) -> float:
        return (q - p + 1) * M**q * (M + eps) ** (1 + delta) - lam * (p + delta - 1) * M - lam * (p - 1) * eps

    hi = 1.0
    while g(hi) <= 0:
        hi *= 2.0
    return float(brentq(g, 0.0, hi, xtol=1e-15, rtol=1e-12))
