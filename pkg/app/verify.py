"""
Численные проверки свойств задачи.

Каждая проверка возвращает CheckResult со статусом pass / fail /
inconclusive / info; run_suite собирает их в VerificationReport,
упорядоченный по имени проверки.
"""

from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from app.branch import find_roots, ground_state_norm, reconstruct, scan_range
from app.calibration import cached_super_solution
from app.core import derived_exponents
from app.eigen import EigenPair, first_eigenpair
from app.exceptions import NoSuchMu, NotSuperSolution, PreconditionNotMet, SingularPlapError, WindowTooSmall
from app.grid import Field, RadialGrid, build_grid, seminorm_p
from app.log import get_logger
from app.plap import POSITIVITY_FLOOR, phi_p
from app.schemas import (
    LIMIT,
    CheckResult,
    CheckStatus,
    ProblemParams,
    RunConfig,
    VerificationReport,
)
from app.solve import (
    LadderResult,
    invert_plap,
    regularization_ladder,
    small_branch_threshold,
    solve_full,
    solve_pure_singular,
)
from settings import settings

log = get_logger(__name__)

BOUNDED_RATIO = 1.05
DIVERGING_RATIO = 1.2
EXPONENT_TOL = 0.05
FIT_WINDOW = (1e-4, 1e-2)

# Относительное расхождение sup-нормы после уточнения корня Ньютоном
SHOOTING_AGREEMENT_TOL = 1e-4

# Нижний край скана δ₀-щели относительно δ₀
GAP_SCAN_FLOOR = 1e-6

# Масштабы φ₁ для стартов Ньютона за точкой поворота
NONEXISTENCE_SCALES = tuple(float(s) for s in np.geomspace(0.1, 100.0, 10))


def _status(ok: bool) -> CheckStatus:
    return "pass" if ok else "fail"


# ==============================================================================
# Масштабирование и лестница
# ==============================================================================

def check_scaling_law(
    params: ProblemParams,
    grid: RadialGrid,
    lambda_pairs: Sequence[tuple[float, float]],
    tol: float = 1e-6,
) -> CheckResult:
    """
    ‖u_{λ'} − (λ'/λ)^{1/(δ+p−1)} u_λ‖∞ / ‖u_{λ'}‖∞ для предельной
    чисто сингулярной задачи; каждое λ решается независимо.
    """
    pure = params.model_copy(update={"reg_index": LIMIT, "q_term": False})
    k = derived_exponents(pure).scaling_exp
    cache: dict[float, Field] = {}

    def solve(lam: float) -> Field:
        if lam not in cache:
            cache[lam] = solve_pure_singular(pure.with_lambda(lam), grid).u
        return cache[lam]

    worst = 0.0
    for lam, lam2 in lambda_pairs:
        if lam == lam2:
            continue
        u, u2 = solve(lam), solve(lam2)
        diff = np.max(np.abs(u2.values - (lam2 / lam) ** k * u.values))
        worst = max(worst, float(diff / u2.sup_norm))

    return CheckResult(
        name="scaling_law",
        claim="sup-norm of the singular solution scales as lambda^(1/(delta+p-1))",
        measured=worst,
        tolerance=tol,
        status=_status(worst <= tol),
        extra={"pairs": [list(pair) for pair in lambda_pairs]},
    )


def check_monotone_ladder(ladder: LadderResult, tol: float = 1e-8, name: str = "monotone_ladder") -> CheckResult:
    """Нарушение монотонности u_n по n относительно max ‖u_n‖∞."""
    measured = ladder.monotone_violation / ladder.max_sup_norm
    return CheckResult(
        name=name,
        claim="regularized solutions increase with n",
        measured=measured,
        tolerance=tol,
        status=_status(measured <= tol),
    )


def _boundary_slope(u: Field) -> float:
    nodes = u.grid.nodes
    return float(u.values[-2] / (1.0 - nodes[-2]))


def check_uniform_hopf(ladder: LadderResult) -> CheckResult:
    """
    min_n (u_n(r_{m−1}) / (1 − r_{m−1})) ≥ c₀ — половина наклона первого члена.
    """
    slopes = [_boundary_slope(u) for _, u in ladder.entries]
    c0 = 0.5 * slopes[0]
    measured = min(slopes)
    return CheckResult(
        name="uniform_hopf",
        claim="boundary slope stays bounded away from zero along the ladder",
        measured=measured,
        tolerance=c0,
        status=_status(c0 > 0 and measured >= c0),
        extra={"slopes": slopes},
    )


def check_interior_floor(ladder: LadderResult) -> CheckResult:
    """min_n u_n(1/2) ≥ u_1(1/2) > 0."""
    centre = [u.value_at(0.5) for _, u in ladder.entries]
    first = centre[0]
    measured = min(centre) - first
    return CheckResult(
        name="interior_floor",
        claim="regularized solutions share a positive interior floor",
        measured=measured,
        tolerance=1e-12 * max(first, 1.0),
        status=_status(first > 0 and measured >= -1e-12 * max(first, 1.0)),
        extra={"u_half": centre},
    )


def interior_seminorm(u: Field, p: float, radius: float = 0.5) -> float:
    """∫_{|x|<radius} |∇u|^p dx по ячейкам с серединой внутри шара."""
    grid = u.grid
    mask = grid.midpoints <= radius
    return float(np.sum((grid.face_area * grid.h * np.abs(u.derivative) ** p)[mask]))


def check_interior_seminorm(ladder: LadderResult, p: float) -> CheckResult:
    """Справочно: seminorm на r ≤ 1/2 вдоль лестницы."""
    values = [interior_seminorm(u, p) for _, u in ladder.entries]
    ratio = max(values) / min(values) if min(values) > 0 else float("inf")
    return CheckResult(
        name="interior_seminorm",
        claim="interior energy stays bounded along the ladder",
        measured=ratio,
        tolerance=0.0,
        status="info",
        extra={"seminorms": values},
    )


# ==============================================================================
# Пиконе и сравнение
# ==============================================================================

def picone_pairing(u: Field, phi: Field, p: float) -> float:
    """
    Σ_j A_j h_j [|Dφ|^p − Φₚ(Du)·D(φ^p/u^{p−1})], ψ = 0 в узле r = 1.

    Каждое слагаемое неотрицательно (дискретное неравенство Пиконе),
    равенство при u = φ.
    """
    grid = u.grid
    psi = np.zeros_like(u.values)
    psi[:-1] = np.abs(phi.interior) ** p / u.interior ** (p - 1.0)
    d_phi = phi.derivative
    d_psi = np.diff(psi) / grid.h
    terms = np.abs(d_phi) ** p - phi_p(u.derivative, p) * d_psi
    return float(np.sum(grid.face_area * grid.h * terms))


def check_picone(u: Field, eigen: EigenPair, tol: float = 1e-6, name: str = "picone") -> CheckResult:
    """∫|∇φ₁|^p − ∫∇(φ₁^p/u^{p−1})·|∇u|^{p−2}∇u ≥ −tol."""
    if np.any(u.interior <= 0):
        raise PreconditionNotMet("Пиконе требует u > 0 во внутренних узлах")
    measured = picone_pairing(u, eigen.phi1, eigen.p)
    return CheckResult(
        name=name,
        claim="Picone pairing with the first eigenfunction is nonnegative",
        measured=measured,
        tolerance=tol,
        status=_status(measured >= -tol),
    )


def check_comparison(u: Field, v: Field, f_u: Field, f_v: Field) -> CheckResult:
    """
    Строгое сравнение: u − v > 0 внутри и наклон u у границы круче.

    Raises:
        PreconditionNotMet: f_u < f_v где-либо, f_v < 0, или нет двух
            соседних узлов со строгим зазором f_u > f_v.
    """
    fu, fv = f_u.interior, f_v.interior
    if np.any(fv < 0):
        raise PreconditionNotMet("f_v < 0")
    if np.any(fu < fv):
        raise PreconditionNotMet("f_u < f_v в некотором узле")
    strict = fu > fv
    if not np.any(strict[:-1] & strict[1:]):
        raise PreconditionNotMet("нет множества положительной меры, где f_u > f_v")

    interior_gap = float(np.min(u.interior - v.interior))
    slope_gap = _boundary_slope(u) - _boundary_slope(v)
    measured = min(interior_gap, slope_gap)
    return CheckResult(
        name="comparison",
        claim="larger source gives a strictly larger solution and steeper boundary slope",
        measured=measured,
        tolerance=0.0,
        status=_status(measured > 0),
        extra={"interior_gap": interior_gap, "slope_gap": slope_gap},
    )


# ==============================================================================
# Граничное поведение
# ==============================================================================

def check_boundary_exponent(
    u: Field,
    p: float,
    delta: float,
    expected: Optional[float] = None,
    window: tuple[float, float] = FIT_WINDOW,
    name: str = "boundary_exponent",
) -> CheckResult:
    """
    Наклон log u по log(1 − r) в окне у границы против p/(δ+p−1).

    При δ = 1 профиль d·(ln 1/d)^{1/p}: логарифмический множитель
    снимается до подгонки.

    Raises:
        WindowTooSmall: в окне меньше 5 узлов.
    """
    d = 1.0 - u.grid.nodes[:-1]
    vals = u.interior
    mask = (d >= window[0]) & (d <= window[1]) & (vals > 0)
    if np.count_nonzero(mask) < 5:
        raise WindowTooSmall(
            "в окне подгонки меньше 5 узлов", nodes=int(np.count_nonzero(mask)), window=list(window)
        )
    dd, uu = d[mask], vals[mask]
    if delta == 1.0:
        uu = uu / np.log(1.0 / dd) ** (1.0 / p)
    slope = float(np.polyfit(np.log(dd), np.log(uu), 1)[0])

    target = expected if expected is not None else p / (delta + p - 1.0)
    measured = abs(slope - target)
    return CheckResult(
        name=name,
        claim="solution vanishes like (1-r)^(p/(delta+p-1)) at the boundary",
        measured=measured,
        tolerance=EXPONENT_TOL,
        status=_status(measured <= EXPONENT_TOL),
        extra={"slope": slope, "expected": target},
    )


def classify_refinement(values: Sequence[float]) -> str:
    """BOUNDED / DIVERGING / INCONCLUSIVE по отношениям соседних значений."""
    ratios = [b / a for a, b in zip(values, values[1:])]
    if all(r <= BOUNDED_RATIO for r in ratios):
        return "BOUNDED"
    if all(r >= DIVERGING_RATIO for r in ratios):
        return "DIVERGING"
    return "INCONCLUSIVE"


def check_alpha_membership(
    params: ProblemParams,
    alphas: Sequence[float],
    m: int,
    grading: float,
    refinements: int = 3,
) -> list[CheckResult]:
    """
    Принадлежность u^α энергетическому пространству по сгущению сеток.

    Для каждого α считается ∫|∇u^α|^p на сетках m, 2m, 4m; ожидается
    BOUNDED при α выше порога (p−1)(δ+p−1)/p² и DIVERGING при α ниже половины порога.
    """
    pure = params.model_copy(update={"reg_index": LIMIT, "q_term": False})
    threshold = derived_exponents(pure).alpha_threshold
    solutions = [
        solve_pure_singular(pure, build_grid(m * 2**k, grading, pure.dim_N)).u
        for k in range(refinements)
    ]

    results = []
    for alpha in alphas:
        values = [seminorm_p(u.with_values(np.maximum(u.values, 0.0) ** alpha), pure.p) for u in solutions]
        cls = classify_refinement(values)
        if alpha > threshold:
            expected = "BOUNDED"
        elif alpha < threshold / 2:
            expected = "DIVERGING"
        else:
            expected = None

        if expected is None:
            status: CheckStatus = "info"
        elif cls == "INCONCLUSIVE":
            status = "inconclusive"
        else:
            status = _status(cls == expected)

        results.append(CheckResult(
            name=f"alpha_membership[{alpha:.6g}]",
            claim="u^alpha has finite energy exactly above the exponent threshold",
            measured=values[-1] / values[-2],
            tolerance=BOUNDED_RATIO if expected == "BOUNDED" else DIVERGING_RATIO,
            status=status,
            extra={"alpha": alpha, "threshold": threshold, "seminorms": values, "class": cls},
        ))
    return results


# ==============================================================================
# δ₀ и малая ветвь
# ==============================================================================

def check_delta0(
    params: ProblemParams,
    ode_rtol: Optional[float] = None,
    samples: int = 240,
    stability_tol: float = 1e-3,
) -> CheckResult:
    """
    δ₀ — наименьший корень при λ = 0; скан [10⁻⁶δ₀, δ₀/2] без корней
    и устойчивость δ₀ при ужесточении допусков ОДУ в 16 раз.
    """
    zero = params.with_lambda(0.0)
    rtol = ode_rtol if ode_rtol is not None else settings.solver.ode_rtol
    delta0 = ground_state_norm(zero, rtol)
    refined = ground_state_norm(zero, rtol / 16.0)
    stability = abs(refined - delta0) / refined
    below = find_roots(zero, GAP_SCAN_FLOOR * delta0, delta0 / 2.0, samples, rtol)

    return CheckResult(
        name="delta0_gap",
        claim="no solution of the pure power problem has sup-norm below delta0",
        measured=delta0,
        tolerance=stability_tol,
        status=_status(not below and stability <= stability_tol),
        extra={
            "roots_below": below,
            "scan": [GAP_SCAN_FLOOR * delta0, delta0 / 2.0],
            "refined": refined,
            "stability": stability,
        },
    )


def _power_only(name: str, claim: str) -> CheckResult:
    return CheckResult(name=name, claim=claim, measured=0.0, tolerance=0.0, status="info")


def check_small_branch(
    params: ProblemParams,
    grid: RadialGrid,
    tol: float,
    assert_for_small_delta: bool = False,
) -> CheckResult:
    """
    Три начальных приближения ниже порога M_n сходятся к одному решению.

    При δ ≤ 1 по умолчанию статус info (неравенство для единственности
    требует δ > 1).
    """
    if params.lambda_ == 0:
        return _power_only("small_branch_uniqueness", "no small branch exists without the singular term")
    mu = small_branch_threshold(params)
    pure = solve_pure_singular(params, grid, tol).u
    seeds = []
    for factor in (1.0, 1.2, 1.5):
        seed = pure.values * factor
        top = float(np.max(seed))
        if mu > 0 and top > mu:
            seed = seed * (mu / top)
        seeds.append(pure.with_values(seed))

    solutions = [solve_full(params, seed, tol=tol).u for seed in seeds]
    spread = max((a.sup_distance(b) for a, b in combinations(solutions, 2)), default=0.0)
    limit = 10.0 * tol * max(solutions[0].sup_norm, 1.0)

    ok = spread <= limit
    status = _status(ok) if (params.delta > 1 or assert_for_small_delta) else "info"
    return CheckResult(
        name="small_branch_uniqueness",
        claim="seeds below the small-branch threshold converge to one solution",
        measured=spread,
        tolerance=limit,
        status=status,
        extra={"threshold": mu, "sup_norm": solutions[0].sup_norm},
    )


def check_full_dominates_pure(params: ProblemParams, grid: RadialGrid, tol: float) -> CheckResult:
    """Минимальное решение полной задачи ≥ чисто сингулярного решения − 10⁻⁸."""
    if params.lambda_ == 0:
        return _power_only("full_dominates_pure", "the pure singular problem has no solution at lambda = 0")
    pure = solve_pure_singular(params, grid, tol).u
    full = solve_full(params, pure, tol=tol).u
    measured = float(np.min(full.values - pure.values))
    return CheckResult(
        name="full_dominates_pure",
        claim="the minimal full solution lies above the pure singular solution",
        measured=measured,
        tolerance=1e-8,
        status=_status(measured >= -1e-8),
    )


def check_super_bounds_minimal(params: ProblemParams, grid: RadialGrid, tol: float) -> CheckResult:
    """
    Минимальное решение не выше верхнего решения из откалиброванных T и δ₀.

    Если усиленного λ нет (λ велико), статус info; если сертификат
    верхнего решения не выполнен на этой сетке, inconclusive.
    """
    if params.lambda_ == 0:
        return _power_only("super_bounds_minimal", "no super-solution is built without the singular term")
    claim = "the minimal full solution lies below the calibrated super-solution"
    try:
        w = cached_super_solution(params, grid, tol)
    except NoSuchMu as exc:
        return CheckResult(
            name="super_bounds_minimal", claim=claim, measured=0.0, tolerance=1e-8,
            status="info", extra={"error": type(exc).__name__, **exc.details},
        )
    except NotSuperSolution as exc:
        return CheckResult(
            name="super_bounds_minimal", claim=claim, measured=float("inf"), tolerance=1e-8,
            status="inconclusive", extra={"error": type(exc).__name__, **exc.details},
        )

    minimal = solve_full(params, solve_pure_singular(params, grid, tol).u, tol=tol).u
    measured = float(np.max(minimal.values - w.values))
    return CheckResult(
        name="super_bounds_minimal",
        claim=claim,
        measured=measured,
        tolerance=1e-8,
        status=_status(measured <= 1e-8),
        extra={"super_sup_norm": w.sup_norm, "minimal_sup_norm": minimal.sup_norm},
    )


# ==============================================================================
# Ветви: стрельба против Ньютона
# ==============================================================================

def _branch_tag(index: int, count: int) -> str:
    if index == 0:
        return "lower"
    if index == count - 1:
        return "upper"
    return f"middle{index}"


def check_branch_solutions(
    params: ProblemParams,
    grid: RadialGrid,
    eigen: EigenPair,
    roots: Sequence[float],
    tol: float,
) -> list[CheckResult]:
    """
    Корни калибра, уточнённые Ньютоном на сетке.

    Профиль по выстрелу поднимается до чисто сингулярного решения
    (нижнего решения полной задачи) и уточняется solve_full с дефляцией
    уже найденных решений, от нижней ветви к верхней. Для каждого корня
    две проверки: sup-норма после уточнения против M и тождество Пиконе.
    В extra пишется расстояние уточнения ‖u − профиль‖∞.
    """
    if params.lambda_ > 0:
        floor = solve_pure_singular(params, grid, tol).u.values
    else:
        floor = np.full(grid.nodes.shape, POSITIVITY_FLOOR)

    ordered = sorted(roots)
    known: list[Field] = []
    results: list[CheckResult] = []
    for i, M in enumerate(ordered):
        tag = _branch_tag(i, len(ordered))
        profile = reconstruct(params, M, grid)
        values = np.maximum(profile.values, floor)
        values[-1] = 0.0
        seed = profile.with_values(values)
        extra = {"lambda": params.lambda_, "M": M}
        try:
            u = solve_full(params, seed, deflated=known, tol=tol).u
        except SingularPlapError as exc:
            results.append(CheckResult(
                name=f"shooting_newton[{tag}]",
                claim="Newton polish of a shooting root keeps its sup-norm",
                measured=float("inf"),
                tolerance=SHOOTING_AGREEMENT_TOL,
                status="fail",
                extra={**extra, "error": type(exc).__name__},
            ))
            continue
        known.append(u)
        agreement = abs(u.sup_norm - M) / M
        results.append(CheckResult(
            name=f"shooting_newton[{tag}]",
            claim="Newton polish of a shooting root keeps its sup-norm",
            measured=agreement,
            tolerance=SHOOTING_AGREEMENT_TOL,
            status=_status(agreement <= SHOOTING_AGREEMENT_TOL),
            extra={**extra, "sup_norm": u.sup_norm, "polish_distance": u.sup_distance(seed)},
        ))
        results.append(check_picone(u, eigen, name=f"picone_branch[{tag}]"))
    log.debug("branch.polished", lambda_=params.lambda_, roots=len(ordered), solved=len(known))
    return results


def check_nonexistence(params: ProblemParams, grid: RadialGrid, eigen: EigenPair, tol: float) -> CheckResult:
    """Ни один из стартов cφ₁ не сходится: решений при этом λ нет."""
    converged: list[float] = []
    for scale in NONEXISTENCE_SCALES:
        seed = eigen.phi1.with_values(scale * eigen.phi1.values)
        try:
            converged.append(solve_full(params, seed, tol=tol).u.sup_norm)
        except (SingularPlapError, ValueError):
            continue
    return CheckResult(
        name="nonexistence",
        claim="Newton finds no solution beyond the fold",
        measured=float(len(converged)),
        tolerance=0.0,
        status=_status(not converged),
        extra={"lambda": params.lambda_, "seeds": len(NONEXISTENCE_SCALES), "sup_norms": converged},
    )


# ==============================================================================
# Набор проверок
# ==============================================================================

def run_suite(config: RunConfig) -> VerificationReport:
    """
    Все проверки для конфигурации запуска.

    Порядок вычислений фиксирован; отчёт упорядочен по имени.
    """
    params = config.params()
    p, delta = params.p, params.delta
    grid = build_grid(config.m, config.grading, params.dim_N)
    eigen = first_eigenpair(grid, p)
    checks: list[CheckResult] = []

    checks.append(check_picone(eigen.phi1, eigen, name="picone_eigenfunction"))
    checks.append(check_scaling_law(params, grid, [(1.0, 16.0)]))

    # При λ = 0 свойства чисто сингулярной задачи проверяются при λ = 1
    singular = params if params.lambda_ > 0 else params.with_lambda(1.0)

    pure_ladder = regularization_ladder(singular.pure(), grid, config.n_list, config.tol)
    checks.append(check_monotone_ladder(pure_ladder, name="monotone_ladder_pure"))
    checks.append(check_interior_floor(pure_ladder))
    checks.append(check_interior_seminorm(pure_ladder, p))

    full_ladder = regularization_ladder(params, grid, config.n_list, config.tol)
    checks.append(check_monotone_ladder(full_ladder, name="monotone_ladder_full"))
    checks.append(check_uniform_hopf(full_ladder))
    for n, u in full_ladder.entries[-1:]:
        checks.append(check_picone(u, eigen, name=f"picone_solution[n={n}]"))

    limit = solve_pure_singular(singular.with_n(LIMIT), grid, config.tol).u
    if delta >= 1:
        checks.append(check_boundary_exponent(limit, p, delta))

    threshold = derived_exponents(params).alpha_threshold
    checks.extend(check_alpha_membership(
        singular, [1.25 * threshold, 0.4 * threshold], config.m, config.grading
    ))
    delta0_check = check_delta0(params, config.ode_rtol)
    checks.append(delta0_check)
    if params.q_term:
        roots = find_roots(
            params, *scan_range(params, delta0_check.measured), config.scan_samples, config.ode_rtol
        )
        checks.extend(check_branch_solutions(params, grid, eigen, roots, config.tol))

    ones = grid.field(1.0)
    twos = grid.field(2.0)
    checks.append(check_comparison(invert_plap(twos, p), invert_plap(ones, p), twos, ones))

    checks.append(check_small_branch(params, grid, config.tol))
    checks.append(check_full_dominates_pure(params, grid, config.tol))
    if params.q_term:
        checks.append(check_super_bounds_minimal(params, grid, config.tol))

    if config.negative_controls:
        checks.append(check_monotone_ladder(
            pure_ladder.permuted(), name="negative_control.permuted_ladder"
        ))
        b = derived_exponents(params).boundary_exp
        wrong = b if abs(b - 1.0) > 0.1 else 0.5
        checks.append(check_boundary_exponent(
            eigen.phi1, p, delta, expected=wrong, name="negative_control.wrong_exponent"
        ))

    context = {"params": params.to_record(), "grid": grid.descriptor()}
    log.info("verify.done", checks=len(checks), failed=sum(c.status == "fail" for c in checks))
    return VerificationReport(checks=sorted(checks, key=lambda c: c.name), context=context)
