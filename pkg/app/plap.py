"""
Дискретный радиальный p-Лапласиан.

Оператор определён как точный градиент дискретной энергии
    E(u) = (1/p) Σ_j A_j h_j |D_j|^p − Σ_i w_i rhs_i u_i,
делённый на веса квадратуры:
    (−Δₚu)_i = (F_{i−1} − F_i) / w_i,   F_j = A_j Φₚ(D_j),   F_{−1} = 0.

Условие симметрии u'(0) = 0 встроено в первую ячейку (F_{−1} = 0),
значение u_m = 0 фиксировано. Неизвестные — u_0 … u_{m−1}.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from app.exceptions import NonpositiveInterior
from app.grid import Field, integrate, seminorm_p
from app.schemas import ProblemParams
from settings import settings

# Нижняя граница для u в сингулярном члене на пробных шагах
POSITIVITY_FLOOR = 1e-14


@dataclass(frozen=True)
class OperatorConfig:
    """
    Настройки линеаризации.

    Attributes:
        p: Показатель p-Лапласиана.
        eps_degenerate: Регуляризация (D² + ε²)^{(p−2)/2}; только в якобиане.
    """

    p: float
    eps_degenerate: float = field(default_factory=lambda: settings.solver.eps_degenerate)


def phi_p(x: np.ndarray, p: float) -> np.ndarray:
    """Φₚ(x) = |x|^{p−2}x, без деления на ноль в x = 0."""
    return np.sign(x) * np.abs(x) ** (p - 1.0)


def flux(u: Field, p: float) -> np.ndarray:
    """Поток F_j = A_j Φₚ(D_j) через середину каждой ячейки."""
    return u.grid.face_area * phi_p(u.derivative, p)


def apply_plap(u: Field, p: float) -> Field:
    """
    −Δₚu во внутренних узлах; в узле r = 1 записан ноль.

    Example:
        >>> u = grid.sample(lambda r: (1 - r**2) / 6)
        >>> apply_plap(u, 2.0).values  # ≈ 1 при N = 3
    """
    F = flux(u, p)
    F_prev = np.concatenate(([0.0], F[:-1]))
    out = np.zeros_like(u.values)
    out[:-1] = (F_prev - F) / u.grid.quad_weights[:-1]
    return u.with_values(out)


def energy(u: Field, rhs: Field, p: float) -> float:
    """(1/p)·∫|∇u|^p − ∫ rhs·u — строго выпуклый функционал."""
    return seminorm_p(u, p) / p - integrate(rhs.with_values(rhs.values * u.values))


def energy_gradient(u: Field, rhs: Field, p: float) -> np.ndarray:
    """Точный градиент energy по u_0 … u_{m−1}."""
    w = u.grid.quad_weights[:-1]
    return w * (apply_plap(u, p).interior - rhs.interior)


# ==============================================================================
# Нелинейность и невязка
# ==============================================================================

def singular_term(u: np.ndarray, params: ProblemParams) -> np.ndarray:
    """λ·f_n(u): f_n(u) = (u + 1/n)^{−δ}, f_LIMIT(u) = u^{−δ}."""
    if params.lambda_ == 0:
        return np.zeros_like(u, dtype=float)
    base = np.maximum(u + params.shift, POSITIVITY_FLOOR)
    return params.lambda_ * base ** (-params.delta)


def source(u: np.ndarray, params: ProblemParams) -> np.ndarray:
    """Правая часть λ f_n(u) + max(u, 0)^q."""
    out = singular_term(u, params)
    if params.q_term:
        out = out + np.maximum(u, 0.0) ** params.q
    return out


def source_derivative(u: np.ndarray, params: ProblemParams) -> np.ndarray:
    """d/du правой части: −λδ(u+1/n)^{−δ−1} + q u^{q−1}."""
    base = np.maximum(u + params.shift, POSITIVITY_FLOOR)
    out = -params.lambda_ * params.delta * base ** (-params.delta - 1.0)
    if params.q_term:
        out = out + params.q * np.maximum(u, 0.0) ** (params.q - 1.0)
    return out


def _check_interior(u: Field, params: ProblemParams) -> None:
    if params.is_limit and params.lambda_ > 0:
        bad = np.flatnonzero(u.interior <= 0)
        if bad.size:
            raise NonpositiveInterior(
                f"u ≤ 0 во внутреннем узле {int(bad[0])}",
                node=int(bad[0]),
                value=float(u.values[bad[0]]),
            )


def residual(u: Field, params: ProblemParams) -> Field:
    """
    R(u) = −Δₚu − λ f_n(u) − u^q во внутренних узлах, ноль на границе.

    Raises:
        NonpositiveInterior: для LIMIT, если u ≤ 0 в некотором внутреннем узле.
    """
    _check_interior(u, params)
    out = apply_plap(u, params.p).values
    out[:-1] -= source(u.interior, params)
    return u.with_values(out)


def residual_scale(u: Field, params: ProblemParams) -> np.ndarray:
    """
    Масштаб слагаемых невязки во внутренних узлах:
    1 + λ f_n(u) + max(u,0)^q + (|F_{i−1}| + |F_i|)/w_i.

    Последнее слагаемое — порог округления разности потоков
    на самых мелких ячейках сгущённой сетки.
    """
    F = np.abs(flux(u, params.p))
    F_prev = np.concatenate(([0.0], F[:-1]))
    return 1.0 + source(u.interior, params) + (F_prev + F) / u.grid.quad_weights[:-1]


def scaled_residual_sup(u: Field, params: ProblemParams) -> float:
    """max_i |R_i| / s_i — критерий сходимости всех решателей."""
    r = residual(u, params).interior
    return float(np.max(np.abs(r) / residual_scale(u, params)))


# ==============================================================================
# Линеаризация
# ==============================================================================

@dataclass(frozen=True, eq=False)
class Linearization:
    """
    Якобиан невязки: симметричная трёхдиагональная матрица
    взвешенной системы w⊙R по неизвестным u_0 … u_{m−1}.

    Attributes:
        diag: Диагональ (длина m).
        off: Над/поддиагональ (длина m − 1).
        weights: Веса квадратуры внутренних узлов.
        diffusion: (p−1)(D² + ε²)^{(p−2)/2} в серединах ячеек.
    """

    diag: np.ndarray
    off: np.ndarray
    weights: np.ndarray
    diffusion: np.ndarray

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """Произведение симметричной (взвешенной) матрицы на вектор."""
        out = self.diag * x
        out[:-1] += self.off * x[1:]
        out[1:] += self.off * x[:-1]
        return out

    def apply(self, v: Field) -> Field:
        """J·v для невзвешенной невязки; граничный узел — ноль."""
        out = np.zeros_like(v.values)
        out[:-1] = self.matvec(v.interior) / self.weights
        return v.with_values(out)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Решить J_w x = rhs (rhs во взвешенной форме)."""
        ab = np.zeros((3, self.diag.size))
        ab[0, 1:] = self.off
        ab[1] = self.diag
        ab[2, :-1] = self.off
        return solve_banded((1, 1), ab, rhs)


def linearize(u: Field, params: ProblemParams, cfg: OperatorConfig) -> Linearization:
    """
    Якобиан R в точке u.

    Коэффициент диффузии регуляризован только здесь:
    (p−1)(D² + ε²)^{(p−2)/2}, ε = eps_degenerate · max(‖u‖∞, 1).
    """
    _check_interior(u, params)
    grid = u.grid
    p = cfg.p
    eps = cfg.eps_degenerate * max(u.sup_norm, 1.0)
    D = u.derivative

    if p == 2.0:
        diffusion = np.ones_like(D)
    else:
        diffusion = (p - 1.0) * (D**2 + eps**2) ** ((p - 2.0) / 2.0)
    c = grid.face_area * diffusion / grid.h

    w = grid.quad_weights[:-1]
    diag = c.copy()
    diag[1:] += c[:-1]
    diag -= w * source_derivative(u.interior, params)

    return Linearization(diag=diag, off=-c[:-1], weights=w, diffusion=diffusion)
