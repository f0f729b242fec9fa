"""
Первая собственная пара (λ₁, φ₁) оператора −Δₚ в шаре с условием Дирихле.

Обратная степенная итерация:
    φ ← invert_plap(R(φ)·φ^{p−1}),  затем нормировка sup|φ| = 1,
где R — отношение Рэлея.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from app.exceptions import NoConvergence, ZeroField
from app.grid import Field, RadialGrid, integrate, seminorm_p
from app.log import get_logger
from app.plap import apply_plap
from app.solve import invert_plap

log = get_logger(__name__)

RAYLEIGH_TOL = 1e-10
MAX_ITER = 500


@dataclass(frozen=True, eq=False)
class EigenPair:
    """
    Attributes:
        lambda1: Первое собственное значение.
        phi1: Собственная функция, sup-норма 1, положительна внутри.
        p: Показатель p-Лапласиана.
        iterations: Число итераций степенного метода.
    """

    lambda1: float
    phi1: Field
    p: float
    iterations: int = 0

    @property
    def residual_sup(self) -> float:
        """sup|−Δₚφ₁ − λ₁φ₁^{p−1}| / λ₁ — относительная невязка пары."""
        p = self.p
        lhs = apply_plap(self.phi1, p).interior
        rhs = self.lambda1 * np.abs(self.phi1.interior) ** (p - 1.0)
        return float(np.max(np.abs(lhs - rhs)) / self.lambda1)


def rayleigh(u: Field, p: float) -> float:
    """
    ∫|∇u|^p / ∫|u|^p.

    Raises:
        ZeroField: u ≡ 0.
    """
    denom = integrate(u.with_values(np.abs(u.values) ** p))
    if denom <= 0:
        raise ZeroField("отношение Рэлея для нулевого поля не определено")
    return seminorm_p(u, p) / denom


def first_eigenpair(
    grid: RadialGrid,
    p: float,
    seed: Optional[Field] = None,
    tol: float = RAYLEIGH_TOL,
    max_iter: int = MAX_ITER,
) -> EigenPair:
    """
    Найти (λ₁, φ₁) обратной степенной итерацией.

    Останов: отношение Рэлея стационарно до tol (относительно)
    и φ меняется в sup-норме не больше 10·tol.

    Args:
        grid: Радиальная сетка.
        p: Показатель p-Лапласиана.
        seed: Начальное приближение (по умолчанию — функция кручения).

    Raises:
        NoConvergence: лимит итераций (last_value — последнее отношение Рэлея).

    Example:
        >>> pair = first_eigenpair(build_grid(1024, 3.0, 3), 2.0)
        >>> pair.lambda1  # ≈ π²
    """
    phi = seed if seed is not None else invert_plap(grid.field(1.0), p)
    phi = phi.with_values(np.abs(phi.values) / phi.sup_norm)
    lam = rayleigh(phi, p)

    for iteration in range(1, max_iter + 1):
        rhs = phi.with_values(lam * phi.values ** (p - 1.0))
        psi = invert_plap(rhs, p)
        new_phi = psi.with_values(psi.values / psi.sup_norm)
        new_lam = rayleigh(new_phi, p)

        change = new_phi.sup_distance(phi)
        stationary = abs(new_lam - lam) <= tol * new_lam
        phi, lam = new_phi, new_lam
        log.debug("eigen.step", iteration=iteration, rayleigh=lam, change=change)

        if stationary and change <= 10.0 * tol:
            return EigenPair(lambda1=lam, phi1=phi, p=p, iterations=iteration)

    raise NoConvergence("степенной метод исчерпал лимит итераций", last_value=lam, max_iter=max_iter)
