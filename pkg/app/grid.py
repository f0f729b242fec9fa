"""
Радиальные сетки на [0, 1] и квадратуры по N-мерному шару.

Узлы сгущаются к границе: r_i = 1 − (1 − i/m)^g.
Веса — точные меры r^{N−1}dr двойственных ячеек [r_{i−1/2}, r_{i+1/2}]
(половинные ячейки на концах), умноженные на площадь сферы ω_{N−1}.
"""

import csv
from dataclasses import dataclass
from functools import cached_property
from math import gamma, pi
from pathlib import Path
from typing import Any, Callable, Union

import numpy as np

from app.exceptions import TooCoarse

MIN_CELLS = 16


def sphere_area(dim_N: int) -> float:
    """ω_{N−1} = 2π^{N/2}/Γ(N/2) — площадь единичной сферы в R^N."""
    return 2.0 * pi ** (dim_N / 2.0) / gamma(dim_N / 2.0)


# ==============================================================================
# Сетка
# ==============================================================================

@dataclass(frozen=True, eq=False)
class RadialGrid:
    """
    Радиальная сетка 0 = r_0 < … < r_m = 1.

    Attributes:
        nodes: Узлы сетки.
        dim_N: Размерность шара.
        quad_weights: Веса квадратуры ∫_Ω g dx ≈ Σ w_i g(r_i).
        grading: Показатель сгущения к r = 1.
    """

    nodes: np.ndarray
    dim_N: int
    quad_weights: np.ndarray
    grading: float

    @property
    def m(self) -> int:
        return len(self.nodes) - 1

    @cached_property
    def h(self) -> np.ndarray:
        """Длины ячеек h_j = r_{j+1} − r_j."""
        return np.diff(self.nodes)

    @cached_property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.nodes[:-1] + self.nodes[1:])

    @cached_property
    def face_area(self) -> np.ndarray:
        """A_j = ω_{N−1} r_{j+1/2}^{N−1} — площадь сферы в середине ячейки."""
        return sphere_area(self.dim_N) * self.midpoints ** (self.dim_N - 1)

    @property
    def volume(self) -> float:
        return sphere_area(self.dim_N) / self.dim_N

    def field(self, values: Union[np.ndarray, float]) -> "Field":
        """Поле на этой сетке (скаляр растягивается на все узлы)."""
        arr = np.broadcast_to(np.asarray(values, dtype=float), self.nodes.shape).copy()
        return Field(grid=self, values=arr)

    def sample(self, fn: Callable[[np.ndarray], np.ndarray]) -> "Field":
        return self.field(fn(self.nodes))

    def descriptor(self) -> dict[str, Any]:
        """JSON-запись {m, grading, N}."""
        return {"m": self.m, "grading": self.grading, "N": self.dim_N}

    @classmethod
    def from_descriptor(cls, record: dict[str, Any]) -> "RadialGrid":
        return build_grid(int(record["m"]), float(record["grading"]), int(record["N"]))


@dataclass(frozen=True, eq=False)
class Field:
    """Значения функции в узлах сетки."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.values.shape != self.grid.nodes.shape:
            raise ValueError(
                f"длина поля {self.values.shape} не совпадает с сеткой {self.grid.nodes.shape}"
            )

    @property
    def interior(self) -> np.ndarray:
        """Значения во всех узлах, кроме граничного r = 1."""
        return self.values[:-1]

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    @property
    def derivative(self) -> np.ndarray:
        """Односторонние разности D_j = (u_{j+1} − u_j)/h_j в серединах ячеек."""
        return np.diff(self.values) / self.grid.h

    def with_values(self, values: np.ndarray) -> "Field":
        return Field(grid=self.grid, values=np.asarray(values, dtype=float))

    def value_at(self, r: float) -> float:
        """Линейная интерполяция в точке r."""
        return float(np.interp(r, self.grid.nodes, self.values))

    def sup_distance(self, other: "Field") -> float:
        return float(np.max(np.abs(self.values - other.values)))

    def to_csv(self, path: Path) -> None:
        """CSV со столбцами r,value (repr-точность, детерминированно)."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["r", "value"])
            for r, v in zip(self.grid.nodes, self.values):
                writer.writerow([repr(float(r)), repr(float(v))])

    @classmethod
    def from_csv(cls, path: Path, grid: RadialGrid) -> "Field":
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        return grid.field(np.array([float(row["value"]) for row in rows]))


# ==============================================================================
# Операции
# ==============================================================================

def build_grid(m: int, grading: float, dim_N: int) -> RadialGrid:
    """
    Построить сетку с m ячейками и сгущением grading.

    Args:
        m: Число ячеек (узлов m + 1).
        grading: Показатель g ≥ 1; g = 1 — равномерная сетка.
        dim_N: Размерность шара.

    Returns:
        RadialGrid: Сетка с точными весами двойственных ячеек.

    Raises:
        TooCoarse: m < 16.

    Example:
        >>> grid = build_grid(100, 1.0, 3)
        >>> grid.quad_weights.sum()  # 4π/3
    """
    if m < MIN_CELLS:
        raise TooCoarse(f"нужно не меньше {MIN_CELLS} ячеек, получено {m}", m=m)
    if grading < 1.0:
        raise ValueError(f"grading должен быть ≥ 1, получено {grading}")

    t = np.arange(m + 1, dtype=float) / m
    nodes = 1.0 - (1.0 - t) ** grading
    nodes[0], nodes[-1] = 0.0, 1.0

    # Границы двойственных ячеек: 0, середины, 1
    edges = np.concatenate(([0.0], 0.5 * (nodes[:-1] + nodes[1:]), [1.0]))
    weights = sphere_area(dim_N) * np.diff(edges**dim_N) / dim_N

    return RadialGrid(nodes=nodes, dim_N=dim_N, quad_weights=weights, grading=float(grading))


def integrate(g: Field) -> float:
    """∫_Ω g dx ≈ Σ w_i g_i."""
    return float(np.dot(g.grid.quad_weights, g.values))


def seminorm_p(u: Field, s: float) -> float:
    """
    ∫_Ω |∇u|^s dx по разностям в серединах ячеек.

    Квадратура середин: Σ_j A_j h_j |D_j|^s.
    """
    if s < 1:
        raise ValueError(f"показатель s должен быть ≥ 1, получено {s}")
    grid = u.grid
    return float(np.sum(grid.face_area * grid.h * np.abs(u.derivative) ** s))
