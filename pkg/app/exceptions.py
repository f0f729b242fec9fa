"""
Иерархия исключений toolkit.

Каждое исключение несёт словарь `details` со структурированным
контекстом: CLI записывает его в маркер FAILED, а логгер — в событие.
"""

from typing import Any, Optional


class SingularPlapError(Exception):
    """Базовое исключение пакета."""

    def __init__(self, message: str, **details: Any) -> None:
        super().__init__(message)
        self.message = message
        self.details: dict[str, Any] = details

    def to_record(self) -> dict[str, Any]:
        """Плоская запись для маркера FAILED и логов."""
        return {"error": type(self).__name__, "message": self.message, **self.details}


# ==============================================================================
# Параметры задачи
# ==============================================================================

class OutOfExponentSet(SingularPlapError):
    """(p, q, N) вне открытого множества допустимых показателей."""

    def __init__(self, inequality: str, **details: Any) -> None:
        super().__init__(f"нарушено неравенство {inequality}", inequality=inequality, **details)
        self.inequality = inequality


class NonPositiveDelta(SingularPlapError):
    """δ ≤ 0."""


class NegativeLambda(SingularPlapError):
    """λ < 0."""


class ScalingNotExact(SingularPlapError):
    """Масштабирование по λ точно только для предельной чисто сингулярной задачи."""


# ==============================================================================
# Сетка и оператор
# ==============================================================================

class TooCoarse(SingularPlapError):
    """Слишком мало узлов сетки."""


class NonpositiveInterior(SingularPlapError):
    """Внутренний узел ≤ 0 там, где сингулярный член не определён."""


class NegativeRhs(SingularPlapError):
    """Отрицательная правая часть для обращения p-Лапласиана."""


class ZeroField(SingularPlapError):
    """Поле тождественно равно нулю."""


# ==============================================================================
# Решатели
# ==============================================================================

class NoConvergence(SingularPlapError):
    """Итерационный процесс исчерпал лимит итераций."""

    def __init__(self, message: str, last_value: Optional[float] = None, **details: Any) -> None:
        super().__init__(message, last_value=last_value, **details)
        self.last_value = last_value


class MeshTooCoarseNearBoundary(SingularPlapError):
    """Узел у границы далеко от граничной асимптотики."""


class NotSubSolution(SingularPlapError):
    """Неравенство для нижнего решения нарушено."""

    def __init__(self, message: str, node: int, **details: Any) -> None:
        super().__init__(message, node=node, **details)
        self.node = node


class NotSuperSolution(SingularPlapError):
    """Неравенство для верхнего решения нарушено."""


class NoSuchMu(SingularPlapError):
    """A(s) не достигает λ₀ на допустимом интервале."""


class ConvergedToDeflated(SingularPlapError):
    """Ньютон с дефляцией вернулся к уже известному решению."""


class StepUnderflow(SingularPlapError):
    """Интегратор ОДУ не смог продвинуться (жёсткость у u → 0)."""

    def __init__(self, message: str, last_r: float, last_u: float, **details: Any) -> None:
        super().__init__(message, last_r=last_r, last_u=last_u, **details)
        self.last_r = last_r
        self.last_u = last_u


# ==============================================================================
# Проверки и CLI
# ==============================================================================

class WindowTooSmall(SingularPlapError):
    """В окне подгонки слишком мало узлов."""


class PreconditionNotMet(SingularPlapError):
    """Нарушено предусловие проверки."""


class EmptyDiagram(SingularPlapError):
    """Бифуркационная диаграмма пуста."""


class ConfigInvalid(SingularPlapError):
    """Ошибка в документе конфигурации запуска."""

    def __init__(self, message: str, key: str, **details: Any) -> None:
        super().__init__(message, key=key, **details)
        self.key = key


class SolverFailure(SingularPlapError):
    """Ошибка решателя, поднятая на уровень команды CLI."""
