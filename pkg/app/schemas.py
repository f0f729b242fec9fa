"""
Pydantic схемы для параметров задачи, конфигурации запуска и отчётов.

Схема = описание структуры данных.
- Что принимаем из документа конфигурации
- Что записываем в артефакты (JSON)

Численные носители с массивами numpy (сетка, поле, результаты решателей)
описаны dataclass'ами в своих модулях, здесь — только плоские записи.
"""

from pathlib import Path
from typing import Any, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from app.exceptions import ConfigInvalid
from settings import settings


SCHEMA_VERSION = "1.0"

# Индекс регуляризации, обозначающий предельную (сингулярную) задачу
LIMIT = 0


# ==============================================================================
# Параметры задачи
# ==============================================================================

class ProblemParams(BaseModel):
    """
    Параметры задачи −Δₚu = λ f_n(u) + u^q в единичном шаре.

    Значение не проверяется при создании: допустимость множества
    показателей проверяет `app.core.validate_params`.

    Attributes:
        dim_N: Размерность пространства N.
        p: Показатель p-Лапласиана.
        q: Показатель источника u^q.
        delta: Сила сингулярности δ.
        lambda_: Параметр λ.
        reg_index: Индекс регуляризации n; LIMIT (0) — сингулярная задача.
        q_term: Включён ли источник u^q (False — чисто сингулярная задача).

    Example:
        {"N": 3, "p": 2, "q": 2, "delta": 2, "lambda": 0.1, "n": 0}
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    dim_N: int = Field(..., alias="N", description="Размерность пространства")
    p: float = Field(..., description="Показатель p-Лапласиана")
    q: float = Field(..., description="Показатель источника u^q")
    delta: float = Field(..., description="Сила сингулярности δ")
    lambda_: float = Field(..., alias="lambda", description="Параметр λ")
    reg_index: int = Field(default=LIMIT, alias="n", ge=0, description="n; 0 = LIMIT")
    q_term: bool = Field(default=True, description="Источник u^q включён")

    @property
    def is_limit(self) -> bool:
        return self.reg_index == LIMIT

    @property
    def shift(self) -> float:
        """Сдвиг 1/n в f_n(u) = (u + 1/n)^(−δ); ноль для LIMIT."""
        return 0.0 if self.is_limit else 1.0 / self.reg_index

    def with_lambda(self, lam: float) -> "ProblemParams":
        return self.model_copy(update={"lambda_": float(lam)})

    def with_n(self, n: int) -> "ProblemParams":
        return self.model_copy(update={"reg_index": int(n)})

    def pure(self) -> "ProblemParams":
        """Та же задача без источника u^q."""
        return self.model_copy(update={"q_term": False})

    def to_record(self) -> dict[str, Any]:
        """Плоская запись с ключами N, p, q, delta, lambda, n, q_term."""
        return self.model_dump(by_alias=True)

    @classmethod
    def from_record(cls, record: dict[str, Any]) -> "ProblemParams":
        return cls.model_validate(record)


class DerivedExponents(BaseModel):
    """
    Производные показатели задачи.

    Attributes:
        serrin: p_* = p(N−1)/(N−p).
        scaling_exp: 1/(δ+p−1) — показатель закона ‖u‖ ~ λ^(1/(δ+p−1)).
        boundary_exp: p/(δ+p−1) — поведение u ~ (1−r)^b у границы.
        alpha_threshold: (p−1)(δ+p−1)/p² — порог для u^α ∈ W₀^{1,p}.
        p_conj: p' = p/(p−1).
    """

    model_config = ConfigDict(frozen=True)

    serrin: float
    scaling_exp: float
    boundary_exp: float
    alpha_threshold: float
    p_conj: float


# ==============================================================================
# Проверки
# ==============================================================================

CheckStatus = Literal["pass", "fail", "inconclusive", "info"]


class CheckResult(BaseModel):
    """
    Результат одной численной проверки.

    Attributes:
        name: Имя проверки (ключ сортировки отчёта).
        claim: Проверяемое свойство простыми словами.
        measured: Измеренная величина.
        tolerance: Допуск, с которым сравнивается measured.
        status: pass / fail / inconclusive / info.
        extra: Дополнительные измерения (ряды, классификации).
    """

    model_config = ConfigDict(frozen=True)

    name: str
    claim: str
    measured: float
    tolerance: float
    status: CheckStatus
    extra: dict[str, Any] = Field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "pass"


class VerificationReport(BaseModel):
    """
    Отчёт проверок: список результатов и контекст запуска.

    Attributes:
        checks: Результаты, упорядоченные по имени.
        context: Параметры задачи и описание сетки.
    """

    schema_version: str = SCHEMA_VERSION
    checks: List[CheckResult] = Field(default_factory=list)
    context: dict[str, Any] = Field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return any(c.status == "fail" for c in self.checks)

    def merged(self, *others: "VerificationReport") -> "VerificationReport":
        """Объединить отчёты детерминированно (по имени проверки)."""
        checks = list(self.checks)
        for other in others:
            checks.extend(other.checks)
        return VerificationReport(
            checks=sorted(checks, key=lambda c: c.name),
            context=self.context,
        )

    def to_table(self) -> str:
        """Человекочитаемая таблица."""
        header = f"{'check':<34} {'status':<13} {'measured':>14} {'tolerance':>12}"
        lines = [header, "-" * len(header)]
        for c in self.checks:
            lines.append(f"{c.name:<34} {c.status:<13} {c.measured:>14.6e} {c.tolerance:>12.3e}")
        return "\n".join(lines) + "\n"


# ==============================================================================
# Конфигурация запуска
# ==============================================================================

Command = Literal["solve", "ladder", "branch", "verify", "calibrate"]


class RunConfig(BaseModel):
    """
    Плоский документ конфигурации запуска.

    Неизвестные ключи — ошибка (никаких молчаливых опечаток).

    Example:
        {
            "command": "branch",
            "N": 3, "p": 2, "q": 2, "delta": 2, "n": 10,
            "lambda_count": 64
        }
    """

    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)

    command: Command

    # === Задача ===
    N: int = 3
    p: float = 2.0
    q: float = 2.0
    delta: float = 2.0
    lambda_: float = Field(default=0.1, alias="lambda", ge=0)
    n: int = Field(default=LIMIT, ge=0)
    q_term: bool = True

    # === Сетка и допуски ===
    m: int = Field(default_factory=lambda: settings.grid.m, ge=16)
    grading: float = Field(default_factory=lambda: settings.grid.grading, ge=1.0)
    tol: float = Field(default_factory=lambda: settings.solver.tol, gt=0)
    ode_rtol: float = Field(default_factory=lambda: settings.solver.ode_rtol, gt=0)
    output_dir: Path = Path("out")

    # === solve ===
    seed_kind: Literal["pure", "sub", "eigen"] = "pure"
    seed_scale: float = Field(default=1.0, gt=0)
    deflate_minimal: bool = False

    # === ladder ===
    n_list: List[int] = Field(default_factory=lambda: [2**k for k in range(11)])

    # === branch ===
    lambda_count: int = Field(default=64, ge=0)
    lambda_max: Optional[float] = Field(default=None, gt=0)
    scan_samples: int = Field(default_factory=lambda: settings.solver.scan_samples, ge=8)
    workers: int = Field(default=1, ge=1)

    # === verify ===
    negative_controls: bool = False

    def params(self) -> ProblemParams:
        return ProblemParams(
            N=self.N, p=self.p, q=self.q, delta=self.delta,
            lambda_=self.lambda_, n=self.n, q_term=self.q_term,
        )

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        """Применить переопределения из флагов CLI (None пропускается)."""
        update = {k: v for k, v in overrides.items() if v is not None}
        return self.from_document({**self.model_dump(by_alias=True), **update})

    @classmethod
    def from_document(cls, document: dict[str, Any]) -> "RunConfig":
        """
        Разобрать документ, превращая ошибки pydantic в ConfigInvalid.

        Raises:
            ConfigInvalid: с именем первого ошибочного ключа.
        """
        try:
            return cls.model_validate(document)
        except ValidationError as exc:
            first = exc.errors()[0]
            key = ".".join(str(part) for part in first["loc"]) or "<document>"
            raise ConfigInvalid(f"ошибка в ключе {key}: {first['msg']}", key=key) from exc
