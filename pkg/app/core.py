"""
Параметры задачи и арифметика показателей.

Здесь проверяются стандартные предположения о показателях:
    1 < p < N,   p − 1 < q < p_* − 1,   p_* = p(N−1)/(N−p),
    δ > 0,       λ ≥ 0.

Использование:
    from app.core import validate_params, derived_exponents

    params = validate_params(ProblemParams(N=3, p=2, q=2, delta=2, lambda_=0.1))
    exps = derived_exponents(params)
"""

from app.exceptions import (
    NegativeLambda,
    NonPositiveDelta,
    OutOfExponentSet,
    ScalingNotExact,
)
from app.grid import Field
from app.schemas import LIMIT, DerivedExponents, ProblemParams

__all__ = ["LIMIT", "validate_params", "derived_exponents", "serrin_exponent", "scale_field"]


def serrin_exponent(dim_N: int, p: float) -> float:
    """p_* = p(N−1)/(N−p); определён только при p < N."""
    return p * (dim_N - 1) / (dim_N - p)


def validate_params(raw: ProblemParams) -> ProblemParams:
    """
    Проверить, что параметры лежат в допустимом множестве.

    Неравенства строгие, без допуска: множество показателей открыто.

    Args:
        raw: Параметры задачи.

    Returns:
        ProblemParams: Тот же объект без изменений.

    Raises:
        NonPositiveDelta: δ ≤ 0.
        NegativeLambda: λ < 0.
        OutOfExponentSet: С именем нарушенного неравенства.
    """
    if not raw.delta > 0:
        raise NonPositiveDelta(f"δ должно быть > 0, получено {raw.delta}", delta=raw.delta)
    if raw.lambda_ < 0:
        raise NegativeLambda(f"λ должно быть ≥ 0, получено {raw.lambda_}", lambda_=raw.lambda_)

    N, p, q = raw.dim_N, raw.p, raw.q
    if N < 2:
        raise OutOfExponentSet("N >= 2", N=N)
    if not p > 1:
        raise OutOfExponentSet("1 < p", p=p)
    if not p < N:
        raise OutOfExponentSet("p < N", p=p, N=N)
    if not q > p - 1:
        raise OutOfExponentSet("p - 1 < q", p=p, q=q)

    serrin = serrin_exponent(N, p)
    if not q < serrin - 1:
        # Верхняя граница: показатель Серрина
        raise OutOfExponentSet("q < p_* - 1 (Serrin exponent)", q=q, serrin=serrin)
    return raw


def derived_exponents(params: ProblemParams) -> DerivedExponents:
    """Производные показатели по замкнутым формулам."""
    N, p, delta = params.dim_N, params.p, params.delta
    return DerivedExponents(
        serrin=serrin_exponent(N, p),
        scaling_exp=1.0 / (delta + p - 1.0),
        boundary_exp=p / (delta + p - 1.0),
        alpha_threshold=(p - 1.0) * (delta + p - 1.0) / p**2,
        p_conj=p / (p - 1.0),
    )


def scale_field(u: Field, lambda_from: float, lambda_to: float, params: ProblemParams) -> Field:
    """
    Перенести решение предельной чисто сингулярной задачи с λ на λ'.

    Оператор (p−1)-однороден, источник λu^(−δ) — (−δ)-однороден, поэтому
    u_{λ'} = (λ'/λ)^(1/(δ+p−1)) · u_λ точно.

    Raises:
        ScalingNotExact: Для конечного n или включённого u^q.
        NegativeLambda: Если λ или λ' не положительны.
    """
    if params.reg_index != LIMIT:
        raise ScalingNotExact(
            "сдвиг 1/n нарушает однородность", reg_index=params.reg_index
        )
    if params.q_term:
        raise ScalingNotExact("источник u^q нарушает однородность", q=params.q)
    if lambda_from <= 0 or lambda_to <= 0:
        raise NegativeLambda(
            "масштабирование требует λ > 0", lambda_from=lambda_from, lambda_to=lambda_to
        )
    if lambda_from == lambda_to:
        return u
    factor = (lambda_to / lambda_from) ** derived_exponents(params).scaling_exp
    return u.with_values(factor * u.values)
