"""
SQLAlchemy модели кэша калибровки.

Таблицы:
    - CalibrationRecord: измеренные константы (T, δ₀) по ключу параметров
"""

from datetime import datetime

from sqlalchemy import Column, DateTime, Float, Integer, String, UniqueConstraint

from app.database import Base


class CalibrationRecord(Base):
    """
    Измеренная константа калибровки.

    Таблица: calibration

    Attributes:
        kind: "T" (sup-норма решения предельной задачи при λ = 1)
            или "delta0" (наименьший корень калибра при λ = 0).
        dim_N, p, q, delta: Параметры задачи (неиспользуемые — 0).
        m, grading: Сетка (для delta0 — 0: стрельба не зависит от сетки).
        value: Значение константы.
        created_at: Время измерения.

    Example:
        >>> db.add(CalibrationRecord(kind="T", dim_N=3, p=2.0, q=0.0,
        ...                          delta=2.0, m=1024, grading=3.0, value=0.61))
    """

    __tablename__ = "calibration"
    __table_args__ = (
        UniqueConstraint("kind", "dim_N", "p", "q", "delta", "m", "grading", name="uq_calibration_key"),
    )

    id = Column(Integer, primary_key=True, index=True)
    kind = Column(String(16), nullable=False, index=True)
    dim_N = Column(Integer, nullable=False)
    p = Column(Float, nullable=False)
    q = Column(Float, nullable=False, default=0.0)
    delta = Column(Float, nullable=False, default=0.0)
    m = Column(Integer, nullable=False, default=0)
    grading = Column(Float, nullable=False, default=0.0)
    value = Column(Float, nullable=False)
    created_at = Column(DateTime, nullable=False, default=datetime.utcnow)

    def __repr__(self) -> str:
        """Строковое представление для отладки."""
        return f"<CalibrationRecord(kind={self.kind}, N={self.dim_N}, p={self.p}, value={self.value})>"
