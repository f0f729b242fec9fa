"""
Конфигурация toolkit через Pydantic Settings.

Все переменные окружения валидируются при импорте модуля.
Значения по умолчанию подобраны под «настольный» масштаб расчётов,
поэтому .env не обязателен.

Использование:
    from settings import settings

    m = settings.grid.m
    cache_dir = settings.cache.dir
"""

from pathlib import Path

from pydantic import AliasChoices, Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


# ==============================================================================
# Numerical Settings
# ==============================================================================

class GridSettings(BaseSettings):
    """Настройки радиальной сетки по умолчанию."""

    model_config = SettingsConfigDict(env_prefix="GRID__")

    m: int = Field(default=1024, ge=16, description="Число ячеек сетки")
    grading: float = Field(default=3.0, ge=1.0, description="Показатель сгущения к r=1")


class SolverSettings(BaseSettings):
    """Допуски и лимиты итерационных решателей."""

    model_config = SettingsConfigDict(env_prefix="SOLVER__")

    tol: float = Field(default=1e-9, gt=0, description="Допуск масштабированной невязки")
    max_iter: int = Field(default=200, ge=1, description="Лимит итераций Ньютона")
    eps_degenerate: float = Field(
        default=1e-8,
        ge=0,
        description="Регуляризация |u'|^(p-2) — только в якобиане",
    )
    ode_rtol: float = Field(default=1e-10, gt=0, description="rtol для solve_ivp")
    ode_atol: float = Field(default=1e-12, gt=0, description="atol для solve_ivp")
    scan_samples: int = Field(default=400, ge=8, description="Точек в скане по M")


# ==============================================================================
# Cache / Logging Settings
# ==============================================================================

class CacheSettings(BaseSettings):
    """Каталог кэша калибровки (константы T и δ₀)."""

    model_config = SettingsConfigDict(populate_by_name=True)

    dir: Path = Field(
        default=Path("data") / "cache",
        validation_alias=AliasChoices("SINGULAR_PLAP_CACHE", "dir"),
        description="Каталог SQLite-кэша калибровки",
    )


class LoggingSettings(BaseSettings):
    """Настройки structlog."""

    model_config = SettingsConfigDict(env_prefix="LOG__")

    level: str = Field(default="INFO", description="Уровень логирования")
    json_output: bool = Field(default=False, description="JSON вместо консольного вывода")

    @field_validator("level")
    @classmethod
    def validate_level(cls, v: str) -> str:
        v = v.upper()
        if v not in {"DEBUG", "INFO", "WARNING", "ERROR"}:
            raise ValueError("LOG__LEVEL должен быть DEBUG/INFO/WARNING/ERROR")
        return v


# ==============================================================================
# Main Settings
# ==============================================================================

class Settings(BaseSettings):
    """
    Главный класс настроек.

    Объединяет вложенные настройки и предоставляет
    единую точку доступа к конфигурации.
    """

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_nested_delimiter="__",
        extra="ignore",
    )

    grid: GridSettings = Field(default_factory=GridSettings)
    solver: SolverSettings = Field(default_factory=SolverSettings)
    cache: CacheSettings = Field(default_factory=CacheSettings)
    log: LoggingSettings = Field(default_factory=LoggingSettings)


# ==============================================================================
# Singleton Instance
# ==============================================================================

# Создаётся один раз при импорте модуля
settings = Settings()
