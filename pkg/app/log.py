"""
Структурное логирование через structlog.

Использование:
    from app.log import get_logger

    log = get_logger(__name__)
    log.debug("newton.step", iteration=3, residual=1e-7)
"""

import logging
import sys
from typing import Any

import structlog


def configure_logging(level: str = "INFO", json_output: bool = False) -> None:
    """
    Настроить structlog один раз на процесс.

    Вызывается только из CLI; библиотечный код лишь получает логгер.

    Args:
        level: Уровень логирования (DEBUG/INFO/WARNING/ERROR).
        json_output: JSON-рендерер вместо консольного.
    """
    renderer = (
        structlog.processors.JSONRenderer(sort_keys=True)
        if json_output
        else structlog.dev.ConsoleRenderer(colors=False)
    )
    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(getattr(logging, level.upper())),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=True,
    )


def get_logger(name: str) -> Any:
    """Логгер с привязанным именем модуля."""
    return structlog.get_logger(module=name)
