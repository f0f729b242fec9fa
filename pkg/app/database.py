"""
Подключение к SQLite-кэшу калибровки.

Один SQLite-файл на каталог кэша, движки переиспользуются по пути.
Файл calibration.db лежит в каталоге SINGULAR_PLAP_CACHE
(по умолчанию data/cache/).

Использование:
    from app.database import session_scope

    with session_scope() as db:
        db.query(CalibrationRecord).all()
"""

from contextlib import contextmanager
from pathlib import Path
from typing import Generator, Optional

from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import Session, declarative_base, sessionmaker

from settings import settings

# Декларативная база таблиц кэша
Base = declarative_base()

DATABASE_FILE = "calibration.db"


# ==============================================================================
# Движок и сессии
# ==============================================================================

_engines: dict[Path, Engine] = {}


def database_path(cache_dir: Optional[Path] = None) -> Path:
    """Путь к файлу кэша в каталоге cache_dir (или из настроек)."""
    return Path(cache_dir if cache_dir is not None else settings.cache.dir) / DATABASE_FILE


def get_engine(cache_dir: Optional[Path] = None) -> Engine:
    """
    Движок для каталога кэша; создаётся один раз на каталог.

    Каталог и таблицы создаются при первом обращении.
    """
    path = database_path(cache_dir)
    engine = _engines.get(path)
    if engine is None:
        # Создаём папку кэша если её нет
        path.parent.mkdir(parents=True, exist_ok=True)
        engine = create_engine(
            f"sqlite:///{path}",
            connect_args={"check_same_thread": False},  # воркеры пула
            echo=False,
        )
        init_db(engine)
        _engines[path] = engine
    return engine


@contextmanager
def session_scope(cache_dir: Optional[Path] = None) -> Generator[Session, None, None]:
    """
    Сессия с коммитом при успехе и откатом при ошибке.

    Yields:
        Session: Сессия SQLAlchemy.
    """
    factory = sessionmaker(autocommit=False, autoflush=False, bind=get_engine(cache_dir))
    db = factory()
    try:
        yield db
        db.commit()
    except Exception:
        db.rollback()
        raise
    finally:
        db.close()


def init_db(engine: Engine) -> None:
    """Создать все таблицы, если их ещё нет."""
    # Импортируем модели чтобы SQLAlchemy знал о них
    from app import models  # noqa: F401

    Base.metadata.create_all(bind=engine)
