"""
Общие фикстуры: сетки, наборы параметров и изолированный кэш калибровки.
"""

import pytest

from app.grid import build_grid
from app.schemas import LIMIT, ProblemParams
from settings import settings


@pytest.fixture(autouse=True)
def isolated_cache(tmp_path, monkeypatch):
    """Каждый тест пишет кэш калибровки в свой временный каталог."""
    cache_dir = tmp_path / "cache"
    monkeypatch.setattr(settings.cache, "dir", cache_dir)
    return cache_dir


@pytest.fixture
def grid3():
    """Сгущённая сетка в R³ для быстрых решений."""
    return build_grid(256, 3.0, 3)


@pytest.fixture
def fine_grid3():
    return build_grid(1024, 3.0, 3)


@pytest.fixture
def model_params():
    """(N, p, q, δ) = (3, 2, 2, 2) — модельная задача с двумя ветвями."""
    return ProblemParams(N=3, p=2.0, q=2.0, delta=2.0, lambda_=0.1, n=LIMIT)


@pytest.fixture
def pure_params(model_params):
    return model_params.pure()
