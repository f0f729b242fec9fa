"""
Структура бифуркационной диаграммы: две ветви, точка поворота, барьер Λ̄.
"""

import numpy as np
import pytest

from app.branch import nonexistence_bound, sweep_lambda
from app.eigen import first_eigenpair

LANE_EMDEN_NORM = 4.35287**2


@pytest.mark.slow
def test_fold_is_bracketed_below_nonexistence_bound(model_params, grid3):
    params = model_params.with_n(10)
    eigen = first_eigenpair(grid3, params.p)
    bound = nonexistence_bound(params, eigen)
    grid = [float(x) for x in np.geomspace(1e-3, 1.5 * bound, 10)]

    diagram = sweep_lambda(params, grid, 150, eigen, delta0=LANE_EMDEN_NORM)

    counts = dict(diagram.root_counts)
    assert counts[grid[0]] == 2
    assert counts[grid[-1]] == 0
    assert diagram.fold_lambda is not None
    last_two = max(lam for lam, c in diagram.root_counts if c >= 2)
    first_empty = min(lam for lam, c in diagram.root_counts if c == 0 and lam > last_two)
    assert last_two <= diagram.fold_lambda <= first_empty
    assert diagram.fold_lambda < bound
    assert not diagram.open_right
