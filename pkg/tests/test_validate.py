from dataclasses import replace

import numpy as np
import pytest

from seamrac.config import RunConfig
from seamrac.validate import check_supplied_p, five_point_derivative, run_validation


def test_suite_passes_on_defaults():
    results = run_validation()
    assert [r.name for r in results if not r.ok] == []
    names = {r.name for r in results}
    assert {"lyapunov_solve", "supplied_P", "geometry_derivatives", "backstepping_cancellation",
            "matching", "clf_monotone", "rk4_order"} <= names


def test_fixed_p_is_reported():
    result = check_supplied_p(RunConfig())
    assert result.ok
    assert "-0.0625" in result.detail
    assert "not a Lyapunov solution" in result.warning
    cfg = RunConfig()
    cfg = replace(cfg, controller=replace(cfg.controller, use_fixed_P=True))
    assert not check_supplied_p(cfg).ok


def test_five_point_derivative_exact_on_quartics():
    t = np.arange(12) * 0.1
    y = 3 * t ** 4 - t ** 3 + 2 * t - 5
    assert five_point_derivative(y, 0.1) == pytest.approx(12 * t ** 3 - 3 * t ** 2 + 2, abs=1e-10)
    with pytest.raises(ValueError):
        five_point_derivative([1.0, 2.0], 0.1)
