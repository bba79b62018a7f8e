import math

import pytest

from conftest import with_sim
from seamrac.errors import ParseError
from seamrac.sim import metrics, run_closed_loop
from seamrac.sweep import apply_cell, grid_cells, parse_grid_text, run_sweep, table_columns


def test_single_cell_reproduces_single_run():
    cfg = with_sim(duration=1.0)
    rows = run_sweep(cfg, {"k1": [30.0]})
    single = metrics(run_closed_loop(cfg), 2.0)
    assert rows[0]["status"] == "ok"
    for name, value in single.items():
        assert rows[0][name] == value or (math.isnan(value) and math.isnan(rows[0][name]))


def test_grid_order_is_deterministic():
    cells = list(grid_cells({"k2": [1.0, 2.0], "gamma_x11": [10.0, 20.0]}))
    assert cells == [{"gamma_x11": 10.0, "k2": 1.0}, {"gamma_x11": 10.0, "k2": 2.0},
                     {"gamma_x11": 20.0, "k2": 1.0}, {"gamma_x11": 20.0, "k2": 2.0}]
    with pytest.raises(ValueError):
        list(grid_cells({"mass": [1.0]}))


def test_cell_substitution():
    cfg = apply_cell(with_sim(), {"gamma_x11": 16000.0, "gamma_x22": 10.0, "gamma_theta": 5.0,
                                  "gamma_r": 100.0, "k1": 5.0, "k2": 7.0})
    a = cfg.adaptation
    assert a.gamma_x == ((16000.0, 0.0), (0.0, 10.0))
    assert a.gamma_theta == ((5.0, 0.0), (0.0, 5.0))
    assert (a.gamma_r, cfg.backstepping.k1, cfg.backstepping.k2) == (100.0, 5.0, 7.0)


def test_failed_cells_are_recorded_and_sweep_continues():
    rows = run_sweep(with_sim(duration=0.5), {"k1": [-1.0, 30.0]})
    assert rows[0]["status"] == "error" and "k1" in rows[0]["error"]
    assert math.isnan(rows[0]["peak_e1_post"])
    assert rows[1]["status"] == "ok"


def test_parallel_equals_serial():
    cfg = with_sim(duration=1.0)
    grid = {"gamma_x11": [1000.0, 4000.0], "k2": [10.0, 20.0]}
    assert run_sweep(cfg, grid, workers=1) == run_sweep(cfg, grid, workers=3)


def test_grid_file_grammar():
    grid = parse_grid_text("[grid]\ngamma_x11 = 1000, 4000, 16000\nk1 = 30\n")
    assert grid == {"gamma_x11": [1000.0, 4000.0, 16000.0], "k1": [30.0]}
    assert table_columns(grid)[:3] == ["index", "gamma_x11", "k1"]
    for bad in ("[grid]\nmass = 1\n", "[grid]\nk1 = a\n", "[other]\nk1 = 1\n", "[grid]\n"):
        with pytest.raises(ParseError):
            parse_grid_text(bad)


def test_grid_file_allows_trailing_comments():
    grid = parse_grid_text("[grid]\ngamma_theta = 25, 50   # both diagonal entries\nk1 = 20\n")
    assert grid == {"gamma_theta": [25.0, 50.0], "k1": [20.0]}
