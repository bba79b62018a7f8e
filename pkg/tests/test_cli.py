import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from seamrac.cli import main
from seamrac.config import parse_config
from seamrac.traceio import read_trace


@pytest.fixture
def cfg_file(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("[simulation]\nduration = 1\n")
    return path


def test_simulate_writes_outputs(tmp_path, cfg_file, capsys):
    out = tmp_path / "out"
    assert main(["simulate", str(cfg_file), "--out", str(out)]) == 0
    trace = read_trace(out / "trace.csv")
    assert len(trace) == 101
    echoed = parse_config(out / "effective_config.ini")
    assert echoed == parse_config(cfg_file)
    for name in ("tracking", "errors", "torque", "gains"):
        ET.parse(out / f"{name}.svg")
    assert "peak_e1_post" in (out / "metrics.csv").read_text()
    assert "peak_e1_post" in capsys.readouterr().out


def test_ideal_command(tmp_path, cfg_file, capsys):
    assert main(["ideal", str(cfg_file), "--out", str(tmp_path / "o")]) == 0
    assert "non-increasing" in capsys.readouterr().out


def test_sweep_command(tmp_path, cfg_file):
    grid = tmp_path / "grid.ini"
    grid.write_text("[grid]\nk1 = 20, 30\n")
    assert main(["sweep", str(cfg_file), str(grid), "--out", str(tmp_path / "s")]) == 0
    assert len((tmp_path / "s" / "sweep.csv").read_text().splitlines()) == 3


def test_lyapunov_command(capsys):
    assert main(["lyapunov", "--am", "0,1,-6,-4", "--q", "1,0,0,1"]) == 0
    out = capsys.readouterr().out
    assert "1.2083333333333333" in out and "residual" in out
    assert main(["lyapunov", "--am", "0,1,6,-4"]) == 2
    assert main(["lyapunov", "--am", "0,1,6"]) == 2


def test_config_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[simulation]\ndt_control = 0.01\ndt_physics = 3e-4\n")
    assert main(["simulate", str(bad)]) == 2
    assert "dt_multiple" in capsys.readouterr().err
    assert main(["simulate", str(tmp_path / "missing.ini")]) == 2


def test_usage_error_exit_2():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2


def test_run_failure_exit_1(tmp_path):
    path = tmp_path / "crash.ini"
    path.write_text("[reference]\nkind = step\nvalue = -1.2\nt_step = 0.5\n[simulation]\nduration = 5\n")
    assert main(["simulate", str(path), "--out", str(tmp_path / "o")]) == 1
    assert (tmp_path / "o" / "trace.csv").exists()


def test_validate_command(capsys):
    assert main(["validate"]) == 0
    out = capsys.readouterr().out
    assert "[FAIL]" not in out and "warning" in out


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "seamrac", "lyapunov", "--am=-1,0,0,-1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "0.5" in proc.stdout
