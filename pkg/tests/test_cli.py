import json
import subprocess
import sys

import pytest

from sldo.cli import EXIT_CONFIG, EXIT_DIVERGED, EXIT_OK, EXIT_USAGE, main
from sldo.io import default_config_path, read_trace_csv

MAIN_TEXT = default_config_path().read_text()


def test_run_quick_writes_outputs(tmp_path, capsys):
    assert main(["run", "--quick", "--out", str(tmp_path)]) == EXIT_OK
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["status"] == "completed" and summary["steps"] == 5000
    assert len(read_trace_csv(tmp_path / "trace.csv")) == 5000
    assert "completed" in capsys.readouterr().out


def test_run_twice_identical_bytes(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cfg = tmp_path / "noisy.ini"
    cfg.write_text(MAIN_TEXT.replace("t_final = 30.0", "t_final = 11.0").replace("snr_db = inf", "snr_db = 20"))
    assert main(["run", "--config", str(cfg), "--out", str(a)]) == EXIT_OK
    assert main(["run", "--config", str(cfg), "--out", str(b)]) == EXIT_OK
    assert (a / "trace.csv").read_bytes() == (b / "trace.csv").read_bytes()


def test_invalid_config_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text(MAIN_TEXT.replace("k1 = 50.0", "k1 = -1"))
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "k1" in err and "line" in err
    assert not (tmp_path / "o" / "trace.csv").exists()


def test_missing_config_is_usage_error(tmp_path):
    assert main(["run", "--config", str(tmp_path / "none.ini")]) == EXIT_USAGE


def test_bad_flag_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["run", "--observer", "kalman"])
    assert exc.value.code == EXIT_USAGE


def test_divergence_exit_code(tmp_path):
    cfg = tmp_path / "hot.ini"
    cfg.write_text(MAIN_TEXT.replace("alpha0 = 0.05", "alpha0 = 1e6").replace("t_final = 30.0", "t_final = 12.0"))
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_DIVERGED
    assert json.loads((tmp_path / "o" / "summary.json").read_text())["status"] == "diverged"


@pytest.mark.parametrize("observer, controller", [("bndo", "bndo-flc"), ("sldo-t1", "sldo-flc")])
def test_observer_flag(tmp_path, observer, controller):
    assert main(["run", "--quick", "--observer", observer, "--out", str(tmp_path)]) == EXIT_OK
    assert json.loads((tmp_path / "summary.json").read_text())["controller"] == controller


def test_benchmark_quick(tmp_path, capsys):
    import time

    t0 = time.perf_counter()
    assert main(["benchmark", "--quick", "--out", str(tmp_path)]) == EXIT_OK
    assert time.perf_counter() - t0 < 2.0 * 1.5
    report = json.loads((tmp_path / "benchmark.json").read_text())
    assert set(report["controllers"]) == {"traditional", "bndo-flc", "sldo-flc"}
    assert (tmp_path / "trace_sldo-flc.csv").exists()


def test_log_level_env(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "sldo.cli", "run", "--quick", "--out", str(tmp_path)],
        env={"SLDO_LOG_LEVEL": "INFO", "PATH": ""},
        capture_output=True,
        text=True,
    )
    assert out.returncode == 0
    assert "INFO sldo: running sldo-flc" in out.stderr
