import csv
import io
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from hybridcz.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def run_cli(tmp_path, command, text, *extra):
    cfg = tmp_path / "run.conf"
    cfg.write_text(text)
    out = tmp_path / f"{command}.csv"
    code = main([command, "--config", str(cfg), "--out", str(out), *extra])
    return code, out.read_text() if out.exists() else None


def table(text):
    body = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def test_header_embeds_config_and_conventions(tmp_path):
    code, text = run_cli(tmp_path, "modes", "cat.alpha0 = 1.5\n", "--jobs", "1")
    assert code == EXIT_OK
    lines = text.splitlines()
    assert lines[0] == "# sim modes"
    assert "# config: cat.alpha0 = 1.5" in lines
    assert any(line.startswith("# convention: ") for line in lines)


def test_lossless_truth_table(tmp_path):
    code, text = run_cli(tmp_path, "truth-table", (CONFIGS / "lossless.conf").read_text(),
                         "--jobs", "1", "--oracle-check")
    assert code == EXIT_OK
    rows = table(text)
    assert [r["output_sign"] for r in rows] == ["+", "-", "+", "+"]
    assert all(abs(float(r["fidelity"]) - 1) < 1e-9 for r in rows)
    assert all(r["oracle_agrees"] == "true" for r in rows)


def test_modes_lossless_flat_output_equals_input(tmp_path):
    code, text = run_cli(tmp_path, "modes", (CONFIGS / "lossless.conf").read_text(), "--jobs", "1")
    rows = table(text)
    inp = np.array([float(r["input_re"]) for r in rows])
    for col in ("optical_L_re", "optical_R_re"):
        assert np.allclose([float(r[col]) for r in rows], inp, atol=1e-12)


def test_modes_attenuates_l_more_than_r(tmp_path):
    code, text = run_cli(tmp_path, "modes", "", "--jobs", "1")
    rows = table(text)
    peak = {c: max(abs(float(r[c])) for r in rows) for c in ("optical_L_re", "optical_R_re")}
    assert peak["optical_L_re"] < peak["optical_R_re"]


def test_linearization_rows(tmp_path):
    code, text = run_cli(tmp_path, "validate-linearization", "linearization.alphas = 0, 0.5, 1\n",
                         "--jobs", "1")
    rows = table(text)
    assert all(float(v) == 0 for v in rows[0].values())
    est = [float(r["estimate_2_kappa_gamma_s_alpha2_over_g_m2"]) for r in rows]
    assert np.isclose(est[2], 4 * est[1])


def test_single_point_sweep_matches_direct_evaluation(tmp_path):
    from hybridcz.config import resolve
    from hybridcz.fidelity import average_fidelity
    from hybridcz.model import build_model, channel_overlaps
    code, text = run_cli(tmp_path, "sweep", "", "--jobs", "1")
    rows = table(text)
    assert len(rows) == 1
    direct = average_fidelity(channel_overlaps(build_model(resolve({}))))[0]
    assert float(rows[0]["f_avg"]) == pytest.approx(direct, rel=1e-11)


def test_config_error_exit_code(tmp_path, capsys):
    code, _ = run_cli(tmp_path, "truth-table", "cqed.kapa = 1\n")
    assert code == EXIT_CONFIG
    assert "did you mean" in capsys.readouterr().err
    assert main(["modes", "--config", str(tmp_path / "missing.conf")]) == EXIT_CONFIG
    code, _ = run_cli(tmp_path, "modes", "", "--jobs", "0")
    assert code == EXIT_CONFIG


def test_numerical_failure_exit_code(tmp_path, capsys):
    code, text = run_cli(tmp_path, "truth-table", "eit_L.gamma_bc_over_2pi_khz = 1e4\n", "--jobs", "1")
    assert code == EXIT_NUMERICAL
    assert text is None
    assert "numerical failure" in capsys.readouterr().err


@pytest.mark.parametrize("command,text", [
    ("truth-table", "run.oracle_check = true\n"),
    ("sweep", "sweep.axis1 = cqed.kappa_s_over_kappa, 1e-4, 1e-2, 2, log\n"),
    ("validate-linearization", "linearization.alphas = 0.5, 1\n"),
])
def test_worker_count_does_not_change_output(tmp_path, command, text):
    _, serial = run_cli(tmp_path, command, text, "--jobs", "1")
    _, parallel = run_cli(tmp_path, command, text, "--jobs", "3")
    assert serial == parallel


def test_console_entry_point(tmp_path):
    cfg = tmp_path / "run.conf"
    cfg.write_text("")
    res = subprocess.run([sys.executable, "-m", "hybridcz.cli", "modes", "--config", str(cfg)],
                         capture_output=True, text=True, check=True)
    assert res.stdout.startswith("# sim modes")
