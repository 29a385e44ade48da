import csv
import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from qslbound import bounds
from qslbound.cli import EXIT_CONFIG, EXIT_INVARIANT, EXIT_OK, main

CONFIGS = Path(__file__).parents[1] / "configs"


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def _run(tmp_path, *args, name="out"):
    out = tmp_path / name
    return main([*args, "--out", str(out)]), out


@pytest.mark.parametrize("cmd", ["entropies", "bounds", "qsl"])
@pytest.mark.parametrize("cfg", ["fixed_axis.json", "commuting.json", "qutrit_tabulated.json"])
def test_scan_commands_succeed(tmp_path, cmd, cfg):
    code, out = _run(tmp_path, cmd, "--config", str(CONFIGS / cfg), "--steps", "64")
    assert code == EXIT_OK
    rows = _read(out / f"{cmd}.csv")
    assert rows[0][0] == "tau" and len(rows) > 1
    meta = json.loads((out / f"{cmd}.meta.json").read_text())
    assert meta["steps"] == 64 and meta["rows"] == len(rows) - 1
    assert meta["quadrature"] == "simpson" and meta["significant_digits"] == 12


def test_slack_column_recomputes_exactly(tmp_path):
    code, out = _run(tmp_path, "bounds", "--config", str(CONFIGS / "qutrit_tabulated.json"), "--steps", "64")
    assert code == EXIT_OK
    rows = _read(out / "bounds.csv")
    head = rows[0]
    i_l, i_r, i_s = head.index("lhs"), head.index("rhs"), head.index("slack")
    checked = 0
    for r in rows[1:]:
        if r[i_s] != "nan":
            assert float(r[i_s]) == float(r[i_r]) - float(r[i_l])
            checked += 1
    assert checked > 0


def test_output_is_deterministic_and_worker_independent(tmp_path):
    args = ["qsl", "--config", str(CONFIGS / "qutrit_tabulated.json"), "--steps", "32"]
    _, a = _run(tmp_path, *args, name="a")
    _, b = _run(tmp_path, *args, name="b")
    _, c = _run(tmp_path, *args, "--workers", "2", name="c")
    ref = (a / "qsl.csv").read_bytes()
    assert (b / "qsl.csv").read_bytes() == ref == (c / "qsl.csv").read_bytes()
    assert (a / "qsl.meta.json").read_bytes() == (b / "qsl.meta.json").read_bytes()


def test_convention_flag_is_recorded(tmp_path):
    _, out = _run(tmp_path, "bounds", "--config", str(CONFIGS / "fixed_axis.json"), "--steps", "32",
                  "--convention", "maintext")
    assert json.loads((out / "bounds.meta.json").read_text())["convention"] == "maintext"


@pytest.mark.parametrize("extra", [["--steps", "7"], ["--steps", "0"], ["--seed", "-3"], ["--workers", "0"]])
def test_bad_flags_exit_2(tmp_path, extra):
    code, _ = _run(tmp_path, "bounds", "--config", str(CONFIGS / "fixed_axis.json"), *extra)
    assert code == EXIT_CONFIG


def test_missing_config_exit_2(tmp_path, capsys):
    code, _ = _run(tmp_path, "bounds")
    assert code == EXIT_CONFIG
    assert "needs --config" in capsys.readouterr().err


def test_malformed_json_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"state": {"bloch": {"r": 0.5,}}}')
    code, _ = _run(tmp_path, "entropies", "--config", str(bad))
    assert code == EXIT_CONFIG
    assert "line 1, column" in capsys.readouterr().err


def test_incomplete_scenario_exit_2(tmp_path):
    code, _ = _run(tmp_path, "qsl", "--config", str(CONFIGS / "verify.json"))
    assert code == EXIT_CONFIG


def test_broken_invariant_exit_1(tmp_path, monkeypatch):
    real = bounds.phi_factor
    monkeypatch.setattr(bounds, "phi_factor", lambda kind, *a, **k: -real(kind, *a, **k))
    code, _ = _run(tmp_path, "bounds", "--config", str(CONFIGS / "fixed_axis.json"), "--steps", "32")
    assert code == EXIT_INVARIANT


def test_figures_command(tmp_path):
    cfg = tmp_path / "figs.json"
    cfg.write_text(json.dumps({"figures": ["fig1"]}))
    code, out = _run(tmp_path, "figures", "--config", str(cfg), "--steps", "64")
    assert code == EXIT_OK
    for panel in ("fig1_a", "fig1_b"):
        rows = _read(out / f"{panel}.csv")
        assert rows[0] == ["x", "y", "value"] and len(rows) == 100 * 100 + 1
        meta = json.loads((out / f"{panel}.meta.json").read_text())
        assert meta["panel"] == panel and meta["convention"] == "maintext"


def test_verify_command(tmp_path):
    cfg = tmp_path / "v.json"
    cfg.write_text(json.dumps({"seed": 5, "verify": {"instances": 4, "dims": [2], "alphas": [0.5], "taus": [1.0],
                                                     "steps": 20, "commutator_pairs": 50}}))
    code, out = _run(tmp_path, "verify", "--config", str(cfg))
    rows = _read(out / "verify.csv")
    status = {r[0]: r[-1] for r in rows[1:]}
    assert status["commutator_norm"] == "pass" and status["bound.H.forward.appendix"] == "pass"
    assert code == (EXIT_OK if all(s == "pass" for s in status.values()) else EXIT_INVARIANT)


@pytest.mark.skipif(shutil.which("qslbound") is None, reason="console script not installed")
def test_console_script(tmp_path):
    res = subprocess.run(["qslbound", "entropies", "--config", str(CONFIGS / "fixed_axis.json"),
                          "--out", str(tmp_path), "--steps", "16"], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    res = subprocess.run([sys.executable, "-m", "qslbound.cli", "bounds", "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert res.returncode == 2
