import json
import subprocess
import sys

import numpy as np
import pytest

from icnash.cli import main


def write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return str(p)


BASE = {"preset": "example1", "games": ["A"], "snr_db_list": [10],
        "solver": {"max_phase1": 1000}}


def test_sweep_success(tmp_path):
    out = tmp_path / "rows.csv"
    assert main(["sweep", "--config", write(tmp_path, BASE), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "# noise=1 log=nats" and len(lines) == 2 + 4


def test_output_path_from_config(tmp_path):
    cfg = dict(BASE, output_path=str(tmp_path / "x.csv"))
    assert main(["sweep", "--config", write(tmp_path, cfg)]) == 0
    assert (tmp_path / "x.csv").exists()


@pytest.mark.filterwarnings("ignore::icnash.errors.RestartLimitExceeded")
def test_nonconverged_exit_code(tmp_path, capsys):
    cfg = dict(BASE, preset="example2",
               solver={"max_phase1": 5, "max_restarts": 0, "max_phase2": 2})
    assert main(["sweep", "--config", write(tmp_path, cfg)]) == 2
    assert "converged" in capsys.readouterr().out


def test_config_errors_exit_one(tmp_path):
    bad = write(tmp_path, '{"preset": "example1", "games": ["A"],\n "snr_db_list": [1], "x": 1}')
    assert main(["sweep", "--config", bad]) == 1
    assert main(["stats", "--config", str(tmp_path / "missing.json")]) == 1
    cfg = dict(BASE, snr_db_list=[])
    assert main(["solve", "--config", write(tmp_path, cfg)]) == 1
    assert main(["sweep", "--config", write(tmp_path, BASE),
                 "--out", str(tmp_path / "no" / "dir.csv")]) == 1


def test_solve_then_check(tmp_path, capsys):
    cfg = write(tmp_path, dict(BASE, games=["I", "A"],
                               solver={"max_phase1": 1000,
                                       "I": {"max_phase1": 10**6, "epsilon": 1e-5}}))
    prof = tmp_path / "p.json"
    assert main(["solve", "--config", cfg, "--game", "A", "--snr-db", "5",
                 "--profile-out", str(prof), "--seed", "3"]) == 0
    saved = json.loads(prof.read_text())
    assert saved["game"] == "A" and np.asarray(saved["powers"]).shape == (3, 512)
    capsys.readouterr()
    assert main(["check", "--config", cfg, "--profile", str(prof)]) == 0
    assert "is_ne=true" in capsys.readouterr().out
    saved["powers"] = (np.asarray(saved["powers"]) * 0 + 10 ** 0.5).tolist()
    prof.write_text(json.dumps(saved))
    assert main(["check", "--config", cfg, "--profile", str(prof)]) == 2
    assert main(["solve", "--config", cfg]) == 0


def test_stats_command(tmp_path):
    cfg = write(tmp_path, {"preset": "example3", "games": ["A"], "snr_db_list": [5],
                           "trials": 3, "seed": 1})
    out = tmp_path / "s.csv"
    assert main(["stats", "--config", cfg, "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 3


def test_module_entry_point(tmp_path):
    cfg = write(tmp_path, {"preset": "example3", "games": ["LB"], "snr_db_list": [0]})
    r = subprocess.run([sys.executable, "-m", "icnash", "sweep", "--config", cfg,
                        "--log-level", "ERROR"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.count("\n") == 2 + 3
    with pytest.raises(SystemExit):
        main(["frobnicate"])
