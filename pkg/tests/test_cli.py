import csv
import io
import json

import pytest

from pmerepeater import cli
from pmerepeater.config import preset_text


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write_config(tmp_path, **protocol):
    raw = json.loads(preset_text("paper"))
    raw["protocol"].update(protocol)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(raw))
    return str(path)


def test_analytic_csv(capsys):
    code, out, _ = run(capsys, "analytic", "--output", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 1
    assert out.splitlines()[0] == ",".join(cli.ANALYTIC_COLUMNS)
    row = rows[0]
    assert float(row["T_tot"]) == pytest.approx(2251, rel=5e-3)
    assert float(row["delta_F"]) == 3.2e-4
    assert float(row["R_sn"]) == pytest.approx(10)


def test_analytic_json_and_pretty(capsys):
    code, out, _ = run(capsys, "analytic", "--output", "json")
    assert code == 0
    (rec,) = json.loads(out)
    assert list(rec) == list(cli.ANALYTIC_COLUMNS)
    code, out, _ = run(capsys, "analytic")
    assert code == 0 and "T_tot" in out.splitlines()[0]


def test_missing_field_is_reported(capsys, tmp_path):
    raw = json.loads(preset_text("paper"))
    del raw["protocol"]["eta_d"]
    path = tmp_path / "c.json"
    path.write_text(json.dumps(raw))
    code, _, err = run(capsys, "analytic", "--config", str(path))
    assert code != 0 and "eta_d" in err


def test_env_var_config(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("PMEREPEATER_CONFIG", write_config(tmp_path, n=3))
    code, out, _ = run(capsys, "analytic", "--output", "json")
    assert json.loads(out)[0]["n"] == 3


def test_sweep_rows(capsys):
    code, out, _ = run(capsys, "sweep", "--axis", "n", "--values", "2..6", "--output", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [int(r["n"]) for r in rows] == [2, 3, 4, 5, 6]


def test_sweep_distance_monotone(capsys):
    code, out, _ = run(capsys, "sweep", "--axis", "L_n", "--values", "500,1000,2000,2500", "--output", "json")
    times = [r["T_tot"] for r in json.loads(out)]
    assert times == sorted(times)


@pytest.mark.parametrize("argv", [("--axis", "n", "--values", ""), ("--axis", "bogus", "--values", "1"), ("--axis", "n")])
def test_sweep_errors(capsys, argv):
    code, _, err = run(capsys, "sweep", *argv)
    assert code != 0 and err.startswith("error:")


def test_simulate_deterministic_files(tmp_path, capsys):
    cfg = write_config(tmp_path, n=2)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert run(capsys, "simulate", "--config", cfg, "--seed", "42", "--trials", "3000", "--output", "csv", "-o", str(path))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    rows = list(csv.DictReader(io.StringIO(a.read_text())))
    assert [r["level"] for r in rows] == ["0", "1", "2"]


def test_simulate_trials_zero(capsys):
    code, _, err = run(capsys, "simulate", "--trials", "0")
    assert code != 0 and "trials" in err


def test_verify_default_and_grid(capsys):
    code, out, _ = run(capsys, "verify", "--output", "json", "--phase-grid", "3")
    rows = json.loads(out)
    assert code == 0
    assert len(rows) == 4 * 3 + 6
    assert all(r["passed"] for r in rows)
    for r in rows:
        if r["check"].startswith(("local_pme", "basic_link", "swap", "teleport")):
            assert r["metric"] < 1e-10


def test_verify_blind_detectors(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "--config", write_config(tmp_path, eta_d=0.0), "--output", "json", "--phase-grid", "2")
    rows = {r["check"]: r for r in json.loads(out)}
    assert code == 0
    for key in ("probability_p_r", "probability_p_b", "probability_p_i"):
        assert rows[key]["metric"] == 0
    assert all(r["passed"] for r in rows.values())


def test_verify_failure_exit(capsys, monkeypatch):
    from pmerepeater import verify

    monkeypatch.setattr(verify, "hom_check", lambda: verify.Check("hom_zero_coincidence", False, 1.0))
    code, _, err = run(capsys, "verify", "--phase-grid", "1")
    assert code == 1 and "hom_zero_coincidence" in err
