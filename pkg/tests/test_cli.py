"""Command-line entry points: run, sweep, verify, fit."""

import json

import pytest

from adiaband.cli import main
from adiaband.harness import CSV_COLUMNS, read_csv, render_csv


def _write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def test_verify_command(capsys):
    rc = main(["verify", "--filter", "lemma2_offdiag"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "PASS  lemma2_offdiag" in out
    assert "OK: 1/1 checks passed" in out


def test_run_command_writes_csv(tmp_path, capsys):
    cfg = _write_config(tmp_path, "run.json", {
        "problem": {"kind": "grover", "n": 2, "representation": "reduced"},
        "tau": 5.0, "grid": 65})
    out_csv = str(tmp_path / "rows.csv")
    rc = main(["run", "--config", cfg, "--output", out_csv])
    captured = capsys.readouterr()
    assert rc == 0
    assert f"wrote 65 rows to {out_csv}" in captured.err
    assert "max proj distance" in captured.err
    rows = read_csv(out_csv)
    assert len(rows) == 65
    assert list(rows[0]) == list(CSV_COLUMNS)
    assert float(rows[-1]["s"]) == 1.0
    assert float(rows[-1]["A_tight"]) > 0.0


def test_run_command_stdout_csv(tmp_path, capsys):
    cfg = _write_config(tmp_path, "run.json", {
        "problem": {"kind": "grover", "n": 2},
        "tau": 5.0, "grid": 65, "bounds": [], "identity_checks": False})
    rc = main(["run", "--config", cfg])
    captured = capsys.readouterr()
    assert rc == 0
    lines = captured.out.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 66


def test_bad_config_exits_2(tmp_path, capsys):
    cfg = _write_config(tmp_path, "bad.json", {
        "problem": {"kind": "grover", "n": 2}, "taau": 10.0})
    rc = main(["run", "--config", cfg])
    assert rc == 2
    assert capsys.readouterr().err.startswith("error:")
    rc = main(["run", "--config", str(tmp_path / "missing.json")])
    assert rc == 2


def test_sweep_command_reports_failures(tmp_path, capsys):
    cfg = _write_config(tmp_path, "sweep.json", {
        "problem": {"kind": "grover", "n": [2, 13]},
        "tau": 5.0, "grid": 65, "bounds": [], "identity_checks": False})
    rc = main(["sweep", "--config", cfg])
    captured = capsys.readouterr()
    assert rc == 1
    assert "failed:" in captured.err
    assert "DimensionTooLarge" in captured.err
    assert captured.out.splitlines()[0].startswith("run_id,problem,")


def test_fit_command_summary_csv(tmp_path, capsys):
    cols = ("tau", "max_transition_prob", "A_tight_end", "status")
    rows = [{"tau": t, "max_transition_prob": 0.01 * (t / 100.0) ** -2.0,
             "A_tight_end": 0.1, "status": "ok"}
            for t in (100.0, 200.0, 400.0, 800.0)]
    rows.append({"tau": 50.0, "max_transition_prob": 0.9,
                 "A_tight_end": 0.7, "status": "ok"})
    path = tmp_path / "summary.csv"
    path.write_text(render_csv(cols, rows))
    rc = main(["fit", "--input", str(path), "--y", "transition_prob"])
    out = capsys.readouterr().out
    assert rc == 0
    assert out.startswith("slope=-2 ")
    assert "points=4" in out
    rc = main(["fit", "--input", str(path), "--y", "transition_prob",
               "--cutoff", "0"])
    assert rc == 0
    assert "points=5" in capsys.readouterr().out


def test_fit_command_aggregates_grid_rows(tmp_path, capsys):
    cols = ("run_id", "tau", "s", "proj_distance", "A_tight")
    rows = []
    for k, tau in enumerate((100.0, 200.0, 400.0, 800.0)):
        for s, frac in ((0.0, 0.1), (0.5, 1.0), (1.0, 0.2)):
            rows.append({"run_id": f"r{k}", "tau": tau, "s": s,
                         "proj_distance": 10.0 * frac / tau,
                         "A_tight": 0.02 * (1.0 + s)})
    path = tmp_path / "rows.csv"
    path.write_text(render_csv(cols, rows))
    rc = main(["fit", "--input", str(path)])
    out = capsys.readouterr().out
    assert rc == 0
    assert out.startswith("slope=-1 ")
    assert "points=4" in out


def test_unknown_subcommand_and_bare_call():
    with pytest.raises(SystemExit) as exc:
        main(["trot"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2
