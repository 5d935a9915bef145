from __future__ import annotations

import json

import pytest

from scrambled.cli import run_cli


def test_build_then_verify(tmp_path, capsys):
    out = tmp_path / "t.json"
    assert run_cli(["build", "--system", "doubling", "--stages", "1", "--out", str(out)]) == 0
    assert run_cli(["verify", str(out)]) == 0
    report = tmp_path / "r.json"
    assert run_cli(["verify", str(out), "--all-pairs", "--tracked", "--report", str(report)]) == 0
    assert json.loads(report.read_text())["verdict"] == "certified"


def test_lemma2_control_refuted():
    assert run_cli(["lemma2-check", "--system", "rot:1/3", "--pairs", "default", "--horizon", "60"]) == 1
    assert run_cli(["lemma2-check", "--system", "tent"]) == 0


def test_hit_set_prints_times(capsys):
    assert run_cli(["hit-set", "--system", "shift2", "--source", "cyl:0", "--target", "cyl:1", "--horizon", "5"]) == 0
    assert capsys.readouterr().out.strip() == "{1,2,3,4,5}"


def test_hit_set_point_source(capsys):
    assert run_cli(["hit-set", "--system", "doubling", "--source", "pt:0", "--target", "(1/4,3/4)",
                    "--horizon", "10", "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)["times"] == []


def test_usage_errors(capsys):
    assert run_cli(["build", "--system", "doubling", "--stages", "4"]) == 2
    assert "--stages" in capsys.readouterr().err
    assert run_cli(["hit-set", "--system", "nope", "--source", "(0,1)", "--target", "(0,1)"]) == 2
    assert run_cli(["hit-set", "--system", "doubling", "--source", "(0,x)", "--target", "(0,1)"]) == 2
    assert run_cli(["frobnicate"]) == 2
    assert run_cli(["build", "--system", "doubling", "--stages", "2", "--enum", "full"]) == 2


def test_schema_and_mode_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"schema": "nope"}')
    assert run_cli(["verify", str(bad)]) == 2
    assert "SCHEMA_ERROR" in capsys.readouterr().err
    out = tmp_path / "t.json"
    run_cli(["build", "--system", "tent", "--stages", "1", "--out", str(out)])
    assert run_cli(["verify", str(out), "--invariant", "0,1"]) == 2
    assert "MODE_ERROR" in capsys.readouterr().err


def test_horizon_exit_code():
    assert run_cli(["--horizon-cap", "4", "steer", "--system", "doubling", "--box", "[0,1/64]",
                    "--target", "(1/2,9/16)"]) == 3


def test_steer_and_rigidity(capsys):
    assert run_cli(["steer", "--system", "doubling", "--box", "[0,1/4]", "--target", "(7/24,3/8)", "--format", "json"]) == 0
    step = json.loads(capsys.readouterr().out)
    assert step["time"] == 1 and step["refined"][0]["pieces"] == [[5, 32, 17, 96]]
    assert run_cli(["rigidity", "--system", "tent", "--n", "1", "--format", "json"]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["gap"] == [1, 1] and obj["delta_lower"] == [1, 1]


def test_report_plot(tmp_path):
    out = tmp_path / "t.json"
    run_cli(["build", "--system", "shift2", "--stages", "1", "--out", str(out)])
    plot = tmp_path / "p.csv"
    assert run_cli(["report", str(out), "--plot", str(plot)]) == 0
    lines = plot.read_text().splitlines()
    assert lines[0] == "pair,time,kind,inf_distance,sup_distance" and len(lines) > 1


def test_list_systems(capsys):
    assert run_cli(["list-systems", "--format", "json"]) == 0
    ids = [r["id"] for r in json.loads(capsys.readouterr().out)["systems"]]
    assert ids == ["doubling", "tent", "shift2", "rot:p/q"]


def test_build_bytes_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run_cli(["build", "--system", "tent", "--stages", "2", "--out", str(a)])
    run_cli(["build", "--system", "tent", "--stages", "2", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("field", ["geometry", "time"])
def test_single_byte_corruption(tmp_path, capsys, field):
    out = tmp_path / "t.json"
    run_cli(["build", "--system", "doubling", "--stages", "1", "--out", str(out)])
    text = out.read_text()
    anchor = '"pieces":[[' if field == "geometry" else '"time":'
    positions = []
    start = 0
    while (pos := text.find(anchor, start)) != -1:
        positions.append(pos + len(anchor))
        start = pos + 1
    for pos in positions[::7]:
        digit = text[pos]
        assert digit.isdigit()
        bad = text[:pos] + str((int(digit) + 1) % 10) + text[pos + 1:]
        (tmp_path / "c.json").write_text(bad)
        assert run_cli(["verify", str(tmp_path / "c.json")]) in (1, 2)
