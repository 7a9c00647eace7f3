import json

import pytest

from heegner_lab.cli import RunConfig, main


def run(capsys, *argv):
    code = main(list(argv))
    return code, json.loads(capsys.readouterr().out)


def test_classgroup_order(capsys):
    code, rep = run(capsys, "classgroup", "--dK", "-23")
    assert code == 0 and rep["passed"]
    assert rep["schemaVersion"] == 1
    assert rep["results"]["classGroup"]["dK"] == -23
    assert rep["assertions"][0]["h"] == 3


def test_rejects_p_two(capsys):
    code, rep = run(capsys, "heegner-check", "--p", "2")
    assert code == 2 and rep["rejected"]
    assert rep["problems"]


def test_rejects_non_heegner_level(capsys):
    # 7 is inert in Q(i)
    code, rep = run(capsys, "cmpoint", "--N", "7", "--m", "1")
    assert code == 2 and rep["problems"][0]["error"] == "Heegner hypothesis fails"
    code, rep = run(capsys, "cmpoint", "--N", "3", "--m", "1")
    assert code == 2 and rep["rejected"]


def test_failed_assertion_exit_code(capsys):
    code, rep = run(capsys, "cancellation-check", "--k", "2", "--assume", "3")
    assert code == 1 and not rep["passed"]


def test_config_file_and_out(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"p": 5, "D": 1, "N": 13, "precision": 8}))
    out = tmp_path / "rep.json"
    assert main(["heegner-check", "--config", str(cfg), "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["config"]["precision"] == 8


def test_bad_config_field(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    code, rep = run(capsys, "heegner-check", "--config", str(cfg))
    assert code == 2


def test_reports_are_deterministic(capsys):
    argv = ["cancellation-check", "--k", "2", "--seed", "4"]
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    assert capsys.readouterr().out == first


@pytest.mark.parametrize("argv", [
    ["gauss-sum", "--modulus", "7"],
    ["qexp", "--fixture", "11a", "--op", "deplete"],
    ["eigen-dist", "--k", "4", "--m", "1", "--units", "2"],
    ["norm-shift-check"],
])
def test_subcommands_pass(capsys, argv):
    code, rep = run(capsys, *argv)
    assert code == 0, rep["assertions"]


def test_runconfig_defaults():
    cfg = RunConfig()
    assert cfg.validate() == []
    assert cfg.heegner_problems() == []
