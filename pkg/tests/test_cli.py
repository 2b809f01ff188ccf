import json

import pytest

from rswlie import cli
from rswlie import reductions as rd


def _run(argv, tmp_path):
    return cli.run([*argv, "--out", str(tmp_path)])


def test_verify_reduced(tmp_path, capsys):
    assert _run(["verify", "reduced", "--gamma", "symbolic"], tmp_path) == 0
    out = capsys.readouterr().out
    assert "5/5 generators verified" in out
    assert (tmp_path / "verify_reduced.txt").read_text() == out


def test_table_commutators_gamma_one(tmp_path, capsys):
    assert _run(["table", "--commutators", "--gamma", "1", "--format", "json"], tmp_path) == 0
    doc = json.loads(capsys.readouterr().out)
    rows = doc["report"]["rows"]
    assert rows[2][4] == "0" and rows[3][4] == "0" and not doc["report"]["mismatches"]


def test_table_adjoint_latex(tmp_path, capsys):
    assert _run(["table", "--adjoint", "--format", "latex"], tmp_path) == 0
    assert "\\cos" in capsys.readouterr().out


def test_table_needs_one_flag(tmp_path):
    assert _run(["table"], tmp_path) == 1
    assert _run(["table", "--commutators", "--adjoint"], tmp_path) == 1


def test_check_solution_point(tmp_path, capsys):
    assert _run(["check-solution", "point", "--format", "json"], tmp_path) == 0
    doc = json.loads(capsys.readouterr().out)
    (c,) = doc["report"]["candidates"]
    assert c["candidate"] == "oscillator" and c["summary"] == "verified-symbolic"


def test_refuted_candidate_with_correction_exits_zero(tmp_path, capsys):
    assert _run(["check-solution", "boost-height"], tmp_path) == 0
    assert cli.REFUTED_OK in capsys.readouterr().out


def test_optimal_reduce(tmp_path, capsys):
    assert _run(["optimal", "--reduce", "1,0.7,-0.3,2,1", "--gamma", "2"], tmp_path) == 0
    out = capsys.readouterr().out
    assert "representative: X1 + X5" in out and "round trip verified: True" in out


@pytest.mark.parametrize("arg", ["1,2,3", "0,0,0,0,0", "a,b"])
def test_optimal_reduce_bad_vector(tmp_path, arg):
    assert _run(["optimal", "--reduce", arg], tmp_path) == 1


def test_reduce_reports_defective_claim(tmp_path, capsys):
    assert _run(["reduce", "scaling"], tmp_path) == 0
    assert "claimed form inconsistent; derived form verified" in capsys.readouterr().out


def test_determining(tmp_path, capsys):
    assert _run(["determining", "reduced"], tmp_path) == 0
    assert "X5: satisfies all" in capsys.readouterr().out


def test_simulate_fig2(tmp_path, capsys):
    assert _run(["simulate", "fig2", "--gamma", "2"], tmp_path) == 0
    assert (tmp_path / "fig2_gamma2.csv").exists() and (tmp_path / "fig2_gamma2.svg").exists()


def test_simulate_derived_blow_up_is_numeric_failure(tmp_path):
    assert _run(["simulate", "fig2", "--gamma", "1.5", "--variant", "derived"], tmp_path) == 3


def test_simulate_rejects_unknown_override(tmp_path):
    assert _run(["simulate", "fig1", "--set", "nope=1"], tmp_path) == 1


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["verify", "--gamma", "-2"],
                                  ["verify", "--gamma", "abc"], ["verify", "nowhere"],
                                  ["check-solution", "no-such-thing"]])
def test_usage_errors(tmp_path, argv):
    assert _run(argv, tmp_path) == 1


def test_env_var_sets_output_dir(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("RSWLIE_OUT", str(tmp_path / "env"))
    assert cli.run(["verify", "euler", "--gamma", "2"]) == 0
    assert (tmp_path / "env" / "verify_euler_gamma2.txt").exists()


def test_reports_are_byte_identical(tmp_path):
    for d in ("a", "b"):
        assert cli.run(["reduce", "travelwave", "--format", "json", "--seed", "7",
                        "--out", str(tmp_path / d)]) == 0
    a = (tmp_path / "a" / "reduce_travelwave.json").read_bytes()
    b = (tmp_path / "b" / "reduce_travelwave.json").read_bytes()
    assert a == b


def test_seed_is_recorded(tmp_path, capsys):
    _run(["verify", "--format", "json", "--seed", "99"], tmp_path)
    assert json.loads(capsys.readouterr().out)["config"]["seed"] == 99


@pytest.mark.slow
def test_check_solution_all_covers_catalog(tmp_path, capsys):
    assert _run(["check-solution", "all", "--format", "json"], tmp_path) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["report"]["count"] == len(rd.CANDIDATES) == doc["report"]["catalog_size"]
