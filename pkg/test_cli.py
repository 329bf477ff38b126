import json

import pandas as pd
import pytest

import pre_release_check
from conftest import MAPS, ROOT
import posmap
from posmap import EXIT_DATA, EXIT_FALSIFIED, EXIT_OK, EXIT_SOFTWARE, EXIT_USAGE, run

FAST = ["--seed", "0", "--restarts", "8"]


def run_json(capsys, *argv):
    code = run(list(argv) + ["--format", "json"])
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_check_cp_transpose(capsys, map_path):
    code, report = run_json(capsys, "check-cp", map_path("transpose.map"))
    assert code == EXIT_FALSIFIED
    assert report['status'] == "Falsified"
    assert report['value'] == pytest.approx(-1.0, abs=1e-9)
    assert report['schema'] == 1
    assert report['witness'] is not None


def test_check_cp_identity(capsys, map_path):
    code, report = run_json(capsys, "check-cp", map_path("identity.map"))
    assert code == EXIT_OK
    assert report['status'] == "CertifiedPositive"


def test_check_positive_uses_structure(capsys, map_path):
    code, report = run_json(capsys, "check-positive", map_path("transpose.map"), *FAST)
    assert code == EXIT_OK
    assert report['stats']['certificate'] == "COCP"


def test_check_k_positive(capsys, map_path):
    code, report = run_json(capsys, "check-k-positive", map_path("lambda_half_m3.map"), "--k", "3", *FAST)
    assert code == EXIT_FALSIFIED
    assert report['value'] == pytest.approx(-0.5, abs=1e-9)
    assert report['k'] == 3


def test_pair_identity(capsys, map_path):
    code, report = run_json(capsys, "pair", map_path("identity.map"), map_path("identity.map"))
    assert code == EXIT_OK
    assert report['value'] == pytest.approx(4.0)
    assert report['sign'] == "nonnegative"


def test_negative_pair_is_reported_with_witness(capsys, map_path, tmp_path):
    lambda_three = tmp_path / "lambda_three.map"
    lambda_three.write_text('{in_dim: 2, out_dim: 2, repr: "builtin", name: "lambda_mu", params: {mu: 3}}')
    code, report = run_json(capsys, "pair", map_path("transpose.map"), str(lambda_three))
    assert code == EXIT_FALSIFIED
    assert report['status'] == "negative"
    assert report['value'] == pytest.approx(-4.0)
    assert report['witness']['value'] == pytest.approx(-4.0)


def test_dual_witness_replays_through_check_cp(capsys, map_path, tmp_path):
    code, report = run_json(capsys, "dual", "--cone-gen", map_path("transpose.map"),
                            "--candidate", map_path("identity.map"), "--trials", "1", *FAST)
    assert code == EXIT_FALSIFIED
    assert report['status'] == "NotMember"
    witness = report['witness']
    assert "eigenvalue -1" in witness['message']

    composite = tmp_path / "composite.map"
    composite.write_text(json.dumps(witness['composite']))
    code, replay = run_json(capsys, "check-cp", str(composite))
    assert code == EXIT_FALSIFIED
    assert replay['value'] == pytest.approx(witness['value'], abs=1e-6)


def test_dual_consistent(capsys, map_path):
    code, report = run_json(capsys, "dual", "--cone-gen", map_path("transpose.map"),
                            "--candidate", map_path("reduction.map"), "--trials", "3",
                            "--seed", "0", "--restarts", "50")
    assert code == EXIT_OK
    assert report['status'] == "ConsistentWithMembership"
    assert report['witness'] is None
    assert report['dual_pair_min'] >= -1e-9


def test_generated_dual_consistent_for_reduction(capsys, map_path):
    code, report = run_json(capsys, "cor4", "--gen", map_path("transpose.map"),
                            "--candidate", map_path("reduction.map"), "--trials", "3",
                            "--seed", "0", "--restarts", "50")
    assert code == EXIT_OK
    assert report['status'] == "ConsistentWithMembership"


@pytest.mark.parametrize("command", ["cor4", "generated-dual"])
def test_generated_dual_cases(capsys, map_path, command):
    code, report = run_json(capsys, command, "--gen", map_path("transpose.map"),
                            "--candidate", map_path("identity.map"), "--trials", "3", *FAST)
    assert code == EXIT_FALSIFIED
    assert report['witness']['value'] < 0

    code, report = run_json(capsys, command, "--gen", map_path("identity.map"),
                            "--candidate", map_path("ad_v_symmetric.map"), "--trials", "3", *FAST)
    assert code == EXIT_OK
    assert report['status'] == "Member"


@pytest.mark.parametrize("name,code,status", [
    ("transpose.map", EXIT_OK, "Symmetric"),
    ("ad_v_symmetric.map", EXIT_OK, "Symmetric"),
    ("ad_e21.map", EXIT_FALSIFIED, "NotSymmetric"),
])
def test_symmetry(capsys, map_path, name, code, status):
    got, report = run_json(capsys, "prop5", map_path(name))
    assert got == code
    assert report['status'] == status


def test_verify_suite(capsys):
    code, report = run_json(capsys, "verify", "lemma1", "--dim", "3", "--trials", "200", "--seed", "7")
    assert code == EXIT_OK
    assert report['status'] == "pass"
    assert report['max_residual'] <= 1e-9


def test_verify_text_and_csv(capsys, tmp_path):
    table = tmp_path / "trials.csv"
    code = run(["verify", "eq1", "--trials", "5", "--seed", "1", "--csv", str(table)])
    assert code == EXIT_OK
    assert "pass" in capsys.readouterr().out
    assert len(pd.read_csv(table)) == 5


def test_reports_are_deterministic(capsys, map_path):
    argv = ["dual", "--cone-gen", map_path("transpose.map"), "--candidate", map_path("identity.map"),
            "--trials", "4", "--seed", "3", "--restarts", "6"]
    _, first = run_json(capsys, *argv)
    _, second = run_json(capsys, *argv)
    first.pop('wall_time')
    second.pop('wall_time')
    assert first == second


def test_seed_from_environment(capsys, monkeypatch, map_path):
    monkeypatch.setenv("POSMAP_SEED", "11")
    _, report = run_json(capsys, "pair", map_path("identity.map"), map_path("transpose.map"))
    assert report['seed'] == 11


def test_out_file(capsys, map_path, tmp_path):
    out = tmp_path / "report.json"
    assert run(["check-cp", map_path("identity.map"), "--out", str(out)]) == EXIT_OK
    capsys.readouterr()
    assert json.loads(out.read_text())['status'] == "CertifiedPositive"


@pytest.mark.parametrize("argv", [
    [],
    ["check-cp"],
    ["no-such-command"],
    ["check-k-positive", f"{MAPS}/lambda_half_m3.map"],
    ["check-k-positive", f"{MAPS}/lambda_half_m3.map", "--k", "0"],
    ["check-k-positive", f"{MAPS}/lambda_half_m3.map", "--k", "4"],
    ["check-positive", f"{MAPS}/identity.map", "--samples", "-1"],
    ["verify", "eq1", "--dim", "1"],
    ["verify", "eq1", "--trials", "0"],
    ["check-cp", f"{MAPS}/identity.map", "--restarts", "0"],
])
def test_usage_errors(capsys, argv):
    assert run(argv) == EXIT_USAGE
    capsys.readouterr()


def test_bad_map_file(capsys, tmp_path):
    broken = tmp_path / "broken.map"
    broken.write_text('{in_dim: 2, out_dim: 2, repr: "choi", data: [[1, 0]]}')
    assert run(["check-cp", str(broken)]) == EXIT_DATA
    assert "data" in capsys.readouterr().err
    assert run(["check-cp", str(tmp_path / "missing.map")]) == EXIT_DATA


def test_help_exits_cleanly(capsys):
    assert run(["--help"]) == EXIT_OK
    capsys.readouterr()


def test_pre_release_check_passes(capsys):
    assert pre_release_check.main(root=ROOT) is True
    capsys.readouterr()


def test_verify_dual_conditions_suite(capsys):
    code, report = run_json(capsys, "verify", "thm2", "--dim", "2", "--trials", "4", *FAST)
    assert code == EXIT_OK
    assert report['status'] == "pass"


def test_samples_flag(capsys, map_path):
    code, report = run_json(capsys, "check-positive", map_path("sp2_random_m3.map"),
                            "--samples", "1000", "--restarts", "50", "--seed", "0")
    assert code == EXIT_OK
    assert report['samples'] == 1000


def test_unexpected_failures_get_an_exit_code(capsys, monkeypatch, map_path):
    def broken(args, cfg):
        raise RuntimeError("boom")

    monkeypatch.setitem(posmap.COMMANDS, "pair", broken)
    assert run(["pair", map_path("identity.map"), map_path("identity.map")]) == EXIT_SOFTWARE
    assert "RuntimeError: boom" in capsys.readouterr().err
