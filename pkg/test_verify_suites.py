import pandas as pd
import pytest

from utils import load_report
from verify_suites import SUITES, STATUS_PASS, SuiteRunner


@pytest.mark.parametrize("name", sorted(SUITES))
def test_suites_pass_on_qubits(fast_cfg, name):
    runner = SuiteRunner(2, 4, fast_cfg)
    report = runner.run(name)
    assert report.status == STATUS_PASS, report.details
    assert not report.frame.empty


@pytest.mark.parametrize("dim", [2, 3])
@pytest.mark.parametrize("name", ["eq1", "lemma1", "adjoint", "symmetry"])
def test_identity_suites_at_full_size(fast_cfg, name, dim):
    report = SuiteRunner(dim, 200, fast_cfg).run(name)
    assert report.passed
    assert report.max_residual is None or report.max_residual <= 1e-9


def test_runner_rejects_bad_arguments(fast_cfg):
    with pytest.raises(ValueError):
        SuiteRunner(1, 3, fast_cfg)
    with pytest.raises(ValueError):
        SuiteRunner(2, 0, fast_cfg)


def test_runner_outputs(fast_cfg, tmp_path, capsys):
    runner = SuiteRunner(2, 3, fast_cfg)
    runner.run("lemma1")

    report = runner.generate_report("lemma1")
    assert report['suite'] == "lemma1"
    assert report['seed'] == fast_cfg.seed
    assert 'r_tensor_route' in report['summary']

    path = tmp_path / "report.json"
    runner.save_report("lemma1", str(path))
    assert load_report(str(path))['status'] == "pass"

    table = tmp_path / "trials.csv"
    runner.save_csv("lemma1", str(table))
    assert len(pd.read_csv(table)) == 3

    runner.print_summary("lemma1")
    assert "LEMMA1" in capsys.readouterr().out


def test_suites_are_reproducible(fast_cfg):
    first = SuiteRunner(2, 3, fast_cfg).run("eq1").frame
    second = SuiteRunner(2, 3, fast_cfg).run("eq1").frame
    pd.testing.assert_frame_equal(first, second)


def test_dual_conditions_suite_reads_only_residual_columns(fast_cfg):
    report = SuiteRunner(2, 4, fast_cfg).run("thm2")
    assert report.status == STATUS_PASS, report.details
    assert report.max_residual <= 1e-9
    # verdict columns hold strings and stay out of the residual maximum
    assert report.frame['tensor_on_p'].dtype == object
