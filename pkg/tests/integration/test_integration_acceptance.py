# pylint: skip-file
"""
Tests for the corpus replay, the acceptance battery and the report writer
"""
import math
import os
import shutil

import pytest

from lattice_spaces.scripts.errors import CertificationError, LatticeInputError
from lattice_spaces.scripts.serialization import dump_json, load_json
from cli_reporting.scripts.acceptance import (CRITERIA, CriterionResult, degeneracy, determinism, holder_suite,
                                              replayed_criteria, run_battery)
from cli_reporting.scripts.config import RunConfig, config_from_dict, read_config
from cli_reporting.scripts.report import Report, check_intervals, write_report
from cli_reporting.scripts.run import main, run
from cli_reporting.scripts.verify_suite import first_interval, load_instances, verify_suite

CORPUS = os.path.join(os.path.dirname(__file__), "..", "..", "cli_reporting", "corpus")


@pytest.fixture
def out(tmp_path):
    return str(tmp_path / "verify.json")


"""
Tests for verify_suite.py
"""


def test_empty_corpus_passes(tmp_path, out):
    empty = tmp_path / "empty"
    empty.mkdir()
    code = main(["verify", "--corpus", str(empty), "--no-battery", "--out", out, "--quiet"])
    assert code == 0
    report = load_json(out)
    assert report["items"] == []
    assert report["ok"] is True


def test_missing_corpus_is_an_input_error(tmp_path, out):
    code = main(["verify", "--corpus", str(tmp_path / "absent"), "--no-battery", "--out", out, "--quiet"])
    assert code == 1


def test_shipped_corpus_replays(out):
    code = main(["verify", "--corpus", CORPUS, "--no-battery", "--threads", "2", "--out", out, "--quiet"])
    report = load_json(out)
    assert report["failures"] == []
    assert code == 0
    names = [item["name"] for item in report["items"]]
    assert names == sorted(names)
    assert "factorize_infeasible.json" in names


def test_corrupted_instance_names_the_file(tmp_path, out, capsys):
    corpus = tmp_path / "corpus"
    shutil.copytree(CORPUS, corpus)
    (corpus / "rho_identity.json").write_text("{\"command\": \"rho\", ")
    code = main(["verify", "--corpus", str(corpus), "--no-battery", "--out", out, "--quiet"])
    assert code == 1
    assert "rho_identity.json" in capsys.readouterr().err


def test_instance_without_seed_is_rejected(tmp_path):
    dump_json({"command": "rho", "inputs": {"op": "x.json"}}, str(tmp_path / "instance.json"))
    with pytest.raises(LatticeInputError) as error:
        load_instances(str(tmp_path))
    assert "instance.json" in str(error.value)


def test_failed_expectation_is_recorded(tmp_path):
    shutil.copytree(os.path.join(CORPUS, "data"), tmp_path / "data")
    dump_json({"command": "rho", "seed": 0, "inputs": {"op": "data/identity_l2.json"},
               "params": {"p": "2", "q": "2", "restarts": 2}, "expected": {"value": 2.0}},
              str(tmp_path / "wrong.json"))
    report = verify_suite(str(tmp_path), run, battery=False)
    assert report.failures == ["wrong.json"]
    assert "misses" in report.items[0]["result"]["problems"][0]


def test_broken_instance_does_not_abort_the_suite(tmp_path):
    shutil.copytree(os.path.join(CORPUS, "data"), tmp_path / "data")
    dump_json({"command": "rho", "seed": 0, "inputs": {"op": "data/absent.json"}, "params": {"p": 2, "q": 2}},
              str(tmp_path / "a_broken.json"))
    dump_json({"command": "rho", "seed": 0, "inputs": {"op": "data/identity_l2.json"},
               "params": {"p": 2, "q": 2, "restarts": 2}}, str(tmp_path / "b_fine.json"))
    report = verify_suite(str(tmp_path), run, battery=False)
    assert report.failures == ["a_broken.json"]
    assert "LatticeInputError" in report.items[0]["result"]["error"]
    assert report.items[1]["ok"]


def test_first_interval_is_depth_first():
    data = [{"witness": [1, 2]}, {"record": {"rho_before": 1.0, "rho_after": {"lower": 0.5, "upper": 0.75}}},
            {"lower": 9.0, "upper": 9.0}]
    assert first_interval(data) == (0.5, 0.75)
    assert first_interval({"value": 1.0}) is None


"""
Tests for acceptance.py
"""


@pytest.mark.parametrize("number", [4, 5, 6])
def test_cheap_criteria_pass(number):
    results = run_battery(seed=0, scale=0.05, numbers=[number])
    assert len(results) == 1
    assert results[0].number == number
    assert results[0].passed, results[0].to_dict()


def test_determinism_replays_every_other_criterion():
    replayed = replayed_criteria()
    assert len(replayed) == len(CRITERIA) - 1
    assert determinism not in replayed
    assert set(replayed) == set(CRITERIA[:-1])


def test_determinism_compares_selected_criteria():
    result = determinism(seed=3, scale=0.05, checks=[degeneracy, holder_suite])
    assert result.number == 12
    assert result.checked == 2
    assert result.passed, result.to_dict()


def test_criterion_result_records_failures():
    result = CriterionResult(1, "identity")
    result.record(True, "fine", 0.0)
    for index in range(12):
        result.record(False, f"case {index}", float(index))
    data = result.to_dict()
    assert not result.passed
    assert result.checked == 13
    assert len(data["failures"]) == 10


"""
Tests for config.py and report.py
"""


def test_config_validation():
    with pytest.raises(LatticeInputError):
        RunConfig("plot", 0)
    with pytest.raises(LatticeInputError):
        RunConfig("rho", None)
    with pytest.raises(LatticeInputError):
        RunConfig("rho", 0, tolerances={"oracle": 0.0})
    with pytest.raises(LatticeInputError):
        RunConfig("rho", 0, tolerances={"fuzzy": 1.0})
    config = RunConfig("rho", 0, tolerances={"estimator": 0.05})
    assert config.tolerance("estimator") == 0.05
    assert config.tolerance("oracle") == 1e-9
    assert config.output == os.path.join("results", "rho.json")
    with pytest.raises(LatticeInputError):
        config.input_path("op")
    with pytest.raises(LatticeInputError):
        config.param("p", required=True)


def test_environment_sets_default_tolerances(monkeypatch):
    from lattice_spaces.scripts import settings

    monkeypatch.setattr(settings, "RESIDUAL_TOLERANCE", 1e-6)
    assert RunConfig("rho", 0).tolerance("residual") == 1e-6


def test_config_reads_reports(tmp_path):
    report = Report(RunConfig("rho", 7, inputs={"op": "data/T.json"}, params={"p": 2}).to_dict())
    write_report(report, str(tmp_path / "report.json"))
    config = read_config(str(tmp_path / "report.json"))
    assert config.seed == 7
    assert config.params == {"p": 2}
    assert config.inputs["op"] == os.path.join(str(tmp_path), "data/T.json")
    assert config_from_dict({"command": "rho", "seed": 1}, output=None).output == os.path.join("results", "rho.json")


def test_writer_rejects_crossed_intervals(tmp_path):
    report = Report({"command": "rho", "seed": 0})
    report.add("rho", {"lower": 2.0, "upper": 1.0, "tolerance": 1e-2})
    with pytest.raises(CertificationError):
        write_report(report, str(tmp_path / "report.json"))
    assert not (tmp_path / "report.json").exists()


def test_interval_check_tolerances():
    check_intervals({"lower": 1.0 + 1e-12, "upper": 1.0})
    check_intervals({"lower": 5.0, "upper": math.inf})
    check_intervals({"items": [{"lower": 1.005, "upper": 1.0, "tolerance": 1e-2}]})
    with pytest.raises(CertificationError) as error:
        check_intervals({"items": [{"lower": 1.005, "upper": 1.0}]})
    assert "items[0]" in str(error.value)


def test_report_exit_codes():
    report = Report({"command": "rho", "seed": 0})
    report.add("first", {})
    assert report.exit_code == 0
    report.add("second", {}, ok=False)
    assert report.exit_code == 2
    assert report.failures == ["second"]
    assert "wall_time" not in report.payload()
