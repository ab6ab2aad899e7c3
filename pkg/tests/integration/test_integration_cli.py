# pylint: skip-file
"""
Tests for the command line of cli_reporting
"""
import math
import os

import numpy as np
import pandas as pd
import pytest

from lattice_spaces.scripts.serialization import dump_json, load_json, operator_to_dict, space_to_dict
from lattice_spaces.scripts.spaces import FunctionSpace, OperatorMatrix
from cli_reporting.scripts.config import RunConfig
from cli_reporting.scripts.report import numeric_payload
from cli_reporting.scripts.run import build_parser, config_from_args, main, run


def write(path, data):
    dump_json(data, str(path))
    return str(path)


@pytest.fixture
def plane():
    return FunctionSpace.lr(2, atoms=2)


@pytest.fixture
def identity_file(tmp_path, plane):
    return write(tmp_path / "identity.json", operator_to_dict(OperatorMatrix(plane, plane, np.eye(2))))


@pytest.fixture
def out(tmp_path):
    return str(tmp_path / "results" / "report.json")


"""
Tests for rho
"""


def test_rho_identity_report(identity_file, out):
    code = main(["rho", "--op", identity_file, "--p", "2", "--q", "2", "--seed", "0", "--restarts", "4",
                 "--out", out, "--quiet"])
    assert code == 0
    report = load_json(out)
    result = report["items"][0]["result"]
    assert result["lower"] == pytest.approx(1.0, abs=1e-6)
    assert result["upper"] == pytest.approx(1.0, abs=1e-9)
    assert report["ok"] is True
    assert report["config"]["seed"] == 0
    assert "wall_time" in report and "version" in report
    assert report["oracle_flags"] == {"rho": report["items"][0]["oracle"]}


def test_rho_exponent_order_is_a_guard(identity_file, out, capsys):
    code = main(["rho", "--op", identity_file, "--p", "1", "--q", "2", "--out", out, "--quiet"])
    assert code == 1
    assert "exponent_order" in capsys.readouterr().err
    assert not os.path.exists(out)


def test_rho_oracle_flag(tmp_path, out):
    line = FunctionSpace.lr(1, atoms=2)
    op = write(tmp_path / "l1.json", operator_to_dict(OperatorMatrix(line, line, np.eye(2))))
    code = main(["rho", "--op", op, "--p", "1", "--q", "1", "--oracle", "--out", out, "--quiet"])
    assert code == 0
    item = load_json(out)["items"][0]
    assert item["oracle"] is True
    assert item["result"]["lower"] == pytest.approx(1.0)
    assert item["result"]["upper"] == pytest.approx(1.0)


"""
Tests for input errors
"""


def test_malformed_json_exits_with_one(tmp_path, out, capsys):
    broken = tmp_path / "broken.json"
    broken.write_text("{\"rows\": 2, ")
    code = main(["rho", "--op", str(broken), "--p", "2", "--q", "2", "--out", out, "--quiet"])
    assert code == 1
    assert "broken.json" in capsys.readouterr().err


def test_missing_input_file_exits_with_one(tmp_path, out):
    code = main(["rho", "--op", str(tmp_path / "absent.json"), "--p", "2", "--q", "2", "--out", out, "--quiet"])
    assert code == 1


def test_usage_errors_exit_with_one(identity_file):
    with pytest.raises(SystemExit) as error:
        main(["rho", "--op", identity_file, "--p", "two", "--q", "2"])
    assert error.value.code == 1


def test_sweep_size_guard(tmp_path, out, capsys):
    grid = write(tmp_path / "grid.json", [{"p": 2, "q": 2, "r1": 2, "r2": 2}])
    code = main(["mz-sweep", "--grid", grid, "--n", "8", "--samples", "1", "--out", out, "--quiet"])
    assert code == 1
    assert "sweep_size" in capsys.readouterr().err


"""
Tests for tensor-norm
"""


def test_tensor_eps_of_an_elementary_tensor(tmp_path, plane, out):
    tensor = write(tmp_path / "tensor.json", {"left": space_to_dict(plane), "right": space_to_dict(plane),
                                              "xs": [[1.0, -2.0]], "ys": [[0.5, 1.5]]})
    assert main(["tensor-norm", "--tensor", tensor, "--norm", "eps", "--out", out, "--quiet"]) == 0
    result = load_json(out)["items"][0]["result"]
    assert result["lower"] == pytest.approx(math.sqrt(12.5), rel=1e-9)
    assert result["upper"] == pytest.approx(math.sqrt(12.5), rel=1e-9)


"""
Tests for factorize
"""


def test_factorize_identity(identity_file, out):
    assert main(["factorize", "--op", identity_file, "--p", "2", "--s", "2", "--out", out, "--quiet"]) == 0
    item = load_json(out)["items"][0]
    assert item["ok"] is True
    assert item["result"]["check"]["residual"] <= 1e-8


def test_factorize_infeasible_constant(identity_file, out):
    code = main(["factorize", "--op", identity_file, "--p", "2", "--s", "2", "--constant", "0.5",
                 "--out", out, "--quiet"])
    assert code == 2
    report = load_json(out)
    assert report["ok"] is False
    assert report["failures"] == ["factorization"]
    witness = report["items"][0]["result"]["witness"]
    assert witness["ratio"] > 0.5
    assert len(witness["x"]) >= 1 and len(witness["y"]) >= 1


"""
Tests for extend
"""


def test_extend_line_functional(tmp_path, plane, out):
    space = write(tmp_path / "space.json", space_to_dict(plane))
    subspace = write(tmp_path / "subspace.json", {"basis": [[1.0, 1.0]]})
    functional = write(tmp_path / "functional.json", {"codomain": space_to_dict(FunctionSpace.lr(2, atoms=1)),
                                                      "images": [[1.0]]})
    code = main(["extend", "--space", space, "--subspace", subspace, "--op", functional, "--q", "2",
                 "--out", out, "--quiet"])
    assert code == 0
    result = load_json(out)["items"][0]["result"]
    np.testing.assert_allclose(result["extension"], [[0.5, 0.5]], atol=1e-8)
    assert result["record"]["rho_after"]["lower"] == pytest.approx(1 / math.sqrt(2), rel=1e-9)
    assert result["record"]["agreement_residual"] <= 1e-8


def test_extend_accepts_the_ambient_flag(tmp_path, plane, out):
    space = write(tmp_path / "space.json", space_to_dict(plane))
    subspace = write(tmp_path / "subspace.json", {"basis": [[1.0, 1.0]]})
    functional = write(tmp_path / "functional.json", {"codomain": space_to_dict(FunctionSpace.lr(2, atoms=1)),
                                                      "images": [[1.0]]})
    code = main(["extend", "--ambient", space, "--subspace", subspace, "--op", functional, "--q", "2",
                 "--out", out, "--quiet"])
    assert code == 0
    assert load_json(out)["config"]["inputs"]["space"] == space


def test_extend_rank_defective_basis_fails_certification(tmp_path, plane, out):
    space = write(tmp_path / "space.json", space_to_dict(plane))
    subspace = write(tmp_path / "subspace.json", {"basis": [[1.0, 1.0], [2.0, 2.0]]})
    functional = write(tmp_path / "functional.json", {"codomain": space_to_dict(FunctionSpace.lr(2, atoms=1)),
                                                      "images": [[1.0, 2.0]]})
    code = main(["extend", "--space", space, "--subspace", subspace, "--op", functional, "--q", "2",
                 "--out", out, "--quiet"])
    assert code == 2
    assert "rank" in load_json(out)["items"][0]["result"]["message"]


def test_extend_restricted_operator_through_a_level(tmp_path, out):
    ambient = FunctionSpace.lr(2, weights=[0.25] * 4)
    operator = OperatorMatrix(ambient, ambient, np.eye(4))
    op = write(tmp_path / "op.json", operator_to_dict(operator))
    subspace = write(tmp_path / "subspace.json", [[1.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 1.0]])
    code = main(["extend", "--subspace", subspace, "--op", op, "--level", "2", "--out", out, "--quiet"])
    assert code == 0
    result = load_json(out)["items"][0]["result"]
    assert result["projection_residual"] <= 1e-12
    assert result["record"]["agreement_residual"] <= 1e-8


"""
Tests for mz-sweep
"""


def test_mz_sweep_writes_one_row_per_cell(tmp_path, out):
    grid = write(tmp_path / "grid.json", [{"p": 2, "q": 2, "r1": 2, "r2": 2},
                                          {"p": "inf", "q": 1, "r1": 1, "r2": 1},
                                          {"p": 2, "q": 1, "r1": 3, "r2": 1.5}])
    table = str(tmp_path / "tables" / "sweep.csv")
    code = main(["mz-sweep", "--grid", grid, "--n", "2", "--samples", "2", "--seed", "4",
                 "--out", out, "--csv", table, "--quiet"])
    assert code == 0
    frame = pd.read_csv(table)
    assert len(frame) == 3
    assert len(load_json(out)["items"]) == 3


def test_mz_sweep_table_defaults_next_to_the_report(tmp_path, out):
    args = build_parser().parse_args(["mz-sweep", "--grid", "grid.json", "--out", out])
    assert config_from_args(args).csv == os.path.splitext(out)[0] + ".csv"


def test_mz_sweep_out_may_name_the_table(tmp_path):
    grid = write(tmp_path / "grid.json", [{"p": 2, "q": 2, "r1": 2, "r2": 2}])
    table = str(tmp_path / "sweep.csv")
    config = config_from_args(build_parser().parse_args(["mz-sweep", "--grid", grid, "--out", table]))
    assert config.csv == table
    assert config.output == str(tmp_path / "sweep.json")
    assert main(["mz-sweep", "--grid", grid, "--n", "2", "--samples", "1", "--out", table, "--quiet"]) == 0
    assert len(pd.read_csv(table)) == 1
    assert load_json(str(tmp_path / "sweep.json"))["ok"] is True


def test_mz_sweep_forwards_threads(tmp_path, out, monkeypatch):
    from cli_reporting.scripts import run as run_module

    seen = {}

    def sweep(grid, n, samples, **kwargs):
        seen.update(kwargs)
        return []

    monkeypatch.setattr(run_module, "mz_coincidence_sweep", sweep)
    grid = write(tmp_path / "grid.json", [{"p": 2, "q": 2, "r1": 2, "r2": 2}])
    assert main(["mz-sweep", "--grid", grid, "--threads", "3", "--out", out, "--quiet"]) == 0
    assert seen["threads"] == 3


"""
Tests for replaying archived configurations
"""


def test_replay_reproduces_the_numeric_payload(identity_file, tmp_path, out):
    assert main(["rho", "--op", identity_file, "--p", "2", "--q", "1", "--seed", "3", "--restarts", "2",
                 "--tuple-size", "3", "--out", out, "--quiet"]) == 0
    replay = str(tmp_path / "replay.json")
    assert main(["run", "--config", out, "--out", replay, "--quiet"]) == 0
    first, second = load_json(out), load_json(replay)
    first.pop("wall_time")
    second.pop("wall_time")
    assert first == second


def test_identical_configs_give_identical_payloads(identity_file):
    config = RunConfig("rho", 5, inputs={"op": identity_file}, params={"p": "3", "q": "2", "restarts": 2})
    assert numeric_payload(run(config)) == numeric_payload(run(config))


def test_replay_overrides_the_seed(identity_file, tmp_path, out):
    assert main(["rho", "--op", identity_file, "--p", "2", "--q", "2", "--seed", "3", "--out", out,
                 "--quiet"]) == 0
    args = build_parser().parse_args(["run", "--config", out, "--seed", "9", "--tol", "0.05"])
    config = config_from_args(args)
    assert config.seed == 9
    assert config.tolerance("estimator") == 0.05
    assert config.inputs["op"] == identity_file
