import json
from pathlib import Path

import pytest
import yaml

from tspbn.cli import EXIT_CONFIG, EXIT_DATA, EXIT_OK, EXIT_SOLVER, main
from tspbn.dataset import write_table_csv
from tspbn.synthetic import copy_chain

FAKE_LKH = Path(__file__).with_name("fake_lkh.py")


def make_experiment(tmp_path, table=None, solver="dp", alpha=1.0, tasks=None, **learn):
    table = table if table is not None else copy_chain(1000, 3, seed=1, noise=0.05)
    write_table_csv(table, tmp_path / "data.csv")
    schema = {"variables": [{"name": nm, "states": [str(s) for s in range(r)]}
                            for nm, r in zip(table.names, table.cardinalities)]}
    cfg = {
        "name": "synthetic",
        "schema": schema,
        "data": "data.csv",
        "out": "run",
        "split": {"test_count": 100},
        "learn": {"metric": "k2", "max_parents": 3, "solver": solver, "oracle_mode": "exact",
                  "restarts": 3, "seed": 5, **learn},
        "alpha": alpha,
        "tasks": tasks if tasks is not None else [{"name": "c", "target": "C", "evidence": ["B"]}],
    }
    path = tmp_path / "exp.yaml"
    path.write_text(yaml.safe_dump(cfg))
    return path


def run(path, *cmds, extra=()):
    for cmd in cmds:
        code = main([cmd, "--config", str(path), *extra])
        if code != EXIT_OK:
            return code
    return EXIT_OK


def test_ingest_summary(tmp_path):
    cfg = make_experiment(tmp_path)
    assert run(cfg, "ingest") == EXIT_OK
    summary = json.loads((tmp_path / "run" / "ingest_summary.json").read_text())
    assert summary["rows_raw"] == summary["rows_clean"] == 1000
    assert (summary["rows_train"], summary["rows_test"]) == (900, 100)
    assert summary["variables"] == ["A", "B", "C"] and summary["cardinalities"] == [2, 2, 2]


def test_ingest_empty_input(tmp_path, capsys):
    cfg = make_experiment(tmp_path)
    (tmp_path / "data.csv").write_text("A,B,C\n")
    assert run(cfg, "ingest") == EXIT_DATA
    summary = json.loads((tmp_path / "run" / "ingest_summary.json").read_text())
    assert summary["rows_raw"] == summary["rows_clean"] == summary["rows_train"] == 0
    assert "no complete rows" in capsys.readouterr().err


def test_learn_dp_recovers_chain_skeleton(tmp_path):
    cfg = make_experiment(tmp_path, solver="dp")
    assert run(cfg, "ingest", "learn") == EXIT_OK
    report = json.loads((tmp_path / "run" / "learn_report.json").read_text())
    assert {frozenset(e) for e in report["edges"]} == {frozenset("AB"), frozenset("BC")}
    assert report["tour_cost"] == pytest.approx(-report["graph_score"], abs=1e-9)
    assert (tmp_path / "run" / "network.dot").read_text().startswith("digraph")


@pytest.mark.parametrize("solver", ["kopt2", "kopt3"])
def test_learn_is_byte_reproducible(tmp_path, solver):
    cfg = make_experiment(tmp_path, solver=solver, oracle_mode="greedy")
    outputs = []
    for out in ("a", "b"):
        assert run(cfg, "ingest", "learn", extra=["--out", str(tmp_path / out)]) == EXIT_OK
        outputs.append({f: (tmp_path / out / f).read_bytes() for f in ("ordering.txt", "network.json", "network.dot")})
    assert outputs[0] == outputs[1]


def test_learn_with_external_solver(tmp_path):
    cfg = make_experiment(tmp_path, solver="lkh-external")
    assert run(cfg, "ingest", "learn", extra=["--lkh-path", str(FAKE_LKH)]) == EXIT_OK
    assert (tmp_path / "run" / "lkh" / "static.tour").exists()
    order = (tmp_path / "run" / "ordering.txt").read_text().split()
    assert sorted(order) == ["A", "B", "C"]


def test_external_solver_missing(tmp_path):
    cfg = make_experiment(tmp_path, solver="lkh-external")
    assert run(cfg, "ingest") == EXIT_OK
    assert run(cfg, "learn", extra=["--lkh-path", str(tmp_path / "missing")]) == EXIT_SOLVER


def test_external_solver_needs_path(tmp_path):
    cfg = make_experiment(tmp_path, solver="lkh-external")
    assert run(cfg, "ingest") == EXIT_OK
    assert run(cfg, "learn") == EXIT_CONFIG


def test_evaluate_perfect_on_deterministic_data(tmp_path, capsys):
    cfg = make_experiment(tmp_path, table=copy_chain(1000, 3, seed=2), alpha=0.0)
    assert run(cfg, "ingest", "learn", "evaluate") == EXIT_OK
    metrics = json.loads((tmp_path / "run" / "metrics.json").read_text())
    task = metrics["tasks"]["c"]
    assert task["mse"] == 0.0 and task["accuracy"] == 1.0 and task["n_test"] == 100
    assert "MSE=0.0000 accuracy=1.0000" in capsys.readouterr().out


def test_evaluate_before_learn_is_data_error(tmp_path):
    cfg = make_experiment(tmp_path)
    assert run(cfg, "ingest", "evaluate") == EXIT_DATA


def test_unknown_task_variable(tmp_path):
    cfg = make_experiment(tmp_path, tasks=[{"target": "Z", "evidence": ["A"]}])
    assert run(cfg, "ingest") == EXIT_CONFIG


def test_missing_config(tmp_path):
    assert main(["ingest", "--config", str(tmp_path / "none.yaml")]) == EXIT_CONFIG


def test_export_writes_tsplib_and_dot(tmp_path):
    cfg = make_experiment(tmp_path)
    assert run(cfg, "ingest", "learn", "export") == EXIT_OK
    text = (tmp_path / "run" / "static.atsp").read_text()
    assert "TYPE: ATSP" in text and "DIMENSION: 4" in text
    assert (tmp_path / "run" / "network.dot").exists()
