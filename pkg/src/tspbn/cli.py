"""Command-line driver: ``tspbn {ingest,learn,evaluate,export} --config run.yaml``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 solver error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import dataset as ds
from .config import ConfigError, RunConfig, load_config
from .hdtsp import (BudgetExceeded, CostOracle, exact_dp_ordering, kopt_local_search,
                    nearest_neighbor_ordering, static_cost_matrix, tour_cost)
from .inference import ZeroEvidenceError, evaluate_task, fit_cpts, log_likelihood
from .scoring import Scorer, graph_score
from .structure import Dag, export_dag, read_dag, learn_structure, to_dot
from .tsplib import SolverError, export_tsplib, run_lkh

log = logging.getLogger("tspbn")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_SOLVER = 0, 2, 3, 4


def _write_json(path: Path, doc):
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def cmd_ingest(cfg: RunConfig) -> dict:
    """Load, clean, discretize and split; writes train.csv, test.csv and ingest_summary.json."""
    cfg.out.mkdir(parents=True, exist_ok=True)
    raw = ds.load_csv(cfg.data, cfg.schema)
    clean = ds.drop_missing(raw)
    summary = {
        "rows_raw": len(raw),
        "rows_clean": len(clean),
        "rows_train": 0,
        "rows_test": 0,
        "variables": list(cfg.schema.names),
        "cardinalities": list(cfg.schema.cardinalities),
    }
    if len(clean) == 0:
        _write_json(cfg.out / "ingest_summary.json", summary)
        raise ds.DataError("no complete rows left after dropping missing values")
    schema = ds.resolve_bin_edges(clean, cfg.schema)
    table = ds.discretize(clean, schema)
    train, test = ds.split(table, cfg.split)
    ds.write_table_csv(train, cfg.out / "train.csv")
    ds.write_table_csv(test, cfg.out / "test.csv")
    summary.update(rows_train=train.n_rows, rows_test=test.n_rows,
                   bin_edges={v.name: list(v.bin_edges) for v in schema.variables if v.kind == "continuous"})
    _write_json(cfg.out / "ingest_summary.json", summary)
    return summary


def _load_split(cfg: RunConfig, part: str) -> ds.DiscreteTable:
    path = cfg.out / f"{part}.csv"
    if not path.exists():
        raise ds.DataError(f"{path} not found; run 'ingest' first")
    return ds.read_table_csv(path, cfg.schema.cardinalities)


def solve_ordering(cfg: RunConfig, oracle: CostOracle):
    if cfg.solver == "dp":
        return exact_dp_ordering(oracle)
    if cfg.solver in ("kopt2", "kopt3"):
        start = nearest_neighbor_ordering(static_cost_matrix(oracle))
        return kopt_local_search(start, oracle, level=int(cfg.solver[-1]), restarts=cfg.restarts,
                                 seed=cfg.seed, max_no_improve=cfg.max_no_improve)
    if cfg.lkh_path is None:
        raise ConfigError("solver 'lkh-external' needs lkh_path (or --lkh-path)")
    perm = run_lkh(static_cost_matrix(oracle), cfg.lkh_path, cfg.out / "lkh", seed=cfg.seed + 1)
    return perm, tour_cost(perm, oracle)


def cmd_learn(cfg: RunConfig) -> dict:
    """Order the variables with the configured solver, then learn and write the network."""
    train = _load_split(cfg, "train")
    names = cfg.schema.names
    t0 = time.perf_counter()
    scorer = Scorer(train, cfg.metric, cfg.max_parents)
    oracle = CostOracle(scorer, cfg.oracle_mode, cfg.subset_budget, cfg.paper_phi_convention)
    ordering, cost = solve_ordering(cfg, oracle)
    dag = learn_structure(scorer, ordering, mode=cfg.oracle_mode)
    score = graph_score(scorer, dag)
    elapsed = time.perf_counter() - t0
    export_dag(dag, cfg.out / "network.json", names, "text", cfg.metric, score)
    export_dag(dag, cfg.out / "network.dot", names, "dot")
    (cfg.out / "ordering.txt").write_text("".join(f"{names[v]}\n" for v in ordering))
    report = {
        "solver": cfg.solver,
        "metric": cfg.metric,
        "max_parents": cfg.max_parents,
        "seed": cfg.seed,
        "ordering": [names[v] for v in ordering],
        "tour_cost": cost,
        "graph_score": score,
        "edges": [[names[u], names[v]] for u, v in dag.edges()],
        "wall_time_s": elapsed,
    }
    _write_json(cfg.out / "learn_report.json", report)
    log.info("learned %d edges, score %.4f in %.2fs", len(report["edges"]), score, elapsed)
    return report


def cmd_evaluate(cfg: RunConfig) -> dict:
    """Fit CPTs on the training part and run every configured prediction task on the test part."""
    train, test = _load_split(cfg, "train"), _load_split(cfg, "test")
    net = cfg.out / "network.json"
    if not net.exists():
        raise ds.DataError(f"{net} not found; run 'learn' first")
    dag, _ = read_dag(net)
    cpts = fit_cpts(train, dag, cfg.alpha)
    empty = fit_cpts(train, Dag.empty(dag.n), cfg.alpha)
    report = {
        "log_likelihood_test": log_likelihood(cpts, test),
        "log_likelihood_ratio_vs_empty": log_likelihood(cpts, test) - log_likelihood(empty, test),
        "network_score": graph_score(Scorer(train, cfg.metric, max(cfg.max_parents, dag.max_in_degree)), dag),
        "tasks": {},
    }
    idx = cfg.schema.index
    lines = []
    for t in cfg.tasks:
        res = evaluate_task(cpts, test, idx(t.target), [idx(e) for e in t.evidence], t.threshold)
        report["tasks"][t.name] = res
        lines.append(f"{t.name}: P({t.target} | {', '.join(t.evidence)}) "
                     f"N_t={res['n_test']} MSE={res['mse']:.4f} accuracy={res['accuracy']:.4f} "
                     f"confusion={res['confusion']}")
    _write_json(cfg.out / "metrics.json", report)
    (cfg.out / "metrics.txt").write_text("".join(line + "\n" for line in lines))
    for line in lines:
        print(line)
    return report


def cmd_export(cfg: RunConfig) -> dict:
    """Write the static ATSP instance (TSPLIB) and, if learned, the network as DOT."""
    train = _load_split(cfg, "train")
    cfg.out.mkdir(parents=True, exist_ok=True)
    oracle = CostOracle(Scorer(train, cfg.metric, cfg.max_parents), cfg.oracle_mode, cfg.subset_budget,
                        cfg.paper_phi_convention)
    export_tsplib(static_cost_matrix(oracle), cfg.out / "static.atsp", name=cfg.name)
    written = ["static.atsp"]
    if (cfg.out / "network.json").exists():
        dag, _ = read_dag(cfg.out / "network.json")
        (cfg.out / "network.dot").write_text(to_dot(dag, cfg.schema.names))
        written.append("network.dot")
    return {"written": written}


COMMANDS = {"ingest": cmd_ingest, "learn": cmd_learn, "evaluate": cmd_evaluate, "export": cmd_export}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tspbn", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="experiment YAML file")
    p.add_argument("--seed", type=int)
    p.add_argument("--solver", choices=["dp", "kopt2", "kopt3", "lkh-external"])
    p.add_argument("--out", help="output directory (overrides the config)")
    p.add_argument("--lkh-path", help="path to an LKH executable")
    p.add_argument("--data", help="input data file (overrides the config)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config).with_overrides(seed=args.seed, solver=args.solver, out=args.out,
                                                      lkh_path=args.lkh_path, data=args.data)
    except (ConfigError, ds.SchemaError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = COMMANDS[args.command](cfg)
    except (ConfigError, ds.SchemaError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ds.DataError, FileNotFoundError, ZeroEvidenceError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (SolverError, BudgetExceeded) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    if args.command == "ingest":
        print(json.dumps(result, indent=2, sort_keys=True))
    elif args.command == "learn":
        print(f"ordering: {' '.join(result['ordering'])}")
        print(f"tour cost {result['tour_cost']:.6f}, graph score {result['graph_score']:.6f}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
