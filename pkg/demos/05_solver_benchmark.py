"""Compare ordering solvers by the history-dependent cost of their tours.

Solvers: 2-opt and 3-opt local search, plus the best tour of the static
matrix (found by LKH when ``--lkh-path`` is given, by the nearest-neighbour
heuristic otherwise). Results are informative only; nothing is asserted.

    python demos/05_solver_benchmark.py [--lkh-path /path/to/LKH] [--vars 15] [--instances 5]
"""

import argparse
import tempfile
import time

import numpy as np

from tspbn.hdtsp import CostOracle, kopt_local_search, nearest_neighbor_ordering, static_cost_matrix, tour_cost
from tspbn.scoring import Scorer
from tspbn.synthetic import random_network_table
from tspbn.tsplib import run_lkh

parser = argparse.ArgumentParser()
parser.add_argument("--lkh-path")
parser.add_argument("--vars", type=int, default=15)
parser.add_argument("--instances", type=int, default=5)
args = parser.parse_args()

rng = np.random.default_rng(2024)
rows = []
for i in range(args.instances):
    table = random_network_table(rng, args.vars, 2000)
    oracle = CostOracle(Scorer(table, "k2", max_parents=3))
    matrix = static_cost_matrix(oracle)
    start = nearest_neighbor_ordering(matrix)
    row = {}
    for level in (2, 3):
        t0 = time.perf_counter()
        _, cost = kopt_local_search(start, oracle, level=level, restarts=10, seed=i)
        row[f"kopt{level}"] = (cost, time.perf_counter() - t0)
    t0 = time.perf_counter()
    if args.lkh_path:
        with tempfile.TemporaryDirectory() as work:
            perm = run_lkh(matrix, args.lkh_path, work, seed=i + 1)
    else:
        perm = start
    row["static"] = (tour_cost(perm, oracle), time.perf_counter() - t0)
    rows.append(row)

static_label = "lkh-static" if args.lkh_path else "nn-static"
print(f"{'instance':>8}  {'kopt2':>18}  {'kopt3':>18}  {static_label:>18}")
for i, row in enumerate(rows):
    cells = [f"{row[k][0]:11.2f} {row[k][1]:5.2f}s" for k in ("kopt2", "kopt3", "static")]
    print(f"{i:>8}  " + "  ".join(cells))
