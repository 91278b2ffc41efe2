"""Scores, ordering costs and the exact ordering search on a small network.

Run with ``python demos/01_scores_and_orderings.py``.
"""

import numpy as np

from tspbn.hdtsp import CostOracle, exact_dp_ordering, tour_cost
from tspbn.scoring import ContingencyCounts, Scorer, k2_node_score
from tspbn.structure import learn_structure
from tspbn.synthetic import five_node_network

# A K2 node score from a hand-written contingency table. Rows are parent
# configurations, columns are child states.
counts = ContingencyCounts(np.array([[1, 1], [0, 1]]))
print(f"K2 score of [[1,1],[0,1]]: {k2_node_score(counts):.4f}  (ln 1/12 = {np.log(1 / 12):.4f})")

table, truth = five_node_network(m=2000, seed=3)
scorer = Scorer(table, "k2", max_parents=2)

# Each variable pays minus the best score it can reach using only the
# variables placed before it. Orderings that respect the true edges are cheap.
oracle = CostOracle(scorer, mode="exact")
for perm in [(0, 1, 2, 3, 4), (4, 3, 2, 1, 0), (2, 4, 1, 3, 0)]:
    names = "".join(table.names[v] for v in perm)
    print(f"ordering {names}: cost {tour_cost(perm, oracle):10.2f}")

# The bitmask dynamic program finds the cheapest ordering exactly.
perm, cost = exact_dp_ordering(oracle)
dag = learn_structure(scorer, perm, mode="exact")
print("optimal ordering:", "".join(table.names[v] for v in perm), f"cost {cost:.2f}")
print("learned edges:   ", [f"{table.names[u]}->{table.names[v]}" for u, v in dag.edges()])
print("true edges:      ", [f"{table.names[u]}->{table.names[v]}" for u, v in truth.edges()])

# K2 gives nearly equal scores to Markov-equivalent graphs, so the optimum may
# orient the edges differently from the generating tree. The skeleton matches.
print("same skeleton:", dag.skeleton() == truth.skeleton())
