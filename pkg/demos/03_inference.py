"""Fit conditional probability tables and answer prediction queries.

The network is learned from one sample of the five-node tree and evaluated
on a fresh sample.
"""

import numpy as np

from tspbn.hdtsp import CostOracle, kopt_local_search, nearest_neighbor_ordering, static_cost_matrix
from tspbn.inference import evaluate_task, fit_cpts, log_likelihood, query_posterior
from tspbn.scoring import Scorer
from tspbn.structure import Dag, learn_structure
from tspbn.synthetic import five_node_network

train, _ = five_node_network(m=5000, seed=0)
test, _ = five_node_network(m=1000, seed=1)

scorer = Scorer(train, "k2", max_parents=3)
oracle = CostOracle(scorer)
ordering, _ = kopt_local_search(nearest_neighbor_ordering(static_cost_matrix(oracle)), oracle, restarts=5)
dag = learn_structure(scorer, ordering)
cpts = fit_cpts(train, dag, alpha=1.0)

# P(E | A=1): information flows through D, so the posterior is far from uniform.
print("P(E | A=1) =", np.round(query_posterior(cpts, 4, {0: 1}), 3))
print("P(E)       =", np.round(query_posterior(cpts, 4), 3))

# Predict C from A, and predict C from A and B. Knowing B, the direct
# parent, should help.
for evidence in ([0], [0, 1]):
    res = evaluate_task(cpts, test, target=2, evidence_vars=evidence)
    print(f"predict C from {[test.names[e] for e in evidence]}: "
          f"MSE {res['mse']:.4f}, accuracy {res['accuracy']:.3f}")

empty = fit_cpts(train, Dag.empty(5))
print(f"test log-likelihood gain over the empty network: "
      f"{log_likelihood(cpts, test) - log_likelihood(empty, test):.1f} nats")
