"""Small synthetic datasets with known structure."""

from __future__ import annotations

import numpy as np

from .dataset import DiscreteTable
from .inference import CptSet, forward_sample
from .structure import Dag


def random_table(rng: np.random.Generator, n: int, m: int, max_card: int = 3) -> DiscreteTable:
    """Independent uniform columns with random cardinalities in ``[2, max_card]``."""
    cards = tuple(int(c) for c in rng.integers(2, max_card + 1, size=n))
    data = np.column_stack([rng.integers(0, c, size=m) for c in cards]) if n else np.zeros((m, 0))
    return DiscreteTable(data, cards)


def random_dag(rng: np.random.Generator, n: int, edge_prob: float = 0.4, max_parents: int = 3) -> Dag:
    order = rng.permutation(n)
    parents = [()] * n
    for i, v in enumerate(order):
        cands = [int(u) for u in order[:i] if rng.random() < edge_prob]
        parents[v] = tuple(cands[:max_parents])
    return Dag(n, tuple(parents))


def random_network_table(rng: np.random.Generator, n: int, m: int, max_card: int = 3,
                         edge_prob: float = 0.4, concentration: float = 0.5) -> DiscreteTable:
    """Rows sampled from a random network with Dirichlet-drawn CPTs."""
    dag = random_dag(rng, n, edge_prob)
    cards = tuple(int(c) for c in rng.integers(2, max_card + 1, size=n))
    tables = []
    for v in range(n):
        q = int(np.prod([cards[p] for p in dag.parents[v]], dtype=np.int64))
        tables.append(rng.dirichlet([concentration] * cards[v], size=q))
    cpts = CptSet(dag, cards, tuple(tables))
    return DiscreteTable(forward_sample(cpts, m, rng), cards)


def copy_chain(m: int = 1000, length: int = 3, seed: int = 0, names=None, noise: float = 0.0) -> DiscreteTable:
    """Binary chain where every variable copies the previous one.

    With ``noise > 0`` each copy flips independently with that probability,
    which makes the immediate predecessor the unique best single parent.
    """
    rng = np.random.default_rng(seed)
    cols = [rng.integers(0, 2, size=m)]
    for _ in range(length - 1):
        cols.append(cols[-1] ^ (rng.random(m) < noise))
    data = np.column_stack(cols)
    names = tuple(names) if names else tuple("ABCDEFGHIJ"[:length])
    return DiscreteTable(data, (2,) * length, names)


def noisy_binary_network(dag: Dag, strength: float = 0.9) -> CptSet:
    """Binary CPTs in which a child agrees with the parity of its parents with probability ``strength``.

    Root nodes are uniform.
    """
    tables = []
    for v in range(dag.n):
        ps = dag.parents[v]
        if not ps:
            tables.append(np.array([[0.5, 0.5]]))
            continue
        rows = []
        for j in range(2 ** len(ps)):
            parity = bin(j).count("1") % 2
            rows.append([strength, 1 - strength] if parity == 0 else [1 - strength, strength])
        tables.append(np.array(rows))
    return CptSet(dag, (2,) * dag.n, tuple(tables))


FIVE_NODE_EDGES = ((0, 1), (1, 2), (0, 3), (3, 4))  # A->B, B->C, A->D, D->E


def five_node_network(m: int = 10_000, seed: int = 0, strength: float = 0.9):
    """Sample the A->B->C, A->D->E tree; returns ``(table, true_dag)``."""
    dag = Dag.from_edges(5, FIVE_NODE_EDGES)
    cpts = noisy_binary_network(dag, strength)
    data = forward_sample(cpts, m, np.random.default_rng(seed))
    return DiscreteTable(data, (2,) * 5, tuple("ABCDE")), dag
