"""Parameter fitting, exact posterior queries and the evaluation protocol."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .dataset import DiscreteTable
from .scoring import count_contingency, parent_configs
from .structure import Dag

MAX_QUERY_VARS = 25


class ZeroEvidenceError(ValueError):
    """The evidence has probability zero under the network."""


@dataclass(frozen=True, eq=False)
class CptSet:
    """One ``q_v x r_v`` table per node; rows follow the mixed-radix parent encoding."""

    dag: Dag
    cardinalities: tuple[int, ...]
    tables: tuple[np.ndarray, ...]
    alpha: float = 1.0

    def factor(self, v: int) -> np.ndarray:
        """CPT of ``v`` reshaped to one axis per parent followed by ``v``'s own axis."""
        shape = [self.cardinalities[p] for p in self.dag.parents[v]] + [self.cardinalities[v]]
        return self.tables[v].reshape(shape)


def fit_cpts(table: DiscreteTable, dag: Dag, alpha: float = 1.0) -> CptSet:
    """``P(x=k | j) = (N_jk + alpha) / (N_j + alpha r)``; unseen configs are uniform when ``alpha == 0``."""
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    if dag.n != table.n_vars:
        raise ValueError(f"network has {dag.n} nodes but the table has {table.n_vars} columns")
    tables = []
    for v in range(dag.n):
        n = count_contingency(table, v, dag.parents[v]).counts.astype(float)
        r = n.shape[1]
        num = n + alpha
        den = num.sum(axis=1, keepdims=True)
        probs = np.divide(num, den, out=np.full_like(num, 1.0 / r), where=den > 0)
        tables.append(probs)
    return CptSet(dag, table.cardinalities, tuple(tables), alpha)


def _ancestral_closure(dag: Dag, nodes) -> list[int]:
    seen, stack = set(), list(nodes)
    while stack:
        v = stack.pop()
        if v not in seen:
            seen.add(v)
            stack.extend(dag.parents[v])
    return sorted(seen)


def query_posterior(cpts: CptSet, target: int, evidence: Mapping[int, int] | None = None) -> np.ndarray:
    """Exact ``P(target | evidence)`` by summing the factorized joint.

    Nodes that are not ancestors of the target or the evidence sum out to one
    and are skipped; the remaining sum of products is contracted with einsum.
    """
    evidence = dict(evidence or {})
    dag = cpts.dag
    if dag.n > MAX_QUERY_VARS:
        raise ValueError(f"exact queries are limited to {MAX_QUERY_VARS} variables")
    if target in evidence:
        raise ValueError("target cannot also be evidence")
    for v, s in evidence.items():
        if not 0 <= s < cpts.cardinalities[v]:
            raise ValueError(f"state {s} out of range for variable {v}")
    operands = []
    for v in _ancestral_closure(dag, [target, *evidence]):
        axes = list(dag.parents[v]) + [v]
        factor = cpts.factor(v)
        index = tuple(evidence[a] if a in evidence else slice(None) for a in axes)
        operands += [factor[index], [a for a in axes if a not in evidence]]
    joint = np.einsum(*operands, [target], optimize=True)
    z = joint.sum()
    if not z > 0:
        raise ZeroEvidenceError(f"evidence {evidence} has zero probability")
    return joint / z


class _PosteriorCache:
    def __init__(self, cpts, target, evidence_vars):
        self.cpts, self.target, self.evidence_vars = cpts, target, list(evidence_vars)
        self._memo = {}

    def prob_one(self, test: DiscreteTable) -> np.ndarray:
        out = np.empty(test.n_rows)
        for i, row in enumerate(test.data[:, self.evidence_vars].tolist()):
            key = tuple(row)
            p = self._memo.get(key)
            if p is None:
                p = self._memo[key] = query_posterior(self.cpts, self.target, dict(zip(self.evidence_vars, key)))[1]
            out[i] = p
        return out


def _check_task(cpts, target, evidence_vars):
    if cpts.cardinalities[target] != 2:
        raise ValueError("the evaluation protocol needs a binary target")
    if target in evidence_vars:
        raise ValueError("target cannot be an evidence variable")


def evaluate_mse(cpts: CptSet, test: DiscreteTable, target: int, evidence_vars: Sequence[int]) -> float:
    """Mean over test rows of ``(P(target=1 | evidence) - y)^2``."""
    _check_task(cpts, target, evidence_vars)
    if test.n_rows == 0:
        return 0.0
    p = _PosteriorCache(cpts, target, evidence_vars).prob_one(test)
    return float(np.mean((p - test.data[:, target]) ** 2))


def evaluate_accuracy(cpts: CptSet, test: DiscreteTable, target: int, evidence_vars: Sequence[int],
                      threshold: float = 0.5) -> float:
    """Fraction of rows where ``P(target=1 | evidence) > threshold`` matches ``y == 1``."""
    _check_task(cpts, target, evidence_vars)
    if test.n_rows == 0:
        return 0.0
    p = _PosteriorCache(cpts, target, evidence_vars).prob_one(test)
    return float(np.mean((p > threshold) == (test.data[:, target] == 1)))


def evaluate_task(cpts: CptSet, test: DiscreteTable, target: int, evidence_vars: Sequence[int],
                  threshold: float = 0.5) -> dict:
    """MSE, thresholded accuracy and confusion counts for one prediction task."""
    _check_task(cpts, target, evidence_vars)
    p = _PosteriorCache(cpts, target, evidence_vars).prob_one(test)
    y = test.data[:, target] == 1
    pred = p > threshold
    n = test.n_rows
    return {
        "n_test": n,
        "mse": float(np.mean((p - y) ** 2)) if n else 0.0,
        "accuracy": float(np.mean(pred == y)) if n else 0.0,
        "confusion": {
            "tp": int(np.sum(pred & y)), "fp": int(np.sum(pred & ~y)),
            "tn": int(np.sum(~pred & ~y)), "fn": int(np.sum(~pred & y)),
        },
    }


def log_likelihood(cpts: CptSet, table: DiscreteTable) -> float:
    total = 0.0
    with np.errstate(divide="ignore"):
        for v in range(cpts.dag.n):
            j = parent_configs(table, cpts.dag.parents[v])
            total += float(np.sum(np.log(cpts.tables[v][j, table.data[:, v]])))
    return total


def forward_sample(cpts: CptSet, m: int, rng: np.random.Generator) -> np.ndarray:
    """Ancestral sampling of ``m`` complete rows."""
    data = np.zeros((m, cpts.dag.n), dtype=np.int64)
    for v in cpts.dag.topological_order():
        ps = cpts.dag.parents[v]
        if ps:
            dims = [cpts.cardinalities[p] for p in ps]
            j = np.ravel_multi_index(tuple(data[:, p] for p in ps), dims)
        else:
            j = np.zeros(m, dtype=np.int64)
        cum = np.cumsum(cpts.tables[v], axis=1)[j]
        u = rng.random(m)[:, None]
        data[:, v] = np.minimum((u >= cum).sum(axis=1), cpts.cardinalities[v] - 1)
    return data
