"""Decomposable structure scores (K2 and BIC) with a memo of node scores."""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.special import gammaln

from .dataset import DiscreteTable

MAX_PARENT_CONFIGS = 2**31
METRICS = ("k2", "bic")


@dataclass(frozen=True, eq=False)
class ContingencyCounts:
    """``counts[j, k]``: rows with parent configuration ``j`` and child state ``k``."""

    counts: np.ndarray

    @property
    def r(self) -> int:
        return self.counts.shape[1]

    @property
    def q(self) -> int:
        return self.counts.shape[0]

    @property
    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)


def parent_set(parents: Iterable[int], child: int | None = None) -> tuple[int, ...]:
    ps = tuple(sorted(set(int(p) for p in parents)))
    if child is not None and child in ps:
        raise ValueError(f"variable {child} cannot be its own parent")
    return ps


def parent_configs(table: DiscreteTable, parents: tuple[int, ...]) -> np.ndarray:
    """Mixed-radix index of each row's parent states, first parent most significant."""
    if not parents:
        return np.zeros(table.n_rows, dtype=np.int64)
    dims = [table.cardinalities[p] for p in parents]
    cols = tuple(table.data[:, p] for p in parents)
    return np.ravel_multi_index(cols, dims)


def count_contingency(table: DiscreteTable, child: int, parents: Iterable[int]) -> ContingencyCounts:
    n = table.n_vars
    parents = parent_set(parents, child)
    for i in (child, *parents):
        if not 0 <= i < n:
            raise IndexError(f"variable index {i} out of range for {n} variables")
    q = 1
    for p in parents:
        q *= table.cardinalities[p]
    if q > MAX_PARENT_CONFIGS:
        raise OverflowError(f"{q} parent configurations exceed the limit of {MAX_PARENT_CONFIGS}")
    r = table.cardinalities[child]
    flat = parent_configs(table, parents) * r + table.data[:, child]
    counts = np.bincount(flat, minlength=q * r).reshape(q, r)
    return ContingencyCounts(counts)


def k2_node_score(counts: ContingencyCounts) -> float:
    # Sum over j of lnG(r) - lnG(N_ij + r) + sum_k lnG(N_ijk + 1)
    n = counts.counts
    r = counts.r
    nij = n.sum(axis=1)
    return float(np.sum(gammaln(r) - gammaln(nij + r)) + np.sum(gammaln(n + 1)))


def bic_node_score(counts: ContingencyCounts, m: int) -> float:
    if m <= 0:
        raise ValueError("BIC needs at least one row")
    n = counts.counts.astype(float)
    nij = n.sum(axis=1, keepdims=True)
    nz = n > 0
    loglik = float(np.sum(n[nz] * np.log((n / np.where(nij > 0, nij, 1.0))[nz])))
    return loglik - 0.5 * counts.q * (counts.r - 1) * np.log(m)


class ScoreCache:
    """Thread-safe memo of ``(child, parents) -> node score``.

    Lookups are lock-free dict reads; insertion happens under a lock and
    stores only finished floats, so readers see either nothing or the final
    value.
    """

    def __init__(self):
        self._scores: dict[tuple[int, tuple[int, ...]], float] = {}
        self._lock = threading.Lock()

    def __len__(self):
        return len(self._scores)

    def __contains__(self, key):
        return key in self._scores

    def get(self, child: int, parents: tuple[int, ...]):
        return self._scores.get((child, parents))

    def put(self, child: int, parents: tuple[int, ...], value: float) -> float:
        with self._lock:
            return self._scores.setdefault((child, parents), value)

    def clear(self):
        with self._lock:
            self._scores.clear()

    def items(self):
        return list(self._scores.items())

    def save(self, path, metric: str = ""):
        # JSON floats round-trip exactly through repr.
        doc = {"format": "tspbn-score-cache", "version": 1, "metric": metric,
               "entries": [[c, list(ps), v] for (c, ps), v in sorted(self._scores.items())]}
        with open(path, "w") as fh:
            json.dump(doc, fh)

    @classmethod
    def load(cls, path) -> "ScoreCache":
        with open(path) as fh:
            doc = json.load(fh)
        if doc.get("format") != "tspbn-score-cache":
            raise ValueError(f"{path}: not a score cache file")
        cache = cls()
        for c, ps, v in doc["entries"]:
            cache._scores[(int(c), tuple(ps))] = float(v)
        return cache


class Scorer:
    """Node scores of one table under one metric, memoized in a :class:`ScoreCache`."""

    def __init__(self, table: DiscreteTable, metric: str = "k2", max_parents: int = 3,
                 cache: ScoreCache | None = None):
        if metric not in METRICS:
            raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")
        if metric == "bic" and table.n_rows == 0:
            raise ValueError("BIC needs at least one row")
        self.table = table
        self.metric = metric
        self.max_parents = max_parents
        self.cache = cache if cache is not None else ScoreCache()

    @property
    def n_vars(self) -> int:
        return self.table.n_vars

    def compute(self, child: int, parents: tuple[int, ...]) -> float:
        counts = count_contingency(self.table, child, parents)
        if self.metric == "k2":
            return k2_node_score(counts)
        return bic_node_score(counts, self.table.n_rows)

    def node_score(self, child: int, parents: Iterable[int] = ()) -> float:
        parents = parent_set(parents, child)
        if len(parents) > self.max_parents:
            raise ValueError(f"{len(parents)} parents exceed the in-degree bound {self.max_parents}")
        value = self.cache.get(child, parents)
        if value is None:
            value = self.cache.put(child, parents, self.compute(child, parents))
        return value


def graph_score(scorer: Scorer, dag) -> float:
    """Sum of node scores given each node's parents in ``dag``."""
    return float(sum(scorer.node_score(v, dag.parents[v]) for v in range(dag.n)))
