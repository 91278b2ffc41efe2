"""Order-constrained greedy structure learning and network serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass
from graphlib import CycleError, TopologicalSorter
from pathlib import Path
from typing import Sequence

from .hdtsp import best_parent_score, check_ordering
from .scoring import Scorer

NETWORK_FORMAT = "tspbn-network"
NETWORK_VERSION = 1


@dataclass(frozen=True)
class Dag:
    n: int
    parents: tuple[tuple[int, ...], ...]
    ordering: tuple[int, ...] | None = None

    def __post_init__(self):
        parents = tuple(tuple(sorted(set(int(p) for p in ps))) for ps in self.parents)
        if len(parents) != self.n:
            raise ValueError(f"expected {self.n} parent sets, got {len(parents)}")
        for v, ps in enumerate(parents):
            if v in ps or any(not 0 <= p < self.n for p in ps):
                raise ValueError(f"invalid parents {ps} for node {v}")
        object.__setattr__(self, "parents", parents)
        if self.ordering is not None:
            order = check_ordering(self.ordering, self.n)
            object.__setattr__(self, "ordering", order)
            pos = {v: i for i, v in enumerate(order)}
            for v, ps in enumerate(parents):
                if any(pos[p] > pos[v] for p in ps):
                    raise ValueError(f"a parent of node {v} comes after it in the ordering")
        self.topological_order()

    @classmethod
    def empty(cls, n: int, ordering=None) -> "Dag":
        return cls(n, ((),) * n, ordering)

    @classmethod
    def from_edges(cls, n: int, edges, ordering=None) -> "Dag":
        parents = [[] for _ in range(n)]
        for u, v in edges:
            parents[v].append(u)
        return cls(n, tuple(tuple(p) for p in parents), ordering)

    def edges(self) -> list[tuple[int, int]]:
        return sorted((p, v) for v, ps in enumerate(self.parents) for p in ps)

    def skeleton(self) -> frozenset:
        return frozenset(frozenset(e) for e in self.edges())

    def topological_order(self) -> tuple[int, ...]:
        try:
            return tuple(TopologicalSorter({v: ps for v, ps in enumerate(self.parents)}).static_order())
        except CycleError as exc:
            raise ValueError(f"graph has a cycle: {exc.args[1]}") from None

    @property
    def max_in_degree(self) -> int:
        return max((len(ps) for ps in self.parents), default=0)


def learn_structure(scorer: Scorer, ordering: Sequence[int], mode: str = "greedy") -> Dag:
    """Pick each node's parents greedily among the nodes preceding it."""
    order = check_ordering(ordering, scorer.n_vars)
    parents = [()] * scorer.n_vars
    for i, v in enumerate(order):
        _, parents[v] = best_parent_score(scorer, v, order[:i], mode=mode)
    return Dag(scorer.n_vars, tuple(parents), order)


def to_dot(dag: Dag, names: Sequence[str] | None = None, name: str = "network") -> str:
    names = list(names) if names is not None else [f"X{i}" for i in range(dag.n)]
    lines = [f"digraph {_dot_id(name)} {{"]
    lines += [f"  {_dot_id(nm)};" for nm in names]
    lines += [f"  {_dot_id(names[u])} -> {_dot_id(names[v])};" for u, v in dag.edges()]
    lines.append("}")
    return "\n".join(lines) + "\n"


def _dot_id(s: str) -> str:
    if s.isidentifier():
        return s
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def network_document(dag: Dag, names: Sequence[str] | None = None, metric: str | None = None,
                     score: float | None = None) -> dict:
    names = list(names) if names is not None else [f"X{i}" for i in range(dag.n)]
    return {
        "format": NETWORK_FORMAT,
        "version": NETWORK_VERSION,
        "nodes": names,
        "parents": {names[v]: [names[p] for p in ps] for v, ps in enumerate(dag.parents)},
        "ordering": None if dag.ordering is None else [names[v] for v in dag.ordering],
        "metric": metric,
        "score": score,
    }


def export_dag(dag: Dag, path, names: Sequence[str] | None = None, format: str = "text",
               metric: str | None = None, score: float | None = None):
    """Write ``dag`` as DOT (``format="dot"``) or as the JSON network document."""
    if format == "dot":
        text = to_dot(dag, names)
    elif format == "text":
        text = json.dumps(network_document(dag, names, metric, score), indent=2) + "\n"
    else:
        raise ValueError(f"unknown format {format!r}")
    Path(path).write_text(text)


def read_dag(path):
    """Load a JSON network document; returns ``(dag, document)``."""
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != NETWORK_FORMAT:
        raise ValueError(f"{path}: not a {NETWORK_FORMAT} file")
    if doc.get("version") != NETWORK_VERSION:
        raise ValueError(f"{path}: unsupported version {doc.get('version')}")
    names = doc["nodes"]
    idx = {nm: i for i, nm in enumerate(names)}
    parents = tuple(tuple(idx[p] for p in doc["parents"][nm]) for nm in names)
    ordering = None if doc["ordering"] is None else tuple(idx[nm] for nm in doc["ordering"])
    return Dag(len(names), parents, ordering), doc
