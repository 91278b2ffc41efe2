"""Variable orderings as tours of a history-dependent TSP.

Cities are variables plus a virtual depot that every tour starts and ends
at. Visiting variable ``x`` after the set ``S`` of already visited variables
costs ``-best score of x given some parent set drawn from S``; the tour cost
of an ordering is therefore the negated score of the best network consistent
with that ordering. Orderings are plain tuples of variable indices; the depot
is implicit before the first and after the last entry.
"""

from __future__ import annotations

import itertools
import logging
import math
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .scoring import Scorer

log = logging.getLogger(__name__)

MODES = ("greedy", "exact")
DEFAULT_SUBSET_BUDGET = 10**6
DP_MAX_VARS = 20


class BudgetExceeded(RuntimeError):
    """Exact parent-set enumeration would exceed the configured budget."""


def check_ordering(ordering: Sequence[int], n: int) -> tuple[int, ...]:
    perm = tuple(int(v) for v in ordering)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{perm} is not a permutation of 0..{n - 1}")
    return perm


def best_parent_score(scorer: Scorer, x: int, candidates: Iterable[int], k: int | None = None,
                      mode: str = "greedy", max_subsets: int = DEFAULT_SUBSET_BUDGET):
    """Best node score of ``x`` with at most ``k`` parents taken from ``candidates``.

    Returns ``(score, parents)``. ``mode="exact"`` enumerates every subset and
    breaks ties towards the lexicographically smallest parent tuple;
    ``mode="greedy"`` adds the single best improving parent until none helps
    or ``k`` is reached, preferring lower indices on equal gain.
    """
    k = scorer.max_parents if k is None else min(k, scorer.max_parents)
    cands = sorted(set(candidates))
    if x in cands:
        raise ValueError(f"variable {x} cannot be a parent candidate of itself")
    if mode == "exact":
        n_subsets = sum(comb(len(cands), s) for s in range(min(k, len(cands)) + 1))
        if n_subsets > max_subsets:
            raise BudgetExceeded(f"{n_subsets} parent sets exceed the budget of {max_subsets}")
        best, best_ps = -math.inf, ()
        for size in range(min(k, len(cands)) + 1):
            for ps in itertools.combinations(cands, size):
                s = scorer.node_score(x, ps)
                if s > best or (s == best and ps < best_ps):
                    best, best_ps = s, ps
        return best, best_ps
    if mode != "greedy":
        raise ValueError(f"unknown mode {mode!r}")
    parents: tuple[int, ...] = ()
    best = scorer.node_score(x, parents)
    while len(parents) < k:
        step, step_ps = best, None
        for c in cands:
            if c in parents:
                continue
            ps = tuple(sorted(parents + (c,)))
            s = scorer.node_score(x, ps)
            if s > step:
                step, step_ps = s, ps
        if step_ps is None:
            break
        best, parents = step, step_ps
    return best, parents


class CostOracle:
    """``cost(x, S)``: price of appending ``x`` after the visited set ``S``.

    Results are memoized per ``(x, S)``. With ``paper_phi_convention`` the
    depot-to-variable edge is free, so the first city of a tour costs 0
    instead of ``-score(x | {})``.
    """

    def __init__(self, scorer: Scorer, mode: str = "greedy", max_subsets: int = DEFAULT_SUBSET_BUDGET,
                 paper_phi_convention: bool = False):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        self.scorer = scorer
        self.mode = mode
        self.max_subsets = max_subsets
        self.paper_phi_convention = paper_phi_convention
        self._memo: dict[tuple[int, int], tuple[float, tuple[int, ...]]] = {}

    @property
    def n(self) -> int:
        return self.scorer.n_vars

    def best(self, x: int, mask: int):
        key = (x, mask)
        hit = self._memo.get(key)
        if hit is None:
            members = [i for i in range(self.n) if mask >> i & 1]
            hit = best_parent_score(self.scorer, x, members, mode=self.mode, max_subsets=self.max_subsets)
            self._memo[key] = hit
        return hit

    def cost_mask(self, x: int, mask: int) -> float:
        if mask == 0 and self.paper_phi_convention:
            return 0.0
        return -self.best(x, mask)[0]

    def cost(self, x: int, predecessors: Iterable[int] = ()) -> float:
        return self.cost_mask(x, _mask(predecessors))

    def position_costs(self, ordering: Sequence[int], start: int = 0, prefix_mask: int | None = None):
        """Per-position costs of ``ordering[start:]``."""
        mask = _mask(ordering[:start]) if prefix_mask is None else prefix_mask
        out = []
        for x in ordering[start:]:
            out.append(self.cost_mask(x, mask))
            mask |= 1 << x
        return out


def _mask(items: Iterable[int]) -> int:
    m = 0
    for i in items:
        m |= 1 << i
    return m


def tour_cost(ordering: Sequence[int], oracle: CostOracle) -> float:
    """History-dependent cost of the depot-rooted tour; closing edge is free."""
    perm = check_ordering(ordering, oracle.n)
    return math.fsum(oracle.position_costs(perm))


def exact_dp_ordering(oracle: CostOracle, n: int | None = None):
    """Cost-minimal ordering by dynamic programming over visited subsets.

    ``V(S) = min_{x in S} V(S - x) + cost(x, S - x)`` with ``V({}) = 0``;
    ties go to the smallest ``x``. Returns ``(ordering, cost)``.
    """
    n = oracle.n if n is None else n
    if n > DP_MAX_VARS:
        raise ValueError(f"exact DP is limited to {DP_MAX_VARS} variables, got {n}")
    if n != oracle.n:
        raise ValueError(f"oracle covers {oracle.n} variables, not {n}")
    full = (1 << n) - 1
    value = np.full(full + 1, np.inf)
    last = np.full(full + 1, -1, dtype=np.int64)
    value[0] = 0.0
    for mask in range(1, full + 1):
        best, arg = math.inf, -1
        for x in range(n):
            bit = 1 << x
            if mask & bit:
                v = value[mask ^ bit] + oracle.cost_mask(x, mask ^ bit)
                if v < best:
                    best, arg = v, x
        value[mask], last[mask] = best, arg
    perm = []
    mask = full
    while mask:
        x = int(last[mask])
        perm.append(x)
        mask ^= 1 << x
    perm.reverse()
    perm = tuple(perm)
    return perm, tour_cost(perm, oracle)


def _kopt_moves(n: int, level: int):
    """Non-trivial moves as ``(first_changed_index, i, j, k, variant)``."""
    moves = []
    if level == 2:
        for i in range(n - 1):
            for j in range(i + 2, n + 1):
                moves.append((i, i, j, j, 0))
    elif level == 3:
        for i, j, k in itertools.combinations(range(n + 1), 3):
            for variant in range(7):
                if variant == 0 and j - i == 1:
                    continue
                if variant == 1 and k - j == 1:
                    continue
                if variant == 2 and j - i == 1 and k - j == 1:
                    continue
                moves.append((i if variant != 1 else j, i, j, k, variant))
    else:
        raise ValueError(f"level must be 2 or 3, got {level}")
    return moves


def _apply_move(perm: tuple, i: int, j: int, k: int, variant: int) -> tuple:
    # Segments A=perm[:i], B=perm[i:j], C=perm[j:k], D=perm[k:]; 2-opt reverses B.
    a, b, c, d = perm[:i], perm[i:j], perm[j:k], perm[k:]
    rb, rc = b[::-1], c[::-1]
    middle = (rb + c, b + rc, rb + rc, c + b, rc + b, c + rb, rc + rb)[variant]
    return a + middle + d


def kopt_local_search(initial: Sequence[int], oracle: CostOracle, level: int = 3, restarts: int = 1,
                      seed: int = 0, max_no_improve: int | None = None, trace: list | None = None):
    """2-opt / 3-opt descent on the depot-rooted path under history-dependent costs.

    Restart 0 starts from ``initial``, later restarts from a random
    permutation drawn with ``seed + restart``. Moves are proposed in a
    seeded random order and accepted only if the re-evaluated tour cost
    strictly decreases. A restart ends after ``max_no_improve`` consecutive
    rejections, or once every move of the neighborhood has been rejected
    (a local optimum). Returns ``(ordering, cost)`` of the best restart,
    earliest restart winning ties. If ``trace`` is a list, one list of
    accepted incumbent costs per restart is appended to it.
    """
    n = oracle.n
    start = check_ordering(initial, n)
    moves = _kopt_moves(n, level) if n >= 2 else []
    best_perm, best_cost = None, math.inf
    for r in range(max(1, restarts)):
        rng = np.random.default_rng(seed + r)
        perm = start if r == 0 else tuple(int(v) for v in rng.permutation(n))
        costs = oracle.position_costs(perm)
        cur = math.fsum(costs)
        history = [cur]
        order = rng.permutation(len(moves))
        pos = rejects = 0
        while pos < len(order) and (max_no_improve is None or rejects < max_no_improve):
            first, i, j, k, variant = moves[order[pos]]
            pos += 1
            cand = _apply_move(perm, i, j, k, variant)
            # History changes from the first edited position onward; recompute all of it.
            tail = oracle.position_costs(cand, start=first)
            cand_costs = costs[:first] + tail
            total = math.fsum(cand_costs)
            if total < cur:
                perm, costs, cur = cand, cand_costs, total
                history.append(cur)
                order = rng.permutation(len(moves))
                pos = rejects = 0
            else:
                rejects += 1
        log.debug("restart %d: cost %.6f after %d accepted moves", r, cur, len(history) - 1)
        if trace is not None:
            trace.append(history)
        if cur < best_cost:
            best_perm, best_cost = perm, cur
    return best_perm, best_cost


def static_cost_matrix(oracle: CostOracle) -> np.ndarray:
    """History-free ATSP approximation over the depot (index 0) and variables (1..n).

    ``c[i+1, j+1] = cost(j, {i})``, ``c[0, j+1] = cost(j, {})`` (0 under the
    ``paper_phi_convention``), ``c[i+1, 0] = 0`` and the diagonal is ``inf``.
    """
    n = oracle.n
    c = np.zeros((n + 1, n + 1))
    for j in range(n):
        c[0, j + 1] = oracle.cost_mask(j, 0)
        for i in range(n):
            if i != j:
                c[i + 1, j + 1] = oracle.cost_mask(j, 1 << i)
    np.fill_diagonal(c, np.inf)
    return c


def static_tour_cost(matrix: np.ndarray, ordering: Sequence[int]) -> float:
    cities = [0] + [v + 1 for v in ordering] + [0]
    return math.fsum(matrix[a, b] for a, b in zip(cities, cities[1:]))


def nearest_neighbor_ordering(matrix: np.ndarray) -> tuple[int, ...]:
    """Greedy tour from the depot on a static cost matrix; ties pick the lowest index."""
    n = matrix.shape[0] - 1
    current, left, perm = 0, list(range(n)), []
    while left:
        nxt = min(left, key=lambda j: (matrix[current, j + 1], j))
        perm.append(nxt)
        left.remove(nxt)
        current = nxt + 1
    return tuple(perm)
