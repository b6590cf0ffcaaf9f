"""Exact decision and optimization solver for graph duplication.

GD(G, k, alpha, beta) asks whether at most beta edge duplications split a
legal dag into at most alpha clusters, every component acceptable and every
cluster holding at most k inputs (and, by component balance, k outputs).

The solver enumerates candidate cut sets by size and then lexicographic
edge-id order, so the first certificate found is also one with the fewest
duplications.  Pruning never changes answers: input/output edges are
skipped because duplicating them is never acceptable, prefixes that are
already unacceptable cannot be repaired by further cuts, and cut sets with
an edge that fails to separate its endpoints are covered by the smaller set
without it.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations, islice
from typing import Sequence

from ._bitgraph import BitGraph, bitgraph, evaluate_cut, interior_positions
from .dag_core import DagcutError, LegalDag
from .duplication import (
    ClusterAssignment,
    CutSet,
    cluster_stats,
    duplicate,
    is_acceptable,
)


class SearchBudgetExceeded(DagcutError):
    """Raised when a node budget is set and the search exhausts it."""


@dataclass(frozen=True)
class GdInstance:
    graph: LegalDag
    k: int
    alpha: int
    beta: int

    def __post_init__(self):
        if self.k < 1 or self.alpha < 1 or self.beta < 0:
            raise DagcutError("GD requires k >= 1, alpha >= 1, beta >= 0")


@dataclass(frozen=True)
class GdSolution:
    instance: GdInstance
    cuts: CutSet
    assignment: ClusterAssignment
    cluster_inputs: tuple[int, ...]
    witness_kind: str  # "decision" | "optimal"

    @property
    def beta_used(self) -> int:
        return len(self.cuts)


def pack_components(
    sizes: Sequence[int], k: int, alpha: int
) -> ClusterAssignment | None:
    """Group components (given by input count) into <= alpha clusters of
    capacity k.  Exact depth-first search, largest-first, with symmetry
    breaking on equal cluster loads and a total-capacity bound.
    """
    n = len(sizes)
    if any(s > k for s in sizes):
        return None
    if n == 0:
        return ClusterAssignment((), 0)
    order = sorted(range(n), key=lambda i: (-sizes[i], i))
    loads: list[int] = []
    placed: list[int] = [0] * n
    total = sum(sizes)

    def dfs(pos: int, remaining: int) -> bool:
        if pos == n:
            return True
        if remaining > sum(k - l for l in loads) + (alpha - len(loads)) * k:
            return False
        s = sizes[order[pos]]
        tried = set()
        for ci, load in enumerate(loads):
            if load + s > k or load in tried:
                continue
            tried.add(load)
            loads[ci] = load + s
            placed[order[pos]] = ci
            if dfs(pos + 1, remaining - s):
                return True
            loads[ci] = load
        if len(loads) < alpha:
            loads.append(s)
            placed[order[pos]] = len(loads) - 1
            if dfs(pos + 1, remaining - s):
                return True
            loads.pop()
        return False

    if not dfs(0, total):
        return None
    # canonical labels: clusters numbered by first appearance in component order
    relabel: dict[int, int] = {}
    cluster_of = []
    for ci in placed:
        if ci not in relabel:
            relabel[ci] = len(relabel)
        cluster_of.append(relabel[ci])
    return ClusterAssignment(tuple(cluster_of), len(relabel))


def _split_lower_bound(sizes: list[int], comps: list[int], k: int,
                       future: list[int], bg: BitGraph) -> int | None:
    """Minimum further cuts needed so every component fits k inputs.

    A component with I inputs split j times has I + j inputs spread over at
    most j + 1 parts, so j >= ceil((I - k) / (k - 1)).  Returns None when
    some oversized component cannot be split enough with the cut positions
    still available to this subtree.
    """
    total = 0
    oversized = [ci for ci, s in enumerate(sizes) if s > k]
    if not oversized:
        return 0
    if k == 1:
        return None
    avail = [0] * len(comps)
    if future:
        for pos in future:
            a, _b = bg.edge_ends[pos]
            bit = 1 << a
            for ci in oversized:
                if comps[ci] & bit:
                    avail[ci] += 1
                    break
    for ci in oversized:
        need = math.ceil((sizes[ci] - k) / (k - 1))
        if need > avail[ci]:
            return None
        total += need
    return total


def solve_decision(
    inst: GdInstance,
    prune_io_edges: bool = True,
    threads: int = 1,
    node_budget: int | None = None,
) -> GdSolution | None:
    """Decide GD(G, k, alpha, beta); returns a certificate or None for NO.

    Candidate cut sets are scanned by size and then lexicographic edge-id
    order; the first success is returned, so a certificate always uses the
    minimum number of duplications among all certificates.
    """
    bg = bitgraph(inst.graph)
    if prune_io_edges:
        candidates = interior_positions(bg)
    else:
        candidates = list(range(len(bg.edge_ids)))
    budget = [node_budget if node_budget is not None else -1]

    def leaf(positions: tuple[int, ...]) -> GdSolution | None:
        if budget[0] == 0:
            raise SearchBudgetExceeded(
                f"node budget exhausted at GD(k={inst.k}, alpha={inst.alpha}, "
                f"beta={inst.beta})")
        budget[0] -= 1
        acceptable, sizes, _comps, redundant = evaluate_cut(bg, positions)
        if redundant or not acceptable or any(s > inst.k for s in sizes):
            return None
        assignment = pack_components(sizes, inst.k, inst.alpha)
        if assignment is None:
            return None
        cuts = CutSet.of(bg.edge_ids[p] for p in positions)
        inputs = [0] * assignment.p
        for ci, cl in enumerate(assignment.cluster_of):
            inputs[cl] += sizes[ci]
        return GdSolution(inst, cuts, assignment, tuple(inputs), "decision")

    def dfs(prefix: tuple[int, ...], start: int, remaining: int) -> GdSolution | None:
        if remaining == 0:
            return leaf(prefix)
        last = len(candidates) - remaining
        for i in range(start, last + 1):
            chosen = prefix + (candidates[i],)
            if remaining >= 2:
                if budget[0] == 0:
                    raise SearchBudgetExceeded("node budget exhausted")
                budget[0] -= 1
                acceptable, sizes, comps, _red = evaluate_cut(bg, chosen)
                if not acceptable:
                    continue
                lb = _split_lower_bound(sizes, comps, inst.k,
                                        candidates[i + 1:], bg)
                if lb is None or lb > remaining - 1:
                    continue
            found = dfs(chosen, i + 1, remaining - 1)
            if found is not None:
                return found
        return None

    for size in range(0, inst.beta + 1):
        if size > len(candidates):
            break
        if threads > 1 and size >= 1:
            found = _scan_parallel(candidates, size, leaf, threads)
        else:
            found = dfs((), 0, size)
        if found is not None:
            return found
    return None


def _scan_parallel(candidates, size, leaf, threads, chunk=512):
    """Order-preserving parallel scan: chunks are evaluated concurrently but
    reduced in enumeration order, so the certificate matches a sequential run.
    """
    combos = combinations(candidates, size)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        while True:
            batch = list(islice(combos, chunk * threads))
            if not batch:
                return None
            for result in pool.map(leaf, batch):
                if result is not None:
                    return result


def optimize_min_beta(
    graph: LegalDag,
    k: int,
    alpha: int,
    beta_max: int,
    prune_io_edges: bool = True,
    threads: int = 1,
    node_budget: int | None = None,
) -> tuple[int, GdSolution] | None:
    """Smallest beta <= beta_max for which GD answers YES.

    Size-ordered enumeration makes a single decision run at beta_max return
    a minimum-size certificate.
    """
    inst = GdInstance(graph, k, alpha, beta_max)
    sol = solve_decision(inst, prune_io_edges=prune_io_edges, threads=threads,
                         node_budget=node_budget)
    if sol is None:
        return None
    best = GdSolution(inst, sol.cuts, sol.assignment, sol.cluster_inputs, "optimal")
    return best.beta_used, best


def verify_solution(sol: GdSolution) -> bool:
    """Independent certificate check through the duplication machinery.

    Re-derives components, acceptability and cluster statistics from the
    actual duplicated graph; never reuses the search's bitmask kernels.
    """
    inst = sol.instance
    if len(sol.cuts) > inst.beta:
        return False
    d = duplicate(inst.graph, sol.cuts)
    report = is_acceptable(d)
    if not report.ok:
        return False
    if sol.assignment.p > inst.alpha:
        return False
    stats = cluster_stats(d, sol.assignment)
    for st in stats:
        if st.input_count > inst.k or st.input_count != st.output_count:
            return False
        if not st.acceptable:
            return False
    return tuple(st.input_count for st in stats) == sol.cluster_inputs
