"""Indexed bitmask view of a legal dag for the solver inner loops.

Vertices are re-indexed 0..n-1; vertex sets are Python ints used as
bitmasks, which keeps per-candidate component/reachability checks cheap for
the graph sizes this toolkit targets (hundreds of vertices).  Solvers work
on this view; the duplication module remains the independent reference
implementation used to verify their certificates.
"""

from __future__ import annotations

from dataclasses import dataclass

from .dag_core import INPUT, LegalDag, OUTPUT


@dataclass
class BitGraph:
    n: int
    vertex_ids: list[int]  # index -> original vertex id
    index_of: dict[int, int]
    edge_ids: list[int]  # edge position -> original edge id
    edge_pos: dict[int, int]
    edge_ends: list[tuple[int, int]]  # position -> (src index, dst index)
    adj: list[int]  # undirected neighbor mask per vertex index
    out_adj: list[int]
    inputs_mask: int
    outputs_mask: int
    io_edge_positions: set[int]  # edges touching an input or output vertex


def bitgraph(legal: LegalDag) -> BitGraph:
    g = legal.graph
    vertex_ids = sorted(v.id for v in g.vertices)
    index_of = {vid: i for i, vid in enumerate(vertex_ids)}
    n = len(vertex_ids)
    adj = [0] * n
    out_adj = [0] * n
    edge_ids, edge_ends = [], []
    edge_pos = {}
    kind = {v.id: v.kind for v in g.vertices}
    io_edges = set()
    for e in sorted(g.edges, key=lambda e: e.id):
        a, b = index_of[e.src], index_of[e.dst]
        pos = len(edge_ids)
        edge_pos[e.id] = pos
        edge_ids.append(e.id)
        edge_ends.append((a, b))
        adj[a] |= 1 << b
        adj[b] |= 1 << a
        out_adj[a] |= 1 << b
        if kind[e.src] == INPUT or kind[e.dst] == OUTPUT:
            io_edges.add(pos)
    inputs_mask = 0
    outputs_mask = 0
    for v in g.vertices:
        if v.kind == INPUT:
            inputs_mask |= 1 << index_of[v.id]
        elif v.kind == OUTPUT:
            outputs_mask |= 1 << index_of[v.id]
    return BitGraph(
        n=n,
        vertex_ids=vertex_ids,
        index_of=index_of,
        edge_ids=edge_ids,
        edge_pos=edge_pos,
        edge_ends=edge_ends,
        adj=adj,
        out_adj=out_adj,
        inputs_mask=inputs_mask,
        outputs_mask=outputs_mask,
        io_edge_positions=io_edges,
    )


def component_masks(bg: BitGraph, cut_positions: tuple[int, ...]) -> list[int]:
    """Weakly connected components (as bitmasks) after removing the cuts."""
    adj = bg.adj
    if cut_positions:
        adj = list(adj)
        for pos in cut_positions:
            a, b = bg.edge_ends[pos]
            adj[a] &= ~(1 << b)
            adj[b] &= ~(1 << a)
    remaining = (1 << bg.n) - 1
    comps = []
    while remaining:
        seed = remaining & -remaining
        comp = seed
        frontier = seed
        while frontier:
            grow = 0
            m = frontier
            while m:
                bit = m & -m
                m ^= bit
                grow |= adj[bit.bit_length() - 1]
            frontier = grow & ~comp
            comp |= frontier
        comps.append(comp)
        remaining &= ~comp
    return comps


def forward_reach(bg: BitGraph, cut_positions: tuple[int, ...]) -> int:
    """Vertices reachable from original inputs along uncut directed edges."""
    out_adj = bg.out_adj
    if cut_positions:
        out_adj = list(out_adj)
        for pos in cut_positions:
            a, b = bg.edge_ends[pos]
            out_adj[a] &= ~(1 << b)
    reach = bg.inputs_mask
    frontier = reach
    while frontier:
        grow = 0
        m = frontier
        while m:
            bit = m & -m
            m ^= bit
            grow |= out_adj[bit.bit_length() - 1]
        frontier = grow & ~reach
        reach |= frontier
    return reach


def evaluate_cut(
    bg: BitGraph, cut_positions: tuple[int, ...]
) -> tuple[bool, list[int], list[int], bool]:
    """(acceptable, component input counts, component masks, redundant).

    Input counts include the synthetic input each cut edge contributes to
    its head's component.  `redundant` is True when some cut edge fails to
    separate its endpoints, in which case a smaller cut set achieves the
    same partition.
    """
    comps = component_masks(bg, cut_positions)
    reach = forward_reach(bg, cut_positions)
    label = {}
    for ci, comp in enumerate(comps):
        m = comp
        while m:
            bit = m & -m
            m ^= bit
            label[bit.bit_length() - 1] = ci
    sizes = []
    acceptable = True
    for comp in comps:
        if not (comp & bg.outputs_mask & reach):
            acceptable = False
        sizes.append((comp & bg.inputs_mask).bit_count())
    redundant = False
    for pos in cut_positions:
        a, b = bg.edge_ends[pos]
        if label[a] == label[b]:
            redundant = True
        sizes[label[b]] += 1
    return acceptable, sizes, comps, redundant


def interior_positions(bg: BitGraph) -> list[int]:
    """Edge positions that are neither input nor output edges."""
    return [p for p in range(len(bg.edge_ids)) if p not in bg.io_edge_positions]
