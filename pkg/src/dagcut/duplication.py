"""Edge duplication: the graph form of a timelike wire cut.

Duplicating an edge (a, b) removes it and adds (a, x) and (y, b) for fresh
vertices x, y — a measure point on the source side and a matching
preparation point on the sink side.  A duplicated graph is *acceptable*
when every weakly connected component still contains a directed path from
an original input vertex to an original output vertex.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .dag_core import (
    DagcutError,
    DagGraph,
    Edge,
    INPUT,
    LegalDag,
    OUTPUT,
    Vertex,
    components,
    dag_to_json,
)


class UnknownEdgeError(DagcutError):
    pass


@dataclass(frozen=True)
class CutSet:
    """Edge ids of the source graph selected for duplication."""

    edge_ids: frozenset[int]

    @staticmethod
    def of(ids: Iterable[int]) -> "CutSet":
        return CutSet(frozenset(int(i) for i in ids))

    def __len__(self) -> int:
        return len(self.edge_ids)

    def sorted(self) -> list[int]:
        return sorted(self.edge_ids)


@dataclass(frozen=True)
class DuplicatedDag:
    graph: DagGraph
    origin: LegalDag
    cuts: CutSet
    synthetic_outputs: Mapping[int, int]  # cut edge id -> x vertex id
    synthetic_inputs: Mapping[int, int]  # cut edge id -> y vertex id
    original_input_ids: frozenset[int]
    original_output_ids: frozenset[int]


@dataclass(frozen=True)
class ComponentReport:
    vertex_ids: frozenset[int]
    input_count: int
    output_count: int
    has_path: bool


@dataclass(frozen=True)
class AcceptabilityReport:
    ok: bool
    components: tuple[ComponentReport, ...]

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class ClusterAssignment:
    """Maps component index (in min-vertex-id order) to cluster index < p."""

    cluster_of: tuple[int, ...]
    p: int

    def __post_init__(self):
        used = set(self.cluster_of)
        if used and used != set(range(self.p)):
            raise DagcutError("cluster indices must be exactly 0..p-1 with no empty cluster")


@dataclass(frozen=True)
class ClusterStats:
    input_count: int
    output_count: int
    acceptable: bool


def duplicate(legal: LegalDag, cuts: CutSet) -> DuplicatedDag:
    """Apply the duplication to every edge in cuts.

    Synthetic vertex ids are assigned in ascending cut-edge-id order, so the
    result is independent of any iteration order over the cut set.
    """
    g = legal.graph
    known = {e.id for e in g.edges}
    for eid in cuts.edge_ids:
        if eid not in known:
            raise UnknownEdgeError(f"edge id {eid} not in graph")

    next_vid = max((v.id for v in g.vertices), default=-1) + 1
    next_eid = max((e.id for e in g.edges), default=-1) + 1
    vertices = list(g.vertices)
    edges = [e for e in g.edges if e.id not in cuts.edge_ids]
    xs: dict[int, int] = {}
    ys: dict[int, int] = {}
    for eid in cuts.sorted():
        e = g.edge(eid)
        x = next_vid
        y = next_vid + 1
        next_vid += 2
        vertices.append(Vertex(x, OUTPUT, f"x:{eid}"))
        vertices.append(Vertex(y, INPUT, f"y:{eid}"))
        edges.append(Edge(next_eid, e.src, x))
        edges.append(Edge(next_eid + 1, y, e.dst))
        next_eid += 2
        xs[eid] = x
        ys[eid] = y

    return DuplicatedDag(
        graph=DagGraph(tuple(vertices), tuple(edges)),
        origin=legal,
        cuts=cuts,
        synthetic_outputs=xs,
        synthetic_inputs=ys,
        original_input_ids=frozenset(legal.graph.input_ids()),
        original_output_ids=frozenset(legal.graph.output_ids()),
    )


def duplicated_input_edge_check(legal: LegalDag, edge_id: int) -> bool:
    """True iff the edge leaves an input vertex or enters an output vertex.

    Duplicating such an edge always strands a component without an original
    endpoint, so solvers prune these cuts up front.
    """
    g = legal.graph
    e = g.edge(edge_id)
    return g.vertex(e.src).kind == INPUT or g.vertex(e.dst).kind == OUTPUT


def _forward_reach(g: DagGraph, sources: Iterable[int]) -> set[int]:
    succ: dict[int, list[int]] = {}
    for e in g.edges:
        succ.setdefault(e.src, []).append(e.dst)
    seen = set(sources)
    stack = list(seen)
    while stack:
        v = stack.pop()
        for w in succ.get(v, ()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def is_acceptable(d: DuplicatedDag) -> AcceptabilityReport:
    """Check that each component has an original-input-to-output path.

    Path existence is forward reachability from original inputs intersected
    with the original outputs, examined per component.
    """
    reach = _forward_reach(d.graph, d.original_input_ids)
    reports = []
    ok = True
    for comp in components(d.graph):
        ins = comp & d.original_input_ids
        outs = comp & d.original_output_ids
        has_path = bool(outs & reach)
        # synthetic endpoints count toward component I/O totals
        n_in = len(ins) + sum(1 for y in d.synthetic_inputs.values() if y in comp)
        n_out = len(outs) + sum(1 for x in d.synthetic_outputs.values() if x in comp)
        reports.append(ComponentReport(frozenset(comp), n_in, n_out, has_path))
        ok = ok and has_path
    return AcceptabilityReport(ok=ok, components=tuple(reports))


def cluster_stats(
    d: DuplicatedDag, assignment: ClusterAssignment
) -> list[ClusterStats]:
    """Per-cluster input/output counts and acceptability.

    Counts include synthetic inputs/outputs created by the duplication.
    Every component of a duplicated legal dag balances |In| = |Out|; this is
    asserted here as a sanity check on the duplication machinery.
    """
    report = is_acceptable(d)
    if len(assignment.cluster_of) != len(report.components):
        raise DagcutError(
            f"assignment covers {len(assignment.cluster_of)} components, "
            f"graph has {len(report.components)}")
    for comp in report.components:
        if comp.input_count != comp.output_count:
            raise DagcutError(
                f"component balance violated: {comp.input_count} inputs vs "
                f"{comp.output_count} outputs")
    stats = [[0, 0, True] for _ in range(assignment.p)]
    for comp, cluster in zip(report.components, assignment.cluster_of):
        stats[cluster][0] += comp.input_count
        stats[cluster][1] += comp.output_count
        stats[cluster][2] = stats[cluster][2] and comp.has_path
    return [ClusterStats(i, o, a) for i, o, a in stats]


def duplicated_to_json(d: DuplicatedDag) -> dict:
    doc = dag_to_json(d.graph)
    doc["cuts"] = d.cuts.sorted()
    doc["synthetic"] = {
        "outputs": {str(eid): vid for eid, vid in sorted(d.synthetic_outputs.items())},
        "inputs": {str(eid): vid for eid, vid in sorted(d.synthetic_inputs.items())},
    }
    return doc
