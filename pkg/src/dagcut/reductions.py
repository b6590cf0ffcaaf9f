"""3-partition reduction families as executable test instances.

Each generator builds a legal dag whose GD answer matches a 3-partition
instance, together with the matching (k, alpha, beta) parameters and, where
duplications are required, the designated cut set a matching certificate
uses.  The families:

  g0         forest of 3m stars, beta = 0
  gbeta      g0 plus beta copies of a two-hub gadget whose bridge edge is
             the only interior edge, beta >= 1
  connected  a single caterpillar: star leaves alternating with wide
             connector hubs on a backbone; cutting the 6m-2 backbone edges
             is forced
  two-legal  any of the above with every hub expanded into a chain of
             2-in/2-out vertices

The 3-partition oracle is an exhaustive search, independent of the GD
solver, so reduction soundness becomes a cross-check between two unrelated
code paths.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterator

from .dag_core import (
    DagcutError,
    DagGraph,
    Edge,
    GATE,
    INPUT,
    LegalDag,
    OUTPUT,
    Vertex,
    validate_legal,
)
from .gd_enum import GdInstance


class InvariantViolation(DagcutError):
    pass


@dataclass(frozen=True)
class ThreePartitionInstance:
    m: int
    B: int
    A: tuple[int, ...]

    def __post_init__(self):
        if self.m < 1 or self.B < 1:
            raise InvariantViolation("m and B must be positive")
        if len(self.A) != 3 * self.m:
            raise InvariantViolation(f"need 3m = {3 * self.m} elements, got {len(self.A)}")
        if sum(self.A) != self.m * self.B:
            raise InvariantViolation(f"sum(A) = {sum(self.A)} != m*B = {self.m * self.B}")
        for a in self.A:
            if not (self.B < 4 * a and 2 * a < self.B):
                raise InvariantViolation(f"element {a} outside (B/4, B/2) for B={self.B}")


@dataclass(frozen=True)
class ReductionArtifact:
    gd_instance: GdInstance
    family: str  # "g0" | "gbeta" | "connected" | "two-legalized"
    provenance: ThreePartitionInstance
    designated_cuts: tuple[int, ...]  # edge ids of a known certificate ("" hints only)
    expected_yes_layout: tuple[int, ...] | None  # expected cluster input counts


def oracle_3partition(
    inst: ThreePartitionInstance,
) -> list[tuple[int, int, int]] | None:
    """Exhaustively partition A into m triples summing to B; None for NO."""
    values = sorted(inst.A)

    def search(remaining: tuple[int, ...]) -> list[tuple[int, int, int]] | None:
        if not remaining:
            return []
        first = remaining[0]
        rest = remaining[1:]
        seen = set()
        for i, j in combinations(range(len(rest)), 2):
            pair = (rest[i], rest[j])
            if pair in seen:
                continue
            seen.add(pair)
            if first + rest[i] + rest[j] != inst.B:
                continue
            next_remaining = tuple(x for idx, x in enumerate(rest) if idx not in (i, j))
            tail = search(next_remaining)
            if tail is not None:
                return [(first, rest[i], rest[j])] + tail
        return None

    return search(tuple(values))


def enumerate_instances(m: int, b_max: int) -> Iterator[ThreePartitionInstance]:
    """All valid 3-partition instances with the given m and B <= b_max."""
    from itertools import combinations_with_replacement

    for B in range(1, b_max + 1):
        lo = B // 4 + 1
        hi = (B - 1) // 2  # largest a with 2a < B
        if lo > hi:
            continue
        for combo in combinations_with_replacement(range(lo, hi + 1), 3 * m):
            if sum(combo) == m * B:
                yield ThreePartitionInstance(m, B, combo)


class _Builder:
    """Incremental legal-dag builder with dense ids."""

    def __init__(self):
        self.vertices: list[Vertex] = []
        self.edges: list[Edge] = []

    def vertex(self, kind: str, label: str) -> int:
        vid = len(self.vertices)
        self.vertices.append(Vertex(vid, kind, label))
        return vid

    def edge(self, src: int, dst: int) -> int:
        eid = len(self.edges)
        self.edges.append(Edge(eid, src, dst))
        return eid

    def star(self, label: str, fan_in: int, fan_out: int) -> tuple[int, list[int], list[int]]:
        hub = self.vertex(GATE, label)
        in_edges = []
        for j in range(fan_in):
            v = self.vertex(INPUT, f"{label}.in{j}")
            in_edges.append(self.edge(v, hub))
        out_edges = []
        for j in range(fan_out):
            v = self.vertex(OUTPUT, f"{label}.out{j}")
            out_edges.append(self.edge(hub, v))
        return hub, in_edges, out_edges

    def legal(self) -> LegalDag:
        return validate_legal(DagGraph(tuple(self.vertices), tuple(self.edges)))


def gen_g0(inst: ThreePartitionInstance) -> ReductionArtifact:
    """Forest of 3m stars; star i has a_i inputs and a_i outputs.

    GD(G0, B, m, 0) is YES exactly when the 3-partition instance is: a
    cluster of stars i, j, l fits the input budget B iff a_i+a_j+a_l <= B,
    and the total forces equality.
    """
    b = _Builder()
    for i, a in enumerate(inst.A):
        b.star(f"s{i}", a, a)
    graph = b.legal()
    gd = GdInstance(graph, k=inst.B, alpha=inst.m, beta=0)
    return ReductionArtifact(gd, "g0", inst, (), (inst.B,) * inst.m)


def _gadget(b: _Builder, tag: str, B: int) -> tuple[int, list[int]]:
    """Two-hub gadget: t1 takes B inputs, t2 takes B-1 inputs plus the
    bridge (t1, t2); t1 emits B-1 outputs, t2 emits B.  Both halves hold
    exactly B inputs once the bridge is duplicated. Returns (bridge edge id,
    all edge ids)."""
    eids = []
    t1 = b.vertex(GATE, f"{tag}.t1")
    t2 = b.vertex(GATE, f"{tag}.t2")
    for j in range(B):
        v = b.vertex(INPUT, f"{tag}.a1.{j}")
        eids.append(b.edge(v, t1))
    for j in range(B - 1):
        v = b.vertex(INPUT, f"{tag}.a2.{j}")
        eids.append(b.edge(v, t2))
    bridge = b.edge(t1, t2)
    eids.append(bridge)
    for j in range(B - 1):
        v = b.vertex(OUTPUT, f"{tag}.b1.{j}")
        eids.append(b.edge(t1, v))
    for j in range(B):
        v = b.vertex(OUTPUT, f"{tag}.b2.{j}")
        eids.append(b.edge(t2, v))
    return bridge, eids


def gen_gbeta(inst: ThreePartitionInstance, beta: int) -> ReductionArtifact:
    """g0 plus beta disjoint two-hub gadgets; GD(., B, m + 2*beta, beta).

    Every gadget holds 2B-1 > B inputs, so its bridge must be duplicated,
    consuming the whole cut budget; what remains is exactly the g0 packing.
    """
    if beta < 1:
        raise InvariantViolation("gbeta needs beta >= 1")
    b = _Builder()
    for i, a in enumerate(inst.A):
        b.star(f"s{i}", a, a)
    bridges = []
    for c in range(beta):
        bridge, _ = _gadget(b, f"g{c}", inst.B)
        bridges.append(bridge)
    graph = b.legal()
    gd = GdInstance(graph, k=inst.B, alpha=inst.m + 2 * beta, beta=beta)
    return ReductionArtifact(gd, "gbeta", inst, tuple(bridges),
                             (inst.B,) * (inst.m + 2 * beta))


def gen_connected(inst: ThreePartitionInstance) -> ReductionArtifact:
    """Connected caterpillar; GD(., B+3, 4m-1, 6m-2).

    3m star leaves alternate with 3m-1 connector hubs along a backbone.
    Interior leaf i carries a_i own inputs plus the backbone in-edge and
    a_i own outputs plus the backbone out-edge; the first leaf instead has
    a_1+1 own inputs, the last a_3m+1 own outputs.  Connectors carry B+2
    inputs and B+2 outputs plus both backbone attachments, so a connector
    joined to any leaf exceeds the budget: all 6m-2 backbone edges are
    forced cuts, leaving connectors at exactly B+3 inputs and leaf
    components at a_i+1, whose triples must sum to B+3.
    """
    m, B = inst.m, inst.B
    b = _Builder()
    n_leaves = 3 * m
    backbone: list[int] = []
    prev_connector: int | None = None

    def attach(label: str, fan_in: int, fan_out: int, feeder: int | None) -> int:
        # The backbone in-edge is created before the hub's own inputs and the
        # out-edge after its outputs, so hub expansion (which assigns edges
        # to chain nodes in id order) puts the two backbone attachments on
        # opposite ends of the chain.  Severing an expanded hub from both
        # neighbors then costs two cuts, like the unexpanded star, though
        # partial chain splits still have no star-form counterpart.
        hub = b.vertex(GATE, label)
        if feeder is not None:
            backbone.append(b.edge(feeder, hub))
        for j in range(fan_in):
            b.edge(b.vertex(INPUT, f"{label}.in{j}"), hub)
        for j in range(fan_out):
            b.edge(hub, b.vertex(OUTPUT, f"{label}.out{j}"))
        return hub

    for i, a in enumerate(inst.A):
        first = i == 0
        last = i == n_leaves - 1
        hub = attach(f"L{i}", a + 1 if first else a, a + 1 if last else a,
                     prev_connector)
        if not last:
            prev_connector = attach(f"C{i}", B + 2, B + 2, hub)
    graph = b.legal()
    gd = GdInstance(graph, k=B + 3, alpha=4 * m - 1, beta=6 * m - 2)
    layout = tuple([B + 3] * (3 * m - 1) + [B + 3] * m)
    return ReductionArtifact(gd, "connected", inst, tuple(sorted(backbone)), layout)


def two_legal_expand(legal: LegalDag) -> LegalDag:
    """Rewrite every gate so the result validates as 2-legal.

    Hubs with d_in = d_out = d > 2 become a chain of d-1 two-in/two-out
    vertices threaded by carry edges; node j consumes the carry and the
    (j+1)-th original in-edge and emits the j-th original out-edge plus the
    next carry, the last node emitting the final two out-edges.  Pass-through
    vertices with d_in = d_out = 1 are spliced out entirely (a bare wire cuts
    identically), since no 2-in/2-out gadget can absorb a single wire.
    """
    g = legal.graph
    # splice out degree-1 gates first
    while True:
        degs = g.degrees()
        victim = next(
            (v for v in g.vertices if v.kind == GATE and degs[v.id] == (1, 1)), None)
        if victim is None:
            break
        (ein,) = [e for e in g.edges if e.dst == victim.id]
        (eout,) = [e for e in g.edges if e.src == victim.id]
        if any(e.src == ein.src and e.dst == eout.dst for e in g.edges):
            raise DagcutError(
                f"cannot two-legalize: pass-through gate {victim.id} sits "
                "parallel to a direct edge; consolidate the gates first")
        edges = [e for e in g.edges if e.id not in (ein.id, eout.id)]
        edges.append(Edge(ein.id, ein.src, eout.dst))
        vertices = tuple(v for v in g.vertices if v.id != victim.id)
        g = DagGraph(vertices, tuple(sorted(edges, key=lambda e: e.id)))

    degs = g.degrees()
    wide = [v for v in g.vertices if v.kind == GATE and degs[v.id][0] > 2]
    if not wide:
        return validate_legal(_renumber(g), require_two_legal=False)

    vertices = [v for v in g.vertices if v.id not in {w.id for w in wide}]
    edges = {e.id: e for e in g.edges}
    next_vid = max(v.id for v in g.vertices) + 1
    next_eid = max(e.id for e in g.edges) + 1
    for w in wide:
        in_ids = sorted(e.id for e in g.edges if e.dst == w.id)
        out_ids = sorted(e.id for e in g.edges if e.src == w.id)
        d = len(in_ids)
        nodes = []
        for j in range(d - 1):
            nodes.append(Vertex(next_vid, GATE, f"{w.label}.{j}"))
            next_vid += 1
        vertices.extend(nodes)

        # re-point attachments, reading current endpoints: an edge between
        # two expanded hubs is re-pointed once from each side
        def retarget(eid: int, dst: int) -> None:
            cur = edges[eid]
            edges[eid] = Edge(cur.id, cur.src, dst)

        def resource(eid: int, src: int) -> None:
            cur = edges[eid]
            edges[eid] = Edge(cur.id, src, cur.dst)

        retarget(in_ids[0], nodes[0].id)
        retarget(in_ids[1], nodes[0].id)
        for j in range(2, d):
            retarget(in_ids[j], nodes[j - 1].id)
        for j in range(d - 1):
            resource(out_ids[j], nodes[j].id)
        resource(out_ids[d - 1], nodes[d - 2].id)
        for j in range(d - 2):
            edges[next_eid] = Edge(next_eid, nodes[j].id, nodes[j + 1].id)
            next_eid += 1

    g2 = DagGraph(tuple(vertices), tuple(sorted(edges.values(), key=lambda e: e.id)))
    return validate_legal(_renumber(g2), require_two_legal=True)


def _renumber(g: DagGraph) -> DagGraph:
    """Dense ids in ascending old-id order (splices/expansions leave gaps)."""
    vmap = {v.id: i for i, v in enumerate(sorted(g.vertices, key=lambda v: v.id))}
    vertices = tuple(
        Vertex(vmap[v.id], v.kind, v.label)
        for v in sorted(g.vertices, key=lambda v: v.id))
    edges = tuple(
        Edge(i, vmap[e.src], vmap[e.dst])
        for i, e in enumerate(sorted(g.edges, key=lambda e: e.id)))
    return DagGraph(vertices, edges)


def expand_artifact(art: ReductionArtifact) -> ReductionArtifact:
    """two_legal_expand applied to a reduction artifact (cut hints dropped:
    edge ids are renumbered by the expansion)."""
    legal2 = two_legal_expand(art.gd_instance.graph)
    gd = GdInstance(legal2, art.gd_instance.k, art.gd_instance.alpha,
                    art.gd_instance.beta)
    return ReductionArtifact(gd, "two-legalized", art.provenance, (),
                             art.expected_yes_layout)
