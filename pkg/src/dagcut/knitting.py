"""Wire-cut plans: quasi-probability terms, fragments, and overhead.

A single wire cut replaces the qubit by a measure-then-prepare pair
satisfying, for every 2x2 operator A,

    A = sum_i c_i * Tr(A O_i) rho_i          (8 terms)

with O_i a Pauli observable on the source side, rho_i the matching
eigenprojector prepared on the sink side, and c_i = +-1/2.  The table
below solves that identity over the Pauli basis (the derivation check
lives in the test suite); its order is fixed (I, X, Y, Z, eigenvalue +
before -) so term-tuple indices stay stable.  K cuts enumerate 8^K
coefficient tuples; the sampling-overhead metric for accuracy eps is
2^(4K)/eps^2, reported as a bare estimate, not a shot count.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .dag_core import (
    Circuit,
    DagcutError,
    DagGraph,
    LegalDag,
    WireLayout,
    dag_to_dot,
)
from .duplication import DuplicatedDag, duplicate, is_acceptable
from .gd_enum import GdSolution

PAULI: Mapping[str, np.ndarray] = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

EIGENSTATE_VECTORS: Mapping[str, np.ndarray] = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "-": np.array([1, -1], dtype=complex) / np.sqrt(2),
    "i": np.array([1, 1j], dtype=complex) / np.sqrt(2),
    "-i": np.array([1, -1j], dtype=complex) / np.sqrt(2),
}


@dataclass(frozen=True, eq=False)
class CutTerm:
    coefficient: float  # +1/2 or -1/2
    observable_label: str
    prep_state_label: str
    prep_density: np.ndarray


def _term(c: float, obs: str, prep: str) -> CutTerm:
    v = EIGENSTATE_VECTORS[prep]
    return CutTerm(c, obs, prep, np.outer(v, v.conj()))


_TERMS: tuple[CutTerm, ...] = (
    _term(+0.5, "I", "0"),
    _term(+0.5, "I", "1"),
    _term(+0.5, "X", "+"),
    _term(-0.5, "X", "-"),
    _term(+0.5, "Y", "i"),
    _term(-0.5, "Y", "-i"),
    _term(+0.5, "Z", "0"),
    _term(-0.5, "Z", "1"),
)


def wire_cut_terms() -> tuple[CutTerm, ...]:
    """The canonical 8-term wire-cut decomposition."""
    return _TERMS


@dataclass(frozen=True)
class CutRecord:
    edge_id: int
    src_fragment: int
    dst_fragment: int


@dataclass(frozen=True)
class Segment:
    """Maximal uncut stretch of one qubit wire.

    Gate occurrences are 1-based positions within the wire's own gate
    sequence; the stretch covers positions (start_slot, end_slot].  A cut
    boundary names the cut edge feeding (prepared state) or draining
    (measured observable) this stretch.
    """

    qubit: int
    start: tuple[str, int]  # ("input", qubit) | ("cut", edge_id)
    end: tuple[str, int]  # ("output", qubit) | ("cut", edge_id)
    gate_indices: tuple[int, ...]  # circuit gate indices whose occurrence lies here
    fragment: int


@dataclass(frozen=True, eq=False)
class FragmentPlan:
    index: int
    vertex_ids: frozenset[int]
    graph: DagGraph  # induced view of the duplicated graph
    input_count: int
    output_count: int


@dataclass(frozen=True, eq=False)
class CutPlan:
    cuts: tuple[CutRecord, ...]
    fragments: tuple[FragmentPlan, ...]
    duplicated: DuplicatedDag
    epsilon: float
    circuit: Circuit | None = None
    segments: tuple[Segment, ...] | None = None

    @property
    def K(self) -> int:
        return len(self.cuts)

    @property
    def tuple_count(self) -> int:
        return 8 ** self.K

    def term_tuple(self, j: int) -> tuple[int, ...]:
        """Term index per cut for enumeration index j (big-endian base 8)."""
        if not 0 <= j < self.tuple_count:
            raise DagcutError(f"tuple index {j} out of range")
        digits = []
        for c in range(self.K):
            digits.append((j >> (3 * (self.K - 1 - c))) & 7)
        return tuple(digits)

    def coefficient(self, j: int) -> float:
        out = 1.0
        for t in self.term_tuple(j):
            out *= _TERMS[t].coefficient
        return out

    def overhead_metric(self, epsilon: float | None = None) -> float:
        eps = self.epsilon if epsilon is None else epsilon
        return (2.0 ** (2 * self.K) / eps) ** 2


def _induced(graph: DagGraph, vids: frozenset[int]) -> DagGraph:
    vertices = tuple(v for v in graph.vertices if v.id in vids)
    edges = tuple(e for e in graph.edges if e.src in vids and e.dst in vids)
    return DagGraph(vertices, edges)


def make_plan(
    sol: GdSolution,
    epsilon: float,
    circuit: Circuit | None = None,
    layout: WireLayout | None = None,
) -> CutPlan:
    """Turn a verified duplication certificate into an executable plan.

    The synthetic vertices of the duplicated graph are exactly the
    measure/prepare placeholders: each cut contributes the observable
    vertex x to its source fragment and the preparation vertex y to its
    sink fragment.  When the circuit and its wire layout are supplied the
    plan also carries wire segments, which is what fragment simulation
    consumes.
    """
    if epsilon <= 0:
        raise DagcutError("epsilon must be positive")
    legal = sol.instance.graph
    d = duplicate(legal, sol.cuts)
    report = is_acceptable(d)
    comps = [c.vertex_ids for c in report.components]
    cluster_of_comp = sol.assignment.cluster_of
    if len(cluster_of_comp) != len(comps):
        raise DagcutError("assignment does not match the duplicated components")

    frag_of_vertex: dict[int, int] = {}
    for comp, cl in zip(comps, cluster_of_comp):
        for v in comp:
            frag_of_vertex[v] = cl

    p = sol.assignment.p
    members: list[set[int]] = [set() for _ in range(p)]
    for v, f in frag_of_vertex.items():
        members[f].add(v)
    fragments = []
    for i in range(p):
        vids = frozenset(members[i])
        fragments.append(FragmentPlan(
            index=i,
            vertex_ids=vids,
            graph=_induced(d.graph, vids),
            input_count=sum(
                c.input_count for c, cl in zip(report.components, cluster_of_comp)
                if cl == i),
            output_count=sum(
                c.output_count for c, cl in zip(report.components, cluster_of_comp)
                if cl == i),
        ))

    cut_records = []
    for eid in sol.cuts.sorted():
        e = legal.graph.edge(eid)
        cut_records.append(CutRecord(
            edge_id=eid,
            src_fragment=frag_of_vertex[e.src],
            dst_fragment=frag_of_vertex[e.dst],
        ))

    segments = None
    if circuit is not None:
        if layout is None:
            raise DagcutError("circuit-backed plans need the wire layout")
        segments = _wire_segments(circuit, layout, sol.cuts.edge_ids, frag_of_vertex, legal)

    return CutPlan(
        cuts=tuple(cut_records),
        fragments=tuple(fragments),
        duplicated=d,
        epsilon=epsilon,
        circuit=circuit,
        segments=segments,
    )


def _wire_segments(
    circuit: Circuit,
    layout: WireLayout,
    cut_edge_ids: frozenset[int],
    frag_of_vertex: Mapping[int, int],
    legal: LegalDag,
) -> tuple[Segment, ...]:
    vertex_of_gate = {}
    for vid, gis in layout.vertex_gates.items():
        for gi in gis:
            vertex_of_gate[gi] = vid
    segments = []
    for q in range(circuit.qubit_count):
        occurrences = [gi for gi, g in enumerate(circuit.gates) if q in g.qubits]
        m = len(occurrences)
        slot_edge = {layout.edge_slot[eid][1]: eid for eid in layout.wire_edges[q]}
        cut_slots = sorted(
            layout.edge_slot[eid][1] for eid in layout.wire_edges[q]
            if eid in cut_edge_ids)
        # a cut at slot s separates occurrences < s from occurrences >= s
        lowers = [0] + cut_slots
        uppers = cut_slots + [m]
        starts = [("input", q)] + [("cut", slot_edge[s]) for s in cut_slots]
        ends = [("cut", slot_edge[s]) for s in cut_slots] + [("output", q)]
        for lo, hi, start, end in zip(lowers, uppers, starts, ends):
            gates = tuple(occurrences[o] for o in range(lo, min(hi, m)))
            if gates:
                frag = frag_of_vertex[vertex_of_gate[gates[0]]]
            elif start[0] == "cut":
                frag = frag_of_vertex[legal.graph.edge(start[1]).dst]
            else:
                frag = frag_of_vertex[legal.graph.edge(layout.wire_edges[q][0]).src]
            segments.append(Segment(q, start, end, gates, frag))
    return tuple(segments)


def plan_to_json(plan: CutPlan) -> dict:
    return {
        "schema": "dagcut/1",
        "cuts": [
            {"edge": c.edge_id, "src_frag": c.src_fragment, "dst_frag": c.dst_fragment}
            for c in plan.cuts
        ],
        "K": plan.K,
        "terms": [
            {"c": t.coefficient, "obs": t.observable_label, "prep": t.prep_state_label}
            for t in wire_cut_terms()
        ],
        "overhead": {"epsilon": plan.epsilon, "metric": plan.overhead_metric()},
        "fragments": [
            {
                "index": f.index,
                "qubits": f.input_count,
                "inputs": f.input_count,
                "outputs": f.output_count,
                "vertices": sorted(f.vertex_ids),
            }
            for f in plan.fragments
        ],
    }


def plan_report(plan: CutPlan) -> tuple[dict, str, dict[int, str]]:
    """(JSON document, text table, fragment DOT renderings)."""
    doc = plan_to_json(plan)
    lines = [
        f"wire-cut plan: K={plan.K} cuts, {plan.tuple_count} coefficient tuples",
        f"overhead metric (eps={plan.epsilon}): {plan.overhead_metric()}",
        f"{'fragment':>8} {'qubits':>6} {'inputs':>6} {'outputs':>7} {'vertices':>8}",
    ]
    for f in plan.fragments:
        lines.append(
            f"{f.index:>8} {f.input_count:>6} {f.input_count:>6} "
            f"{f.output_count:>7} {len(f.vertex_ids):>8}")
    for c in plan.cuts:
        lines.append(
            f"cut edge {c.edge_id}: fragment {c.src_fragment} -> {c.dst_fragment}")
    dots = {
        f.index: dag_to_dot(
            f.graph,
            synthetic=[v for v in f.vertex_ids
                       if v in set(plan.duplicated.synthetic_outputs.values())
                       or v in set(plan.duplicated.synthetic_inputs.values())])
        for f in plan.fragments
    }
    return doc, "\n".join(lines) + "\n", dots
