"""Circuit and legal-dag representations.

A quantum circuit maps to a directed acyclic graph: one input vertex and one
output vertex per qubit, one gate vertex per (possibly consolidated) gate,
and one edge per qubit trajectory between consecutive operations.  A dag is
*legal* when inputs have out-degree 1, outputs have in-degree 1, and every
interior vertex has equal in- and out-degree (degree exactly 2 for the
*2-legal* subclass, i.e. circuits compiled to one- and two-qubit gates).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

INPUT = "input"
OUTPUT = "output"
GATE = "gate"
_KINDS = (INPUT, OUTPUT, GATE)

SCHEMA = "dagcut/1"


class DagcutError(Exception):
    """Base class for all toolkit errors."""


class GraphFormatError(DagcutError):
    """Structurally malformed graph or circuit (bad ids, self-loop, ...)."""


@dataclass(frozen=True)
class Violation:
    """One legality violation: which rule failed and where."""

    code: str
    vertex: int | None = None
    condition: int | None = None
    detail: str = ""

    def __str__(self) -> str:
        where = f" at vertex {self.vertex}" if self.vertex is not None else ""
        return f"{self.code}{where}: {self.detail}" if self.detail else f"{self.code}{where}"


class IllegalDagError(DagcutError):
    """Raised by validate_legal; carries the full list of violations."""

    def __init__(self, violations: Sequence[Violation]):
        self.violations = tuple(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


@dataclass(frozen=True, eq=False)
class Gate:
    """One gate application: name, ordered qubit indices, optional matrix."""

    name: str
    qubits: tuple[int, ...]
    matrix: np.ndarray | None = None

    @property
    def arity(self) -> int:
        return len(self.qubits)


@dataclass(frozen=True, eq=False)
class Circuit:
    qubit_count: int
    gates: tuple[Gate, ...]

    def __post_init__(self):
        if self.qubit_count < 1:
            raise GraphFormatError("qubit_count must be positive")
        for i, g in enumerate(self.gates):
            if len(set(g.qubits)) != len(g.qubits):
                raise GraphFormatError(f"gate {i} ({g.name}) repeats a qubit index")
            for q in g.qubits:
                if not 0 <= q < self.qubit_count:
                    raise GraphFormatError(f"gate {i} ({g.name}) uses qubit {q} out of range")
            if g.matrix is not None:
                dim = 2 ** g.arity
                if g.matrix.shape != (dim, dim):
                    raise GraphFormatError(
                        f"gate {i} ({g.name}) matrix shape {g.matrix.shape} != ({dim}, {dim})"
                    )


@dataclass(frozen=True)
class Vertex:
    id: int
    kind: str
    label: str


@dataclass(frozen=True)
class Edge:
    id: int
    src: int
    dst: int


@dataclass(frozen=True)
class DagGraph:
    """Directed multistage graph. No self-loops, no parallel edges.

    Acyclicity and the legality conditions are checked by validate_legal,
    not at construction.
    """

    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self):
        vids = [v.id for v in self.vertices]
        if len(set(vids)) != len(vids):
            raise GraphFormatError("duplicate vertex ids")
        known = set(vids)
        eids = set()
        pairs = set()
        for e in self.edges:
            if e.id in eids:
                raise GraphFormatError(f"duplicate edge id {e.id}")
            eids.add(e.id)
            if e.src == e.dst:
                raise GraphFormatError(f"edge {e.id} is a self-loop")
            if e.src not in known or e.dst not in known:
                raise GraphFormatError(f"edge {e.id} references unknown vertex")
            if (e.src, e.dst) in pairs:
                raise GraphFormatError(f"parallel edge {e.id} ({e.src} -> {e.dst})")
            pairs.add((e.src, e.dst))
        for v in self.vertices:
            if v.kind not in _KINDS:
                raise GraphFormatError(f"vertex {v.id} has unknown kind {v.kind!r}")

    def vertex(self, vid: int) -> Vertex:
        return self._vertex_by_id()[vid]

    def edge(self, eid: int) -> Edge:
        return self._edge_by_id()[eid]

    def _vertex_by_id(self) -> dict[int, Vertex]:
        cache = self.__dict__.get("_vmap")
        if cache is None:
            cache = {v.id: v for v in self.vertices}
            object.__setattr__(self, "_vmap", cache)
        return cache

    def _edge_by_id(self) -> dict[int, Edge]:
        cache = self.__dict__.get("_emap")
        if cache is None:
            cache = {e.id: e for e in self.edges}
            object.__setattr__(self, "_emap", cache)
        return cache

    def out_edges(self, vid: int) -> list[Edge]:
        return [e for e in self.edges if e.src == vid]

    def in_edges(self, vid: int) -> list[Edge]:
        return [e for e in self.edges if e.dst == vid]

    def degrees(self) -> dict[int, tuple[int, int]]:
        """vertex id -> (d_in, d_out)."""
        d = {v.id: [0, 0] for v in self.vertices}
        for e in self.edges:
            d[e.dst][0] += 1
            d[e.src][1] += 1
        return {vid: (din, dout) for vid, (din, dout) in d.items()}

    def input_ids(self) -> list[int]:
        return sorted(v.id for v in self.vertices if v.kind == INPUT)

    def output_ids(self) -> list[int]:
        return sorted(v.id for v in self.vertices if v.kind == OUTPUT)


@dataclass(frozen=True)
class LegalDag:
    """A validated legal dag: t = |In(G)| = |Out(G)|."""

    graph: DagGraph
    t: int
    two_legal: bool


@dataclass(frozen=True)
class PathDecomposition:
    """t edge-disjoint input-to-output paths; each path is a list of edge ids."""

    paths: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class WireLayout:
    """Circuit-to-dag correspondence produced by build_layout.

    wire_edges[q] lists edge ids along qubit q in time order (slot order);
    edge_slot maps edge id -> (qubit, slot); vertex_gates maps gate-vertex
    id -> original circuit gate indices it covers (merged vertices cover
    several).
    """

    wire_edges: tuple[tuple[int, ...], ...]
    edge_slot: Mapping[int, tuple[int, int]]
    vertex_gates: Mapping[int, tuple[int, ...]]


def topological_order(g: DagGraph) -> list[int] | None:
    """Kahn's algorithm; None if the graph has a directed cycle."""
    indeg = {v.id: 0 for v in g.vertices}
    succ: dict[int, list[int]] = {v.id: [] for v in g.vertices}
    for e in g.edges:
        indeg[e.dst] += 1
        succ[e.src].append(e.dst)
    ready = sorted(vid for vid, d in indeg.items() if d == 0)
    order = []
    while ready:
        v = ready.pop()
        order.append(v)
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(w)
    return order if len(order) == len(g.vertices) else None


def build_layout(circuit: Circuit) -> tuple[DagGraph, WireLayout]:
    """Build the dag for a circuit together with its wire layout.

    Threads one wire per qubit through the circuit's gates in program order.
    Adjacent gates connected by two or more wires would create parallel
    edges, which the dag model cannot hold; every such bundle (together
    with any gates sandwiched between its endpoints) is consolidated into a
    single vertex.  Grouping those tensors changes nothing for cut
    placement: no single wire cut can separate them anyway.
    """
    n = circuit.qubit_count
    kinds: list[str] = []
    prov: list[tuple[int, ...]] = []  # circuit gate indices covered

    def new_vertex(kind: str, gates: tuple[int, ...] = ()) -> int:
        kinds.append(kind)
        prov.append(gates)
        return len(kinds) - 1

    frontier = [new_vertex(INPUT) for _ in range(n)]
    raw_edges: list[tuple[int, int, int, int]] = []  # (src, dst, qubit, slot)
    next_slot = [0] * n

    def add_edge(src: int, dst: int, q: int) -> None:
        raw_edges.append((src, dst, q, next_slot[q]))
        next_slot[q] += 1

    for gi, gate in enumerate(circuit.gates):
        gv = new_vertex(GATE, (gi,))
        for q in gate.qubits:
            add_edge(frontier[q], gv, q)
            frontier[q] = gv
    for q in range(n):
        add_edge(frontier[q], new_vertex(OUTPUT), q)

    group = _contract_parallel_bundles(len(kinds), raw_edges)

    # Renumber surviving groups densely in creation order of their smallest member.
    reps = sorted(set(group))
    remap = {r: i for i, r in enumerate(reps)}
    merged_prov: dict[int, list[int]] = {r: [] for r in reps}
    for v in range(len(kinds)):
        merged_prov[group[v]].extend(prov[v])

    def label_of(rep: int) -> str:
        if kinds[rep] != GATE:
            # inputs/outputs are never merged; recover the qubit from edges
            return ""
        return "+".join(circuit.gates[i].name for i in sorted(merged_prov[rep]))

    vertices = []
    for r in reps:
        vertices.append(Vertex(remap[r], kinds[r], label_of(r)))

    edges = []
    wire_edges: list[list[int]] = [[] for _ in range(n)]
    edge_slot: dict[int, tuple[int, int]] = {}
    for src, dst, q, slot in raw_edges:
        s, d = group[src], group[dst]
        if s == d:
            continue
        eid = len(edges)
        edges.append(Edge(eid, remap[s], remap[d]))
        edge_slot[eid] = (q, slot)
        wire_edges[q].append(eid)

    # Label inputs/outputs by qubit now that edges are final.
    by_id = {v.id: v for v in vertices}
    for eid, (q, _slot) in edge_slot.items():
        e = edges[eid]
        if by_id[e.src].kind == INPUT:
            by_id[e.src] = Vertex(e.src, INPUT, f"q{q}")
        if by_id[e.dst].kind == OUTPUT:
            by_id[e.dst] = Vertex(e.dst, OUTPUT, f"q{q}")
    vertices = tuple(by_id[v.id] for v in vertices)

    graph = DagGraph(vertices, tuple(edges))
    layout = WireLayout(
        wire_edges=tuple(tuple(w) for w in wire_edges),
        edge_slot=edge_slot,
        vertex_gates={
            remap[r]: tuple(sorted(merged_prov[r])) for r in reps if kinds[r] == GATE
        },
    )
    return graph, layout


def _contract_parallel_bundles(
    n_vertices: int, raw_edges: list[tuple[int, int, int, int]]
) -> list[int]:
    """Group map collapsing every parallel-edge bundle.

    Whenever two edges join the same vertex pair (u, v), u and v are merged
    together with everything on a directed path between them; contracting
    that convex set keeps the graph acyclic.  Repeats until no parallel
    pair remains.
    """
    group = list(range(n_vertices))

    def find(a: int) -> int:
        while group[a] != a:
            group[a] = group[group[a]]
            a = group[a]
        return a

    while True:
        pairs: dict[tuple[int, int], int] = {}
        clash = None
        for src, dst, _q, _s in raw_edges:
            s, d = find(src), find(dst)
            if s == d:
                continue
            if (s, d) in pairs:
                clash = (s, d)
                break
            pairs[(s, d)] = 1
        if clash is None:
            for v in range(n_vertices):
                find(v)
            return [find(v) for v in range(n_vertices)]
        u, w = clash
        # convex closure: vertices reachable from u that also reach w
        succ: dict[int, set[int]] = {}
        pred: dict[int, set[int]] = {}
        for src, dst, _q, _s in raw_edges:
            s, d = find(src), find(dst)
            if s != d:
                succ.setdefault(s, set()).add(d)
                pred.setdefault(d, set()).add(s)
        desc = _reach(u, succ)
        anc = _reach(w, pred)
        for v in desc & anc:
            group[find(v)] = find(u)
        group[find(w)] = find(u)


def _reach(start: int, adj: dict[int, set[int]]) -> set[int]:
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in adj.get(v, ()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def build_dag(circuit: Circuit) -> DagGraph:
    """Dag for a circuit; legal by construction."""
    return build_layout(circuit)[0]


def legality_violations(g: DagGraph, require_two_legal: bool = False) -> list[Violation]:
    """All legality violations of g (empty list when legal)."""
    out: list[Violation] = []
    if not g.edges:
        out.append(Violation("empty-edge-set", detail="a legal dag needs at least one edge"))
    if topological_order(g) is None:
        out.append(Violation("cycle", detail="directed cycle detected"))
    degs = g.degrees()
    for v in g.vertices:
        din, dout = degs[v.id]
        if v.kind == INPUT:
            if din != 0 or dout != 1:
                out.append(Violation(
                    "condition-violation", v.id, 1,
                    f"input vertex must have d_in=0, d_out=1 (got {din}, {dout})"))
        elif v.kind == OUTPUT:
            if dout != 0 or din != 1:
                out.append(Violation(
                    "condition-violation", v.id, 2,
                    f"output vertex must have d_in=1, d_out=0 (got {din}, {dout})"))
        else:
            if din == 0 or dout == 0:
                out.append(Violation(
                    "condition-violation", v.id, 3,
                    f"gate vertex with d_in={din}, d_out={dout} acts as input/output"))
            elif din != dout:
                out.append(Violation(
                    "condition-violation", v.id, 3,
                    f"gate vertex must balance degrees (d_in={din}, d_out={dout})"))
            elif require_two_legal and din != 2:
                out.append(Violation(
                    "condition-violation", v.id, 4,
                    f"2-legal dag needs d_in=d_out=2 at every gate (got {din})"))
    return out


def validate_legal(g: DagGraph, require_two_legal: bool = False) -> LegalDag:
    """Validate legality; raises IllegalDagError listing every violation."""
    violations = legality_violations(g, require_two_legal)
    if violations:
        raise IllegalDagError(violations)
    degs = g.degrees()
    two = all(degs[v.id] == (2, 2) for v in g.vertices if v.kind == GATE)
    return LegalDag(graph=g, t=len(g.input_ids()), two_legal=two)


def components(g: DagGraph) -> list[set[int]]:
    """Weakly connected components as vertex-id sets, ordered by min id."""
    parent = {v.id: v.id for v in g.vertices}

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for e in g.edges:
        ra, rb = find(e.src), find(e.dst)
        if ra != rb:
            parent[rb] = ra
    groups: dict[int, set[int]] = {}
    for v in g.vertices:
        groups.setdefault(find(v.id), set()).add(v.id)
    return sorted(groups.values(), key=min)


def edge_disjoint_paths(legal: LegalDag) -> PathDecomposition:
    """Extract t edge-disjoint input-to-output paths by walk-and-delete.

    Starting at each unused input, repeatedly follow the smallest-id edge
    not yet consumed; degree balance guarantees the walk only stops at an
    output vertex.
    """
    g = legal.graph
    unused: dict[int, list[Edge]] = {v.id: [] for v in g.vertices}
    for e in sorted(g.edges, key=lambda e: e.id, reverse=True):
        unused[e.src].append(e)  # reversed so .pop() yields smallest id
    kind = {v.id: v.kind for v in g.vertices}
    paths = []
    for start in g.input_ids():
        path = []
        v = start
        while kind[v] != OUTPUT:
            if not unused[v]:
                raise DagcutError(
                    f"walk dead-ended at vertex {v}; graph failed validation invariant")
            e = unused[v].pop()
            path.append(e.id)
            v = e.dst
        paths.append(tuple(path))
    if len(paths) != legal.t:
        raise DagcutError("path extraction did not yield t paths")
    return PathDecomposition(paths=tuple(paths))


def consolidate_chains(legal: LegalDag) -> LegalDag:
    """Merge gate chains: u absorbed into v when all of u's out-edges feed v
    and d_in(v) equals d_out(u).  Repeats to a fixpoint; labels concatenate.
    """
    g = legal.graph
    while True:
        degs = g.degrees()
        kind = {v.id: v.kind for v in g.vertices}
        merge: tuple[int, int] | None = None
        targets: dict[int, set[int]] = {}
        for e in g.edges:
            targets.setdefault(e.src, set()).add(e.dst)
        for v in sorted(targets):
            if kind[v] != GATE or len(targets[v]) != 1:
                continue
            (w,) = targets[v]
            if kind[w] == GATE and degs[w][0] == degs[v][1]:
                merge = (v, w)
                break
        if merge is None:
            return validate_legal(g, require_two_legal=False)
        u, w = merge
        label = {v.id: v.label for v in g.vertices}
        merged_label = label[u] + "+" + label[w]
        keep = [v for v in g.vertices if v.id not in (u, w)]
        new_ids = {v.id: i for i, v in enumerate(keep)}
        merged_id = len(keep)
        vertices = tuple(
            [Vertex(new_ids[v.id], v.kind, v.label) for v in keep]
            + [Vertex(merged_id, GATE, merged_label)]
        )

        def nid(x: int) -> int:
            return merged_id if x in (u, w) else new_ids[x]

        edges = []
        for e in sorted(g.edges, key=lambda e: e.id):
            s, d = nid(e.src), nid(e.dst)
            if s == d:
                continue
            edges.append(Edge(len(edges), s, d))
        g = DagGraph(vertices, tuple(edges))


# --- serialization ---------------------------------------------------------


def circuit_to_json(c: Circuit) -> dict:
    gates = []
    for g in c.gates:
        rec: dict = {"name": g.name, "qubits": list(g.qubits)}
        if g.matrix is not None:
            rec["matrix"] = [[float(x.real), float(x.imag)] for x in g.matrix.reshape(-1)]
        gates.append(rec)
    return {"schema": SCHEMA, "qubits": c.qubit_count, "gates": gates}


def circuit_from_json(doc: dict) -> Circuit:
    try:
        n = int(doc["qubits"])
        gates = []
        for rec in doc.get("gates", []):
            matrix = None
            if rec.get("matrix") is not None:
                flat = np.array([complex(re, im) for re, im in rec["matrix"]])
                dim = 2 ** len(rec["qubits"])
                if flat.size != dim * dim:
                    raise GraphFormatError(
                        f"gate {rec.get('name')} matrix has {flat.size} entries, expected {dim * dim}")
                matrix = flat.reshape(dim, dim)
            gates.append(Gate(str(rec["name"]), tuple(int(q) for q in rec["qubits"]), matrix))
        return Circuit(n, tuple(gates))
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphFormatError(f"malformed circuit document: {exc}") from exc


def dag_to_json(g: DagGraph) -> dict:
    return {
        "schema": SCHEMA,
        "vertices": [{"id": v.id, "kind": v.kind, "label": v.label} for v in g.vertices],
        "edges": [{"id": e.id, "src": e.src, "dst": e.dst} for e in g.edges],
    }


def dag_from_json(doc: dict) -> DagGraph:
    try:
        vertices = tuple(
            Vertex(int(v["id"]), str(v["kind"]), str(v.get("label", "")))
            for v in doc["vertices"]
        )
        edges = tuple(
            Edge(int(e["id"]), int(e["src"]), int(e["dst"])) for e in doc["edges"]
        )
        return DagGraph(vertices, edges)
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphFormatError(f"malformed dag document: {exc}") from exc


def dumps(doc: dict) -> str:
    """Canonical JSON: fixed key order as constructed, 2-space indent."""
    return json.dumps(doc, indent=2) + "\n"


_DOT_SHAPE = {INPUT: "invtriangle", OUTPUT: "triangle", GATE: "box"}


def dag_to_dot(g: DagGraph, cut_edges: Iterable[int] = (),
               synthetic: Iterable[int] = ()) -> str:
    """GraphViz rendering; vertex shape encodes kind, cuts drawn dashed."""
    cuts = set(cut_edges)
    synth = set(synthetic)
    lines = ["digraph dag {", "  rankdir=LR;"]
    for v in g.vertices:
        style = ' style=dashed' if v.id in synth else ""
        lines.append(
            f'  v{v.id} [label="{v.label}" shape={_DOT_SHAPE[v.kind]}{style}];')
    for e in g.edges:
        attr = ' [style=dashed color=red]' if e.id in cuts else ""
        lines.append(f"  v{e.src} -> v{e.dst}{attr};")
    lines.append("}")
    return "\n".join(lines) + "\n"
