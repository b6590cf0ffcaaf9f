import json
import random

import pytest

from dagcut.dag_core import (
    Circuit,
    DagGraph,
    Edge,
    Gate,
    GraphFormatError,
    IllegalDagError,
    Vertex,
    build_dag,
    build_layout,
    circuit_from_json,
    circuit_to_json,
    components,
    consolidate_chains,
    dag_from_json,
    dag_to_dot,
    dag_to_json,
    edge_disjoint_paths,
    validate_legal,
)
from dagcut.random_dags import corpus, random_circuit


def wire(*pairs):
    """Tiny helper: graph from (src, dst) pairs with auto vertex kinds."""
    vids = sorted({v for p in pairs for v in p})
    srcs = {a for a, _ in pairs}
    dsts = {b for _, b in pairs}
    vertices = []
    for v in vids:
        if v not in dsts:
            kind = "input"
        elif v not in srcs:
            kind = "output"
        else:
            kind = "gate"
        vertices.append(Vertex(v, kind, f"v{v}"))
    edges = tuple(Edge(i, a, b) for i, (a, b) in enumerate(pairs))
    return DagGraph(tuple(vertices), edges)


class TestBuildDag:
    def test_two_qubit_single_gate(self):
        g = build_dag(Circuit(2, (Gate("CX", (0, 1)),)))
        assert len(g.vertices) == 5
        assert len(g.edges) == 4
        kinds = [v.kind for v in g.vertices]
        assert kinds.count("input") == 2
        assert kinds.count("gate") == 1
        assert kinds.count("output") == 2

    def test_bare_wire(self):
        g = build_dag(Circuit(1, ()))
        assert len(g.vertices) == 2
        assert len(g.edges) == 1
        assert validate_legal(g).t == 1

    def test_cx_chain(self):
        g = build_dag(Circuit(3, (Gate("CX", (0, 1)), Gate("CX", (1, 2)))))
        assert len(g.vertices) == 8
        assert len(g.edges) == 7
        legal = validate_legal(g)
        assert legal.t == 3

    def test_parallel_pair_consolidated(self):
        g = build_dag(Circuit(2, (Gate("CX", (0, 1)), Gate("CX", (0, 1)))))
        gates = [v for v in g.vertices if v.kind == "gate"]
        assert len(gates) == 1
        assert gates[0].label == "CX+CX"
        validate_legal(g)

    def test_sandwiched_gate_consolidated(self):
        # 3q gate, 1q gate on a shared wire, 3q gate: contracting only the
        # outer pair would close a cycle through the middle one
        c = Circuit(3, (Gate("U3", (0, 1, 2)), Gate("H", (0,)), Gate("U3", (0, 1, 2))))
        g = build_dag(c)
        assert [v.label for v in g.vertices if v.kind == "gate"] == ["U3+H+U3"]
        assert validate_legal(g).t == 3

    def test_layout_provenance(self):
        c = Circuit(2, (Gate("H", (0,)), Gate("CX", (0, 1))))
        g, layout = build_layout(c)
        assert layout.wire_edges[0] == (0, 1, 3)
        assert layout.wire_edges[1] == (2, 4)
        gate_vertices = {v.id for v in g.vertices if v.kind == "gate"}
        assert set(layout.vertex_gates) == gate_vertices
        assert sorted(i for gis in layout.vertex_gates.values() for i in gis) == [0, 1]

    def test_bad_circuit_rejected(self):
        with pytest.raises(GraphFormatError):
            Circuit(2, (Gate("CX", (0, 0)),))
        with pytest.raises(GraphFormatError):
            Circuit(1, (Gate("X", (3,)),))


class TestValidateLegal:
    def test_single_edge(self):
        legal = validate_legal(wire((0, 1)))
        assert legal.t == 1

    def test_star(self):
        g = wire((0, 3), (1, 3), (2, 3), (3, 4), (3, 5), (3, 6))
        legal = validate_legal(g)
        assert legal.t == 3

    def test_unbalanced_gate(self):
        g = wire((0, 2), (1, 2), (2, 3))
        with pytest.raises(IllegalDagError) as err:
            validate_legal(g)
        violations = err.value.violations
        assert any(v.vertex == 2 and v.condition == 3 for v in violations)

    def test_empty_edges(self):
        g = DagGraph((Vertex(0, "input", "a"),), ())
        with pytest.raises(IllegalDagError) as err:
            validate_legal(g)
        assert any(v.code == "empty-edge-set" for v in err.value.violations)

    def test_cycle_detected(self):
        g = DagGraph(
            (Vertex(0, "input", "a"), Vertex(1, "gate", "g"), Vertex(2, "gate", "h"),
             Vertex(3, "output", "z")),
            (Edge(0, 0, 1), Edge(1, 1, 2), Edge(2, 2, 1), Edge(3, 2, 3)),
        )
        with pytest.raises(IllegalDagError) as err:
            validate_legal(g)
        assert any(v.code == "cycle" for v in err.value.violations)

    def test_all_violations_reported(self):
        g = wire((0, 2), (1, 2), (2, 3), (4, 5), (4, 6))
        with pytest.raises(IllegalDagError) as err:
            validate_legal(g)
        bad_vertices = {v.vertex for v in err.value.violations}
        assert {2, 4} <= bad_vertices

    def test_two_legal_flag(self):
        g = build_dag(Circuit(2, (Gate("CX", (0, 1)),)))
        assert validate_legal(g).two_legal
        assert validate_legal(g, require_two_legal=True).two_legal
        h = build_dag(Circuit(1, (Gate("H", (0,)),)))
        assert not validate_legal(h).two_legal
        with pytest.raises(IllegalDagError):
            validate_legal(h, require_two_legal=True)

    def test_parallel_edges_rejected(self):
        with pytest.raises(GraphFormatError):
            DagGraph(
                (Vertex(0, "input", "a"), Vertex(1, "output", "b")),
                (Edge(0, 0, 1), Edge(1, 0, 1)),
            )

    def test_self_loop_rejected(self):
        with pytest.raises(GraphFormatError):
            DagGraph((Vertex(0, "gate", "g"),), (Edge(0, 0, 0),))


class TestComponents:
    def test_fan_is_connected(self):
        assert len(components(wire((0, 1), (0, 2)))) == 1

    def test_disjoint_edges(self):
        assert len(components(wire((0, 1), (2, 3)))) == 2

    def test_empty(self):
        assert components(DagGraph((), ())) == []


class TestEdgeDisjointPaths:
    def test_single_edge(self):
        decomposition = edge_disjoint_paths(validate_legal(wire((0, 1))))
        assert decomposition.paths == ((0,),)

    def test_star(self):
        g = wire((0, 3), (1, 3), (2, 3), (3, 4), (3, 5), (3, 6))
        decomposition = edge_disjoint_paths(validate_legal(g))
        assert len(decomposition.paths) == 3
        used = [e for p in decomposition.paths for e in p]
        assert len(used) == len(set(used))

    def test_two_wires(self):
        decomposition = edge_disjoint_paths(validate_legal(wire((0, 1), (2, 3))))
        assert len(decomposition.paths) == 2

    @pytest.mark.parametrize("seed", range(25))
    def test_random_corpus_properties(self, seed):
        legal = corpus(seed, 1)[0]
        g = legal.graph
        assert len(g.input_ids()) == len(g.output_ids()) == legal.t
        decomposition = edge_disjoint_paths(legal)
        assert len(decomposition.paths) == legal.t
        used = [e for p in decomposition.paths for e in p]
        assert len(used) == len(set(used))
        kind = {v.id: v.kind for v in g.vertices}
        for path in decomposition.paths:
            assert kind[g.edge(path[0]).src] == "input"
            assert kind[g.edge(path[-1]).dst] == "output"
            for a, b in zip(path, path[1:]):
                assert g.edge(a).dst == g.edge(b).src


class TestConsolidateChains:
    def test_sequential_single_qubit_gates(self):
        legal = validate_legal(build_dag(Circuit(1, (Gate("H", (0,)), Gate("T", (0,))))))
        merged = consolidate_chains(legal)
        gates = [v for v in merged.graph.vertices if v.kind == "gate"]
        assert len(gates) == 1
        assert gates[0].label == "H+T"

    def test_double_linked_pair_merged(self):
        legal = validate_legal(build_dag(Circuit(2, (Gate("CX", (0, 1)), Gate("CZ", (0, 1))))))
        gates = [v for v in legal.graph.vertices if v.kind == "gate"]
        assert len(gates) == 1  # merged during construction
        assert consolidate_chains(legal).t == 2

    def test_partial_overlap_not_merged(self):
        legal = validate_legal(build_dag(Circuit(3, (Gate("CX", (0, 1)), Gate("CX", (1, 2))))))
        merged = consolidate_chains(legal)
        gates = [v for v in merged.graph.vertices if v.kind == "gate"]
        assert len(gates) == 2

    @pytest.mark.parametrize("seed", range(20))
    def test_idempotent_and_invariant_preserving(self, seed):
        rng = random.Random(1000 + seed)
        legal = validate_legal(build_dag(random_circuit(rng)))
        once = consolidate_chains(legal)
        twice = consolidate_chains(once)
        assert dag_to_json(once.graph) == dag_to_json(twice.graph)
        assert once.t == legal.t
        assert len(components(once.graph)) == len(components(legal.graph))


class TestSerialization:
    def test_dag_round_trip(self):
        g = build_dag(Circuit(2, (Gate("H", (0,)), Gate("CX", (0, 1)))))
        doc = dag_to_json(g)
        again = dag_from_json(json.loads(json.dumps(doc)))
        assert dag_to_json(again) == doc

    def test_circuit_round_trip_with_matrix(self):
        import numpy as np

        m = np.eye(2, dtype=complex)
        c = Circuit(1, (Gate("ID", (0,), m),))
        doc = circuit_to_json(c)
        again = circuit_from_json(json.loads(json.dumps(doc)))
        assert again.gates[0].name == "ID"
        assert np.allclose(again.gates[0].matrix, m)

    def test_malformed_rejected(self):
        with pytest.raises(GraphFormatError):
            dag_from_json({"vertices": [{"id": 0}], "edges": []})
        with pytest.raises(GraphFormatError):
            circuit_from_json({"gates": []})

    def test_dot_export(self):
        g = build_dag(Circuit(2, (Gate("CX", (0, 1)),)))
        dot = dag_to_dot(g, cut_edges=[0])
        assert dot.startswith("digraph")
        assert "shape=box" in dot
        assert "style=dashed color=red" in dot


@pytest.mark.parametrize("seed", range(30))
def test_built_dags_always_legal(seed):
    rng = random.Random(seed)
    g = build_dag(random_circuit(rng))
    legal = validate_legal(g)
    assert legal.t == len(g.input_ids())
