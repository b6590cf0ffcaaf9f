import pytest

from dagcut.dag_core import components
from dagcut.duplication import CutSet, duplicate, is_acceptable
from dagcut.gd_enum import solve_decision, verify_solution
from dagcut.reductions import (
    InvariantViolation,
    ThreePartitionInstance,
    enumerate_instances,
    expand_artifact,
    gen_connected,
    gen_g0,
    gen_gbeta,
    oracle_3partition,
    two_legal_expand,
)


class TestOracle:
    def test_yes_m1(self):
        inst = ThreePartitionInstance(1, 10, (3, 3, 4))
        assert oracle_3partition(inst) == [(3, 3, 4)]

    def test_yes_m2(self):
        inst = ThreePartitionInstance(2, 12, (4, 4, 4, 4, 4, 4))
        triples = oracle_3partition(inst)
        assert triples is not None
        assert all(sum(t) == 12 for t in triples)

    def test_no_case(self):
        inst = ThreePartitionInstance(2, 16, (5, 5, 5, 5, 5, 7))
        assert oracle_3partition(inst) is None

    def test_invariants_enforced(self):
        with pytest.raises(InvariantViolation):
            ThreePartitionInstance(1, 10, (2, 4, 4))  # 2 <= B/4
        with pytest.raises(InvariantViolation):
            ThreePartitionInstance(1, 10, (3, 3, 5))  # 5 >= B/2
        with pytest.raises(InvariantViolation):
            ThreePartitionInstance(1, 12, (3, 4, 4))  # sum != mB

    def test_enumeration_is_exhaustive_and_valid(self):
        seen = list(enumerate_instances(1, 16)) + list(enumerate_instances(2, 16))
        assert len(seen) > 20
        assert ThreePartitionInstance(1, 10, (3, 3, 4)) in seen
        for inst in seen:
            assert sum(inst.A) == inst.m * inst.B


class TestG0:
    def test_counts(self):
        inst = ThreePartitionInstance(1, 10, (3, 3, 4))
        art = gen_g0(inst)
        g = art.gd_instance.graph.graph
        assert len(g.vertices) == 2 * 10 + 3
        assert len(g.edges) == 2 * 10

    def test_legal_t(self):
        inst = ThreePartitionInstance(1, 10, (3, 3, 4))
        legal = gen_g0(inst).gd_instance.graph
        assert legal.t == 10
        assert len(components(legal.graph)) == 3

    def test_reduction_answer_matches(self):
        inst = ThreePartitionInstance(1, 10, (3, 3, 4))
        assert solve_decision(gen_g0(inst).gd_instance) is not None
        no_inst = ThreePartitionInstance(2, 16, (5, 5, 5, 5, 5, 7))
        assert solve_decision(gen_g0(no_inst).gd_instance) is None


class TestGbeta:
    def test_gadget_counts(self):
        B = 10
        inst = ThreePartitionInstance(1, B, (3, 3, 4))
        art = gen_gbeta(inst, 1)
        g = art.gd_instance.graph.graph
        # each gadget: B + (B-1) + 2 + (B-1) + B = 4B vertices and
        # B + (B-1) + 1 + (B-1) + B = 4B-1 edges
        assert len(g.vertices) == (2 * B + 3) + 4 * B
        assert len(g.edges) == 2 * B + (4 * B - 1)

    def test_hub_degrees(self):
        B = 10
        art = gen_gbeta(ThreePartitionInstance(1, B, (3, 3, 4)), 1)
        g = art.gd_instance.graph.graph
        degs = g.degrees()
        hubs = [v.id for v in g.vertices if v.label in ("g0.t1", "g0.t2")]
        assert [degs[h] for h in hubs] == [(B, B), (B, B)]

    def test_designated_cut_solves(self):
        inst = ThreePartitionInstance(1, 10, (3, 3, 4))
        art = gen_gbeta(inst, 1)
        sol = solve_decision(art.gd_instance)
        assert sol is not None
        assert sol.cuts.sorted() == list(art.designated_cuts)
        assert verify_solution(sol)

    def test_parameters(self):
        inst = ThreePartitionInstance(2, 12, (4, 4, 4, 4, 4, 4))
        art = gen_gbeta(inst, 2)
        assert art.gd_instance.k == 12
        assert art.gd_instance.alpha == 2 + 4
        assert art.gd_instance.beta == 2


class TestConnected:
    def test_is_connected_tree(self):
        inst = ThreePartitionInstance(1, 10, (3, 3, 4))
        legal = gen_connected(inst).gd_instance.graph
        g = legal.graph
        assert len(components(g)) == 1
        assert len(g.edges) == len(g.vertices) - 1  # caterpillar is a tree

    def test_designated_edges_count(self):
        for m, B, A in [(1, 10, (3, 3, 4)), (2, 12, (4, 4, 4, 4, 4, 4))]:
            art = gen_connected(ThreePartitionInstance(m, B, A))
            assert len(art.designated_cuts) == 6 * m - 2

    def test_designated_cut_layout(self):
        inst = ThreePartitionInstance(1, 10, (3, 3, 4))
        art = gen_connected(inst)
        legal = art.gd_instance.graph
        d = duplicate(legal, CutSet.of(art.designated_cuts))
        report = is_acceptable(d)
        assert report.ok
        counts = sorted(c.input_count for c in report.components)
        # 3m-1 connector components at B+3, leaves at a_i+1
        assert counts == sorted([13, 13] + [4, 4, 5])

    def test_reduction_answer_matches(self):
        yes = ThreePartitionInstance(1, 10, (3, 3, 4))
        sol = solve_decision(gen_connected(yes).gd_instance)
        assert sol is not None and verify_solution(sol)
        no = ThreePartitionInstance(2, 13, (4, 4, 4, 4, 4, 6))
        assert oracle_3partition(no) is None
        assert solve_decision(gen_connected(no).gd_instance) is None


class TestTwoLegalExpand:
    def test_wide_hub_becomes_chain(self):
        inst = ThreePartitionInstance(1, 10, (3, 3, 4))
        art = gen_g0(inst)
        legal = two_legal_expand(art.gd_instance.graph)
        assert legal.two_legal
        degs = legal.graph.degrees()
        gates = [v for v in legal.graph.vertices if v.kind == "gate"]
        assert all(degs[v.id] == (2, 2) for v in gates)
        # a hub of degree d becomes d-1 nodes
        assert len(gates) == sum(a - 1 for a in inst.A)

    def test_five_wide_example(self):
        from dagcut.reductions import _Builder

        b = _Builder()
        b.star("h", 5, 5)
        legal = b.legal()
        expanded = two_legal_expand(legal)
        gates = [v for v in expanded.graph.vertices if v.kind == "gate"]
        assert len(gates) == 4
        assert expanded.two_legal

    def test_degree_two_unchanged(self):
        from dagcut.reductions import _Builder

        b = _Builder()
        b.star("h", 2, 2)
        legal = b.legal()
        expanded = two_legal_expand(legal)
        assert len(expanded.graph.vertices) == len(legal.graph.vertices)

    def test_degree_one_hub_spliced(self):
        # a 1-in/1-out pass-through cannot exist in a 2-legal dag; it is
        # removed, which leaves the cut structure untouched
        from dagcut.reductions import _Builder

        b = _Builder()
        b.star("h", 1, 1)
        legal = b.legal()
        expanded = two_legal_expand(legal)
        assert expanded.two_legal
        assert len(expanded.graph.vertices) == 2
        assert expanded.t == 1

    def test_pass_through_parallel_to_direct_edge_refused(self):
        from dagcut.dag_core import DagcutError, DagGraph, Edge, Vertex, validate_legal

        g = DagGraph(
            (Vertex(0, "input", "i1"), Vertex(1, "input", "i2"),
             Vertex(2, "gate", "u"), Vertex(3, "gate", "g"), Vertex(4, "gate", "w"),
             Vertex(5, "output", "o1"), Vertex(6, "output", "o2")),
            (Edge(0, 0, 2), Edge(1, 1, 2), Edge(2, 2, 3), Edge(3, 2, 4),
             Edge(4, 3, 4), Edge(5, 4, 5), Edge(6, 4, 6)))
        with pytest.raises(DagcutError, match="consolidate"):
            two_legal_expand(validate_legal(g))

    def test_preserves_counts_and_components(self):
        inst = ThreePartitionInstance(1, 10, (3, 3, 4))
        legal = gen_g0(inst).gd_instance.graph
        expanded = two_legal_expand(legal)
        assert expanded.t == legal.t
        assert len(components(expanded.graph)) == len(components(legal.graph))

    def test_expand_preserves_g0_answer(self):
        yes = expand_artifact(gen_g0(ThreePartitionInstance(1, 10, (3, 3, 4))))
        assert yes.gd_instance.graph.two_legal
        assert solve_decision(yes.gd_instance) is not None
        no = expand_artifact(gen_g0(ThreePartitionInstance(2, 16, (5, 5, 5, 5, 5, 7))))
        assert solve_decision(no.gd_instance) is None


class TestExpandedConnectedDivergence:
    """The chain two-legalization breaks the connected-family reduction.

    A star hub is atomic: separating anything from it costs one cut per
    attachment.  Its chain expansion has a width-1 interior, so single
    carry cuts produce partial splits with no star-form counterpart; the
    resulting hybrid components repack into fewer clusters than the forced
    backbone certificate needs, independent of where the backbone edges
    attach along the chain.  The forest families do not admit this (their
    bridge gadgets strand more than k inputs on one side of any carry cut,
    verified exhaustively in the acceptance suite).

    For m = 1 the budget is exactly tight - cluster capacity equals total
    inputs plus the full cut allowance - which closes every shortcut; with
    m = 2 the slack admits verified certificates that match no triple
    partition, so solver and oracle genuinely diverge there.
    """

    def test_m1_agreement_holds(self):
        for inst in enumerate_instances(1, 12):
            art = expand_artifact(gen_connected(inst))
            got = solve_decision(art.gd_instance)
            assert (got is not None) == (oracle_3partition(inst) is not None)
            if got is not None:
                assert verify_solution(got)

    def test_m2_yes_preserved_no_lost(self):
        """Expansion keeps every YES answer; each of the three NO instances
        gains a verified certificate cheaper than the forced backbone set."""
        diverged = []
        for inst in enumerate_instances(2, 16):
            expected = oracle_3partition(inst) is not None
            art = expand_artifact(gen_connected(inst))
            sol = solve_decision(art.gd_instance)
            if expected:
                assert sol is not None, inst
                assert verify_solution(sol), inst
            elif sol is not None:
                assert verify_solution(sol), "cheat certificate must stand on its own"
                assert sol.beta_used < art.gd_instance.beta
                diverged.append(inst.A)
        assert diverged == [
            (4, 4, 4, 4, 4, 6), (4, 4, 4, 6, 6, 6), (5, 5, 5, 5, 5, 7)]

    def test_m2_counterexample_is_real(self):
        inst = ThreePartitionInstance(2, 13, (4, 4, 4, 4, 4, 6))
        assert oracle_3partition(inst) is None
        assert solve_decision(gen_connected(inst).gd_instance) is None
        art = expand_artifact(gen_connected(inst))
        sol = solve_decision(art.gd_instance)
        assert sol is not None, "divergence disappeared; re-examine the gadget"
        assert verify_solution(sol), "solver certificate must stand on its own"
        assert sol.beta_used < art.gd_instance.beta  # cheaper than the forced set
