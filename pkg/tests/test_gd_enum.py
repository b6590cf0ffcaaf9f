import random

import pytest

from dagcut.dag_core import Circuit, DagGraph, Edge, Vertex, build_dag, validate_legal
from dagcut.gd_enum import (
    GdInstance,
    SearchBudgetExceeded,
    optimize_min_beta,
    pack_components,
    solve_decision,
    verify_solution,
)
from dagcut.random_dags import random_circuit
from dagcut.reductions import ThreePartitionInstance, gen_g0, gen_gbeta
from gd_oracle import naive_gd, naive_min_beta


def single_edge_dag():
    return validate_legal(DagGraph(
        (Vertex(0, "input", "a"), Vertex(1, "output", "b")), (Edge(0, 0, 1),)))


def small_corpus(count=40, seed=7):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        legal = validate_legal(build_dag(random_circuit(rng, max_qubits=3, max_gates=3)))
        if len(legal.graph.edges) <= 8:
            out.append(legal)
    return out


class TestPackComponents:
    def test_one_cluster(self):
        a = pack_components([3, 3, 4], 10, 1)
        assert a is not None and a.p == 1

    def test_exact_capacity(self):
        a = pack_components([10], 10, 1)
        assert a is not None

    def test_pairwise_overflow(self):
        assert pack_components([6, 6, 6], 10, 2) is None

    def test_oversized_item(self):
        assert pack_components([11], 10, 3) is None

    def test_empty(self):
        a = pack_components([], 5, 2)
        assert a is not None and a.p == 0

    def test_assignment_is_canonical(self):
        a = pack_components([2, 5, 2, 5], 7, 2)
        assert a is not None
        assert a.cluster_of[0] == 0  # first component opens cluster 0

    def test_needs_exact_search(self):
        # first-fit-decreasing fails here; exact search must succeed
        a = pack_components([5, 4, 3, 3, 3], 9, 2)
        assert a is not None
        loads = [0, 0]
        for size, c in zip([5, 4, 3, 3, 3], a.cluster_of):
            loads[c] += size
        assert sorted(loads) == [9, 9]


class TestSolveDecision:
    def test_single_edge_trivial_yes(self):
        sol = solve_decision(GdInstance(single_edge_dag(), 1, 1, 0))
        assert sol is not None
        assert sol.beta_used == 0
        assert verify_solution(sol)

    def test_g0_yes(self):
        art = gen_g0(ThreePartitionInstance(1, 10, (3, 3, 4)))
        sol = solve_decision(art.gd_instance)
        assert sol is not None and verify_solution(sol)

    def test_g0_no(self):
        art = gen_g0(ThreePartitionInstance(2, 16, (5, 5, 5, 5, 5, 7)))
        assert solve_decision(art.gd_instance) is None

    def test_gbeta_cuts_bridge(self):
        art = gen_gbeta(ThreePartitionInstance(1, 10, (3, 3, 4)), 1)
        sol = solve_decision(art.gd_instance)
        assert sol is not None
        assert sol.cuts.sorted() == list(art.designated_cuts)
        assert verify_solution(sol)

    def test_node_budget(self):
        art = gen_g0(ThreePartitionInstance(2, 16, (5, 5, 5, 5, 5, 7)))
        with pytest.raises(SearchBudgetExceeded):
            solve_decision(art.gd_instance, node_budget=0)

    def test_threads_match_sequential(self):
        art = gen_gbeta(ThreePartitionInstance(1, 6, (2, 2, 2)), 2)
        seq = solve_decision(art.gd_instance, threads=1)
        par = solve_decision(art.gd_instance, threads=3)
        assert seq is not None and par is not None
        assert seq.cuts == par.cuts
        assert seq.assignment == par.assignment


class TestOptimizeMinBeta:
    def test_separable_pair(self):
        g = build_dag(Circuit(2, ()))
        legal = validate_legal(g)
        result = optimize_min_beta(legal, 1, 2, 3)
        assert result is not None
        assert result[0] == 0

    def test_single_edge(self):
        result = optimize_min_beta(single_edge_dag(), 1, 2, 5)
        assert result is not None
        min_beta, sol = result
        assert min_beta == 0
        assert sol.assignment.p == 1

    def test_gadget_alone(self):
        B = 10
        art = gen_gbeta(ThreePartitionInstance(1, B, (3, 3, 4)), 1)
        # strip the g0 stars, keep one gadget: vertices labelled g0.*
        g = art.gd_instance.graph.graph
        keep = {v.id for v in g.vertices if v.label.startswith("g0.")}
        sub = DagGraph(
            tuple(v for v in g.vertices if v.id in keep),
            tuple(e for e in g.edges if e.src in keep and e.dst in keep),
        )
        legal = validate_legal(sub)
        assert legal.t == 2 * B - 1
        result = optimize_min_beta(legal, B, 2, 2)
        assert result is not None
        assert result[0] == 1
        assert verify_solution(result[1])


class TestAgainstNaiveOracle:
    @pytest.mark.parametrize("idx", range(40))
    def test_completeness_small_instances(self, idx):
        legal = small_corpus()[idx]
        rng = random.Random(idx)
        for _ in range(3):
            k = rng.randint(1, 4)
            alpha = rng.randint(1, 3)
            beta = rng.randint(0, 2)
            inst = GdInstance(legal, k, alpha, beta)
            fast = solve_decision(inst)
            assert (fast is not None) == naive_gd(inst)
            if fast is not None:
                assert verify_solution(fast)

    @pytest.mark.parametrize("idx", range(12))
    def test_min_beta_matches_naive(self, idx):
        legal = small_corpus()[idx]
        result = optimize_min_beta(legal, 2, 2, 2)
        naive = naive_min_beta(legal, 2, 2, 2)
        if result is None:
            assert naive is None
        else:
            assert result[0] == naive

    @pytest.mark.parametrize("idx", range(15))
    def test_pruning_never_changes_answers(self, idx):
        legal = small_corpus()[idx]
        for (k, alpha, beta) in [(1, 2, 1), (2, 1, 2), (2, 2, 2)]:
            inst = GdInstance(legal, k, alpha, beta)
            with_pruning = solve_decision(inst, prune_io_edges=True)
            without = solve_decision(inst, prune_io_edges=False)
            assert (with_pruning is None) == (without is None)
            if with_pruning is not None:
                assert with_pruning.cuts == without.cuts


class TestMonotonicity:
    @pytest.mark.parametrize("idx", range(10))
    def test_yes_is_upward_closed(self, idx):
        legal = small_corpus()[idx]
        rng = random.Random(100 + idx)
        k = rng.randint(1, 3)
        alpha = rng.randint(1, 2)
        beta = rng.randint(0, 1)
        if solve_decision(GdInstance(legal, k, alpha, beta)) is None:
            return
        for dk, da, db in [(1, 0, 0), (0, 1, 0), (0, 0, 1)]:
            assert solve_decision(GdInstance(legal, k + dk, alpha + da, beta + db)) is not None


def test_instance_validation():
    with pytest.raises(Exception):
        GdInstance(single_edge_dag(), 0, 1, 0)
    with pytest.raises(Exception):
        GdInstance(single_edge_dag(), 1, 1, -1)
