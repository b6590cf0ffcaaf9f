"""Seeded random circuits and legal dags for corpora and property tests."""

from __future__ import annotations

import random

from .dag_core import Circuit, Gate, LegalDag, build_dag, consolidate_chains, validate_legal

_NAMES_1Q = ("H", "X", "Y", "Z", "S", "T")
_NAMES_2Q = ("CX", "CZ", "SWAP")


def random_circuit(rng: random.Random, max_qubits: int = 6,
                   max_gates: int = 8, max_arity: int = 3) -> Circuit:
    n = rng.randint(1, max_qubits)
    gates = []
    for _ in range(rng.randint(0, max_gates)):
        arity = rng.randint(1, min(max_arity, n))
        qubits = tuple(rng.sample(range(n), arity))
        if arity == 1:
            name = rng.choice(_NAMES_1Q)
        elif arity == 2:
            name = rng.choice(_NAMES_2Q)
        else:
            name = f"U{arity}"
        gates.append(Gate(name, qubits))
    return Circuit(n, tuple(gates))


def random_legal_dag(rng: random.Random, max_vertices: int = 40) -> LegalDag:
    """Random legal dag within the vertex bound, occasionally consolidated."""
    while True:
        max_qubits = max(1, min(10, (max_vertices - 1) // 3))
        n = rng.randint(1, max_qubits)
        budget = max_vertices - 2 * n
        circuit = random_circuit(
            rng,
            max_qubits=n,
            max_gates=rng.randint(0, max(0, budget)),
        )
        g = build_dag(circuit)
        if len(g.vertices) > max_vertices:
            continue
        legal = validate_legal(g)
        if rng.random() < 0.25:
            legal = consolidate_chains(legal)
        return legal


def corpus(seed: int, count: int, max_vertices: int = 40) -> list[LegalDag]:
    rng = random.Random(seed)
    return [random_legal_dag(rng, max_vertices) for _ in range(count)]
