"""dagcut: timelike quantum circuit cutting as exact graph duplication.

Model circuits as legal dags, place wire cuts by solving the graph
duplication problem exactly, generate 3-partition reduction families as
executable oracles, and verify quasi-probability wire-cut plans by exact
fragment simulation.
"""

from .dag_core import (
    Circuit,
    DagcutError,
    DagGraph,
    Edge,
    Gate,
    GraphFormatError,
    IllegalDagError,
    LegalDag,
    PathDecomposition,
    Vertex,
    build_dag,
    build_layout,
    components,
    consolidate_chains,
    edge_disjoint_paths,
    validate_legal,
)
from .duplication import (
    ClusterAssignment,
    CutSet,
    DuplicatedDag,
    UnknownEdgeError,
    cluster_stats,
    duplicate,
    duplicated_input_edge_check,
    is_acceptable,
)
from .gd_constraints import (
    ConstraintModel,
    PartitionSolution,
    SolverOptions,
    best_cut_solution,
    build_model,
    emit_smtlib,
    iterate_partitions,
    parse_smtlib_model,
    solve_model,
)
from .gd_enum import (
    GdInstance,
    GdSolution,
    optimize_min_beta,
    pack_components,
    solve_decision,
    verify_solution,
)
from .knitting import CutPlan, CutTerm, make_plan, plan_report, wire_cut_terms
from .reductions import (
    ReductionArtifact,
    ThreePartitionInstance,
    gen_connected,
    gen_g0,
    gen_gbeta,
    oracle_3partition,
    two_legal_expand,
)
from .simverify import (
    TooManyQubits,
    UnknownGate,
    crosscheck,
    reconstruct_expectation,
    simulate_expectation,
)

__version__ = "0.1.0"
