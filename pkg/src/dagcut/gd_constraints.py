"""Constraint-model solver over vertex-to-partition assignment variables.

The model assigns every vertex to exactly one of P partitions; an edge is
cut exactly when its endpoints land in different partitions.  Each
partition pays one qubit per primary input assigned to it plus one per
crossing edge entering it, bounded by the budget Q.  Empty partitions are
not allowed, and acceptability is enforced per connected piece: every
component of the kept-edge graph must contain a directed path from an
original input to an original output.  (Requiring a path merely per
partition is strictly weaker: a pathless piece can hide next to a healthy
one, producing assignments that no duplication certificate matches.)

Duplication count is minimized.  The builtin backend is a deterministic
branch-and-bound over vertices in id order; the smtlib backend emits the
same model as an SMT-LIB2 document for external solvers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from ._bitgraph import bitgraph, evaluate_cut
from .dag_core import DagcutError, INPUT, OUTPUT, LegalDag
from .duplication import ClusterAssignment, CutSet, duplicate


@dataclass(frozen=True)
class SolverOptions:
    connectivity_required: bool = False
    pair_in_out_same_qubit: bool = False
    p_max: int = 1
    beta_cap: int | None = None
    backend: str = "builtin"  # "builtin" | "smtlib_export"

    def __post_init__(self):
        if self.p_max < 1:
            raise DagcutError("p_max must be >= 1")


@dataclass(frozen=True)
class ConstraintModel:
    graph: LegalDag
    Q: int
    P: int
    opts: SolverOptions
    vertex_ids: tuple[int, ...]
    edge_ids: tuple[int, ...]

    @property
    def num_assignment_vars(self) -> int:
        return len(self.vertex_ids) * self.P

    @property
    def num_cut_vars(self) -> int:
        return len(self.edge_ids)


@dataclass(frozen=True)
class PartitionSolution:
    P: int
    partition_of: tuple[int, ...]  # aligned with model.vertex_ids
    cuts: tuple[int, ...]  # edge ids, sorted
    budgets: tuple[int, ...]  # inputs + entering cut edges, per partition

    @property
    def cut_count(self) -> int:
        return len(self.cuts)


def build_model(g: LegalDag, Q: int, P: int, opts: SolverOptions) -> ConstraintModel:
    if Q < 1 or P < 1:
        raise DagcutError("Q and P must be >= 1")
    return ConstraintModel(
        graph=g, Q=Q, P=P, opts=opts,
        vertex_ids=tuple(sorted(v.id for v in g.graph.vertices)),
        edge_ids=tuple(sorted(e.id for e in g.graph.edges)),
    )


def _io_pairs(g: LegalDag) -> list[tuple[int, int]]:
    """Input/output vertex pairs representing the same qubit.

    Paired by equal label when input and output labels match up one-to-one
    (circuit-built dags label both ends q<i>), positionally otherwise.
    """
    ins = [v for v in g.graph.vertices if v.kind == INPUT]
    outs = [v for v in g.graph.vertices if v.kind == OUTPUT]
    ins.sort(key=lambda v: v.id)
    outs.sort(key=lambda v: v.id)
    in_labels = sorted(v.label for v in ins)
    out_labels = sorted(v.label for v in outs)
    if in_labels == out_labels and len(set(in_labels)) == len(in_labels):
        by_label = {v.label: v.id for v in outs}
        return [(v.id, by_label[v.label]) for v in ins]
    return [(a.id, b.id) for a, b in zip(ins, outs)]


def solve_model(m: ConstraintModel) -> PartitionSolution | None:
    """Minimal-cut assignment for the model's fixed P, or None if infeasible.

    Deterministic branch and bound: vertices in id order, partition indices
    ascending with restricted growth (vertex i may open partition `used`
    only when 0..used-1 exist), pruning on the per-partition budget, the cut
    incumbent, and the remaining-vertices count needed to fill P partitions.
    """
    g = m.graph
    bg = bitgraph(g)
    n = bg.n
    P, Q = m.P, m.Q
    if P > n:
        return None
    kind = {v.id: v.kind for v in g.graph.vertices}
    is_input = [kind[vid] == INPUT for vid in bg.vertex_ids]

    # edges whose both endpoints have index <= i, grouped by the later one
    edges_at: list[list[tuple[int, int, int]]] = [[] for _ in range(n)]
    for pos, (a, b) in enumerate(bg.edge_ends):
        lo, hi = (a, b) if a > b else (b, a)
        edges_at[lo].append((hi, pos, b))  # (other index, edge position, head index)

    pairs = _io_pairs(g) if m.opts.pair_in_out_same_qubit else []
    pair_idx = [(bg.index_of[a], bg.index_of[b]) for a, b in pairs]

    cap = m.opts.beta_cap
    best: list[PartitionSolution | None] = [None]
    limit = [cap if cap is not None else len(bg.edge_ids)]

    assign = [-1] * n
    inputs = [0] * P
    entering = [0] * P
    cut_stack: list[int] = []

    def leaf_ok() -> PartitionSolution | None:
        positions = tuple(sorted(cut_stack))
        acceptable, _sizes, comps, _red = evaluate_cut(bg, positions)
        if not acceptable:
            return None
        if m.opts.connectivity_required:
            for p in range(P):
                members = [i for i in range(n) if assign[i] == p]
                mask = 0
                for i in members:
                    mask |= 1 << i
                if sum(1 for c in comps if c & mask) != 1:
                    return None
        if pair_idx:
            for p in range(P):
                if not any(assign[a] == p and assign[b] == p for a, b in pair_idx):
                    return None
        cuts = tuple(sorted(bg.edge_ids[pos] for pos in positions))
        budgets = tuple(inputs[p] + entering[p] for p in range(P))
        return PartitionSolution(P, tuple(assign), cuts, budgets)

    def dfs(i: int, used: int) -> None:
        if len(cut_stack) > limit[0]:
            return
        if P - used > n - i:
            return
        if i == n:
            if used != P:
                return
            sol = leaf_ok()
            if sol is not None and (best[0] is None or sol.cut_count < limit[0] + 1):
                best[0] = sol
                limit[0] = sol.cut_count - 1  # only strictly better from here on
            return
        top = min(used, P - 1)
        for p in range(top + 1):
            assign[i] = p
            if is_input[i]:
                inputs[p] += 1
            new_cuts = []
            ok = True
            for other, pos, head in edges_at[i]:
                if assign[other] == -1:
                    continue
                if assign[other] != p:
                    hp = assign[head] if head != i else p
                    entering[hp] += 1
                    cut_stack.append(pos)
                    new_cuts.append((pos, hp))
                    if inputs[hp] + entering[hp] > Q:
                        ok = False
                        break
            if ok and inputs[p] + entering[p] <= Q and len(cut_stack) <= limit[0]:
                dfs(i + 1, used + (1 if p == used else 0))
            for pos, hp in new_cuts:
                entering[hp] -= 1
                cut_stack.pop()
            if is_input[i]:
                inputs[p] -= 1
            assign[i] = -1
            if best[0] is not None and limit[0] < 0:
                return

    dfs(0, 0)
    sol = best[0]
    if sol is not None and cap is not None and sol.cut_count > cap:
        return None
    return sol


def iterate_partitions(
    g: LegalDag, Q: int, opts: SolverOptions
) -> tuple[int, PartitionSolution] | None:
    """Smallest feasible partition count with its minimal-cut solution."""
    for P in range(1, opts.p_max + 1):
        sol = solve_model(build_model(g, Q, P, opts))
        if sol is not None:
            return P, sol
    return None


def best_cut_solution(
    g: LegalDag, Q: int, opts: SolverOptions
) -> tuple[int, PartitionSolution] | None:
    """Globally minimal cut count over P = 1..p_max (ties: smallest P).

    iterate_partitions stops at the first feasible P; this helper keeps
    scanning, since a larger partition count occasionally admits strictly
    fewer duplications.
    """
    result: tuple[int, PartitionSolution] | None = None
    cap = opts.beta_cap
    for P in range(1, opts.p_max + 1):
        sol = solve_model(build_model(g, Q, P, replace(opts, beta_cap=cap)))
        if sol is not None:
            result = (P, sol)
            cap = sol.cut_count - 1
            if cap < 0:
                break
    return result


def induced_cluster_assignment(
    g: LegalDag, sol: PartitionSolution
) -> tuple[CutSet, ClusterAssignment]:
    """Map a partition assignment onto duplication-side structures.

    Components of the duplicated graph are grouped by the partition of
    their (original) vertices, giving the cluster assignment whose stats
    must reproduce the partition budgets.
    """
    cuts = CutSet.of(sol.cuts)
    d = duplicate(g, cuts)
    vertex_part = dict(zip(sorted(v.id for v in g.graph.vertices), sol.partition_of))
    for eid, x in d.synthetic_outputs.items():
        vertex_part[x] = vertex_part[d.origin.graph.edge(eid).src]
    for eid, y in d.synthetic_inputs.items():
        vertex_part[y] = vertex_part[d.origin.graph.edge(eid).dst]
    from .dag_core import components as _components

    comps = _components(d.graph)
    raw = []
    for comp in comps:
        parts = {vertex_part[v] for v in comp}
        if len(parts) != 1:
            raise DagcutError("component split across partitions; cut bookkeeping bug")
        raw.append(parts.pop())
    relabel: dict[int, int] = {}
    cluster_of = []
    for p in raw:
        if p not in relabel:
            relabel[p] = len(relabel)
        cluster_of.append(relabel[p])
    return cuts, ClusterAssignment(tuple(cluster_of), len(relabel))


# --- SMT-LIB2 emission ------------------------------------------------------


def _b(name: str) -> str:
    return f"(declare-fun {name} () Int)\n(assert (and (>= {name} 0) (<= {name} 1)))"


def emit_smtlib(m: ConstraintModel) -> str:
    """Render the model as SMT-LIB2 (QF_LIA, 0/1 integer variables).

    The objective is emitted as a `minimize` command as understood by
    optimizing solvers; for plain solvers, drop it and binary-search the
    bound by re-asserting `(<= cut_total B)` for shrinking B.  Reachability
    closures carry explicit rank variables so a model cannot certify a path
    that is not there.
    """
    g = m.graph.graph
    P = m.P
    n_big = len(m.vertex_ids) + 1
    kind = {v.id: v.kind for v in g.vertices}
    lines: list[str] = []
    add = lines.append
    add("; graph-duplication partition model")
    add("(set-logic QF_LIA)")
    add("(set-option :produce-models true)")

    for v in m.vertex_ids:
        for p in range(P):
            add(_b(f"o_{v}_{p}"))
    for e in m.edge_ids:
        add(_b(f"c_{e}"))

    for v in m.vertex_ids:
        add(f"(assert (= (+ {' '.join(f'o_{v}_{p}' for p in range(P))}) 1))"
            if P > 1 else f"(assert (= o_{v}_0 1))")
    for p in range(P):
        add(f"(assert (>= (+ {' '.join(f'o_{v}_{p}' for v in m.vertex_ids)}) 1))")

    # cut iff endpoints differ
    for eid in m.edge_ids:
        e = g.edge(eid)
        for p in range(P):
            add(f"(assert (>= c_{eid} (- o_{e.src}_{p} o_{e.dst}_{p})))")
            add(f"(assert (>= c_{eid} (- o_{e.dst}_{p} o_{e.src}_{p})))")
            add(f"(assert (<= c_{eid} (- 2 (+ o_{e.src}_{p} o_{e.dst}_{p}))))")

    # budget: inputs + entering cut edges, linearized via ein_{e}_{p}
    for eid in m.edge_ids:
        e = g.edge(eid)
        for p in range(P):
            add(_b(f"ein_{eid}_{p}"))
            add(f"(assert (<= ein_{eid}_{p} c_{eid}))")
            add(f"(assert (<= ein_{eid}_{p} o_{e.dst}_{p}))")
            add(f"(assert (>= ein_{eid}_{p} (- (+ c_{eid} o_{e.dst}_{p}) 1)))")
    for p in range(P):
        terms = [f"o_{v}_{p}" for v in m.vertex_ids if kind[v] == INPUT]
        terms += [f"ein_{eid}_{p}" for eid in m.edge_ids]
        add(f"(assert (<= (+ {' '.join(terms)}) {m.Q}))")

    # acceptability: rank-supported closures along uncut edges
    #   reach: forward from original inputs;  coreach: backward from outputs
    #   alive: every vertex weakly connected to a reach&coreach witness
    for v in m.vertex_ids:
        add(_b(f"reach_{v}"))
        add(_b(f"coreach_{v}"))
        add(_b(f"alive_{v}"))
        add(_b(f"hit_{v}"))
        for r in ("rankf", "rankb", "ranku"):
            add(f"(declare-fun {r}_{v} () Int)")
            add(f"(assert (and (>= {r}_{v} 0) (<= {r}_{v} {n_big})))")
        add(f"(assert (<= hit_{v} reach_{v}))")
        add(f"(assert (<= hit_{v} coreach_{v}))")
        add(f"(assert (>= hit_{v} (- (+ reach_{v} coreach_{v}) 1)))")
        add(f"(assert (= alive_{v} 1))")

    fwd_support: dict[int, list[str]] = {v: [] for v in m.vertex_ids}
    bwd_support: dict[int, list[str]] = {v: [] for v in m.vertex_ids}
    und_support: dict[int, list[str]] = {v: [] for v in m.vertex_ids}
    for eid in m.edge_ids:
        e = g.edge(eid)
        add(_b(f"fwd_{eid}"))
        add(f"(assert (<= fwd_{eid} (- 1 c_{eid})))")
        add(f"(assert (<= fwd_{eid} reach_{e.src}))")
        add(f"(assert (<= (+ rankf_{e.src} 1) (+ rankf_{e.dst} (* {n_big} (- 1 fwd_{eid})))))")
        fwd_support[e.dst].append(f"fwd_{eid}")
        add(_b(f"bwd_{eid}"))
        add(f"(assert (<= bwd_{eid} (- 1 c_{eid})))")
        add(f"(assert (<= bwd_{eid} coreach_{e.dst}))")
        add(f"(assert (<= (+ rankb_{e.dst} 1) (+ rankb_{e.src} (* {n_big} (- 1 bwd_{eid})))))")
        bwd_support[e.src].append(f"bwd_{eid}")
        for tag, u, w in ((0, e.src, e.dst), (1, e.dst, e.src)):
            name = f"und_{eid}_{tag}"
            add(_b(name))
            add(f"(assert (<= {name} (- 1 c_{eid})))")
            add(f"(assert (<= {name} alive_{u}))")
            add(f"(assert (<= (+ ranku_{u} 1) (+ ranku_{w} (* {n_big} (- 1 {name})))))")
            und_support[w].append(name)

    for v in m.vertex_ids:
        base = "1" if kind[v] == INPUT else "0"
        sup = " ".join([base] + fwd_support[v]) if fwd_support[v] else base
        add(f"(assert (<= reach_{v} (+ {sup})))" if fwd_support[v]
            else f"(assert (<= reach_{v} {base}))")
        base = "1" if kind[v] == OUTPUT else "0"
        add(f"(assert (<= coreach_{v} (+ {' '.join([base] + bwd_support[v])})))"
            if bwd_support[v] else f"(assert (<= coreach_{v} {base}))")
        sup = [f"hit_{v}"] + und_support[v]
        add(f"(assert (<= alive_{v} (+ {' '.join(sup)})))")

    if m.opts.connectivity_required:
        _emit_connectivity(add, m, kind, n_big)
    if m.opts.pair_in_out_same_qubit:
        for p in range(P):
            prods = []
            for a, b in _io_pairs(m.graph):
                name = f"pair_{a}_{b}_{p}"
                add(_b(name))
                add(f"(assert (<= {name} o_{a}_{p}))")
                add(f"(assert (<= {name} o_{b}_{p}))")
                prods.append(name)
            add(f"(assert (>= (+ {' '.join(prods)}) 1))")

    add("(declare-fun cut_total () Int)")
    add(f"(assert (= cut_total (+ {' '.join(f'c_{e}' for e in m.edge_ids)})))"
        if len(m.edge_ids) > 1 else f"(assert (= cut_total c_{m.edge_ids[0]}))")
    if m.opts.beta_cap is not None:
        add(f"(assert (<= cut_total {m.opts.beta_cap}))")
    add("(minimize cut_total)")
    add("(check-sat)")
    add("(get-model)")
    return "\n".join(lines) + "\n"


def _emit_connectivity(add, m: ConstraintModel, kind, n_big: int) -> None:
    """Per-partition BFS scaffold: one root, positive distances elsewhere,
    and every non-root supported by an in-partition neighbor one step
    closer."""
    g = m.graph.graph
    for v in m.vertex_ids:
        add(f"(declare-fun dist_{v} () Int)")
        add(f"(assert (and (>= dist_{v} 0) (<= dist_{v} {n_big})))")
        for p in range(m.P):
            add(_b(f"root_{v}_{p}"))
            add(f"(assert (<= root_{v}_{p} o_{v}_{p}))")
    for p in range(m.P):
        add(f"(assert (= (+ {' '.join(f'root_{v}_{p}' for v in m.vertex_ids)}) 1))")
    for v in m.vertex_ids:
        anyroot = " ".join(f"root_{v}_{p}" for p in range(m.P))
        expr = f"(+ {anyroot})" if m.P > 1 else anyroot
        add(f"(assert (<= dist_{v} (* {n_big} (- 1 {expr}))))")
        add(f"(assert (>= dist_{v} (- 1 {expr})))")
        supports = []
        for e in g.edges:
            u = None
            if e.src == v:
                u = e.dst
            elif e.dst == v:
                u = e.src
            if u is None:
                continue
            name = f"near_{e.id}_{v}"
            add(_b(name))
            add(f"(assert (<= {name} (- 1 c_{e.id})))")
            add(f"(assert (<= (+ dist_{u} 1) (+ dist_{v} (* {n_big} (- 1 {name})))))")
            supports.append(name)
        expr_sup = " ".join(supports) if supports else "0"
        add(f"(assert (>= (+ {expr_sup} {expr}) 1))"
            if supports else f"(assert (>= {expr} 1))")


_MODEL_RE = re.compile(
    r"\(define-fun\s+([A-Za-z_][\w]*)\s*\(\s*\)\s*Int\s+(-?\s*\d+)\s*\)")


def parse_smtlib_model(text: str) -> dict[str, int]:
    """Extract integer assignments from a solver's get-model output."""
    out = {}
    for name, value in _MODEL_RE.findall(text):
        out[name] = int(value.replace(" ", ""))
    return out


def assignment_from_model(
    values: dict[str, int], m: ConstraintModel
) -> PartitionSolution:
    """Rebuild and verify a partition solution from parsed model values."""
    partition_of = []
    for v in m.vertex_ids:
        ps = [p for p in range(m.P) if values.get(f"o_{v}_{p}", 0) == 1]
        if len(ps) != 1:
            raise DagcutError(f"model assigns vertex {v} to {len(ps)} partitions")
        partition_of.append(ps[0])
    part = dict(zip(m.vertex_ids, partition_of))
    cuts = tuple(sorted(
        eid for eid in m.edge_ids
        if part[m.graph.graph.edge(eid).src] != part[m.graph.graph.edge(eid).dst]))
    for eid in m.edge_ids:
        declared = values.get(f"c_{eid}", 0)
        actual = 1 if eid in cuts else 0
        if declared != actual:
            raise DagcutError(f"model cut flag for edge {eid} contradicts assignment")
    sol = PartitionSolution(m.P, tuple(partition_of),
                            cuts, _budgets(m, partition_of, cuts))
    _verify_partition(m, sol)
    return sol


def _budgets(m: ConstraintModel, partition_of, cuts) -> tuple[int, ...]:
    g = m.graph.graph
    part = dict(zip(m.vertex_ids, partition_of))
    kind = {v.id: v.kind for v in g.vertices}
    budgets = [0] * m.P
    for v in m.vertex_ids:
        if kind[v] == INPUT:
            budgets[part[v]] += 1
    for eid in cuts:
        budgets[part[g.edge(eid).dst]] += 1
    return tuple(budgets)


def _verify_partition(m: ConstraintModel, sol: PartitionSolution) -> None:
    if any(b > m.Q for b in sol.budgets):
        raise DagcutError("partition budget exceeded")
    if len(set(sol.partition_of)) != m.P:
        raise DagcutError("empty partition")
    bg = bitgraph(m.graph)
    positions = tuple(sorted(bg.edge_pos[e] for e in sol.cuts))
    acceptable, _sizes, comps, _red = evaluate_cut(bg, positions)
    if not acceptable:
        raise DagcutError("assignment leaves an unacceptable component")
    if m.opts.connectivity_required:
        for p in range(m.P):
            mask = 0
            for i, q in enumerate(sol.partition_of):
                if q == p:
                    mask |= 1 << i
            if sum(1 for c in comps if c & mask) != 1:
                raise DagcutError(f"partition {p} is not weakly connected")
    if m.opts.pair_in_out_same_qubit:
        part = dict(zip(m.vertex_ids, sol.partition_of))
        pairs = _io_pairs(m.graph)
        for p in range(m.P):
            if not any(part[a] == p and part[b] == p for a, b in pairs):
                raise DagcutError(f"partition {p} holds no full qubit wire")
