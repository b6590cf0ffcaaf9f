"""Command-line entry point.

Exit codes: 0 success/YES, 3 NO or infeasible, 2 invalid input, 1 internal
error.  All artifacts are JSON with a "schema": "dagcut/1" field; identical
inputs produce byte-identical outputs.  A config file of key=value lines
may preset any long option; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import dag_core
from .dag_core import (
    DagcutError,
    GraphFormatError,
    IllegalDagError,
    build_layout,
    circuit_from_json,
    dag_from_json,
    dag_to_dot,
    dag_to_json,
    dumps,
    edge_disjoint_paths,
    validate_legal,
)
from .duplication import CutSet
from .gd_constraints import (
    SolverOptions,
    build_model,
    emit_smtlib,
    iterate_partitions,
)
from .gd_enum import GdInstance, GdSolution, optimize_min_beta, solve_decision
from .knitting import make_plan, plan_report
from .reductions import (
    ThreePartitionInstance,
    expand_artifact,
    gen_connected,
    gen_g0,
    gen_gbeta,
)
from .simverify import crosscheck

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INVALID = 2
EXIT_NO = 3


def _read_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise GraphFormatError(f"cannot read {path}: {exc}") from exc


def _load_graph(args) -> tuple:
    """Graph (validated legal) from --graph or --circuit; layout when built."""
    if getattr(args, "circuit", None):
        circuit = circuit_from_json(_read_json(args.circuit))
        graph, layout = build_layout(circuit)
        return validate_legal(graph, getattr(args, "two_legal", False)), circuit, layout
    doc = _read_json(args.graph)
    graph = dag_from_json(doc)
    return validate_legal(graph, getattr(args, "two_legal", False)), None, None


def _write(args, doc: dict) -> None:
    text = dumps(doc)
    out = getattr(args, "output", None)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_validate(args) -> int:
    legal, _, _ = _load_graph(args)
    g = legal.graph
    _write(args, {
        "schema": dag_core.SCHEMA,
        "legal": True,
        "t": legal.t,
        "two_legal": legal.two_legal,
        "vertices": len(g.vertices),
        "edges": len(g.edges),
        "graph": dag_to_json(g),
    })
    return EXIT_OK


def cmd_paths(args) -> int:
    legal, _, _ = _load_graph(args)
    decomposition = edge_disjoint_paths(legal)
    _write(args, {
        "schema": dag_core.SCHEMA,
        "t": legal.t,
        "paths": [list(p) for p in decomposition.paths],
    })
    return EXIT_OK


def cmd_export_dot(args) -> int:
    legal, _, _ = _load_graph(args)
    text = dag_to_dot(legal.graph)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _solution_doc(sol: GdSolution) -> dict:
    return {
        "schema": dag_core.SCHEMA,
        "answer": "yes",
        "witness": sol.witness_kind,
        "beta_used": sol.beta_used,
        "cuts": sol.cuts.sorted(),
        "cluster_of_component": list(sol.assignment.cluster_of),
        "clusters": [
            {"index": i, "inputs": n, "outputs": n}
            for i, n in enumerate(sol.cluster_inputs)
        ],
    }


def cmd_solve(args) -> int:
    legal, _, _ = _load_graph(args)
    if args.optimize:
        result = optimize_min_beta(legal, args.k, args.alpha, args.beta,
                                   threads=args.threads)
        if result is None:
            _write(args, {"schema": dag_core.SCHEMA, "answer": "no"})
            return EXIT_NO
        min_beta, sol = result
        doc = _solution_doc(sol)
        doc["min_beta"] = min_beta
        _write(args, doc)
        return EXIT_OK
    inst = GdInstance(legal, args.k, args.alpha, args.beta)
    sol = solve_decision(inst, threads=args.threads)
    if sol is None:
        _write(args, {"schema": dag_core.SCHEMA, "answer": "no"})
        return EXIT_NO
    _write(args, _solution_doc(sol))
    return EXIT_OK


def cmd_knit_opt(args) -> int:
    legal, _, _ = _load_graph(args)
    opts = SolverOptions(
        connectivity_required=args.connected,
        pair_in_out_same_qubit=args.pair_io,
        p_max=args.pmax,
        beta_cap=args.beta_cap,
        backend=args.backend,
    )
    if args.emit or args.backend == "smtlib":
        p = args.pmax if args.backend == "smtlib" else 1
        model = build_model(legal, args.Q, p, opts)
        text = emit_smtlib(model)
        if args.emit:
            Path(args.emit).write_text(text)
        if args.backend == "smtlib":
            if not args.emit:
                sys.stdout.write(text)
            return EXIT_OK
    found = iterate_partitions(legal, args.Q, opts)
    if found is None:
        _write(args, {"schema": dag_core.SCHEMA, "answer": "infeasible"})
        return EXIT_NO
    P, sol = found
    _write(args, {
        "schema": dag_core.SCHEMA,
        "answer": "yes",
        "partitions": P,
        "cuts": list(sol.cuts),
        "cut_count": sol.cut_count,
        "budgets": list(sol.budgets),
        "partition_of_vertex": list(sol.partition_of),
    })
    return EXIT_OK


def cmd_gen(args) -> int:
    values = tuple(int(x) for x in args.a.split(","))
    m = len(values) // 3
    inst = ThreePartitionInstance(m, args.B, values)
    if args.family == "g0":
        art = gen_g0(inst)
    elif args.family == "gbeta":
        if args.beta is None or args.beta < 1:
            raise DagcutError("--beta >= 1 required for the gbeta family")
        art = gen_gbeta(inst, args.beta)
    elif args.family == "connected":
        art = gen_connected(inst)
    else:
        raise DagcutError(f"unknown family {args.family!r}")
    if args.two_legal:
        art = expand_artifact(art)
    gd = art.gd_instance
    _write(args, {
        "schema": dag_core.SCHEMA,
        "family": art.family,
        "graph": dag_to_json(gd.graph.graph),
        "k": gd.k,
        "alpha": gd.alpha,
        "beta": gd.beta,
        "provenance": {"m": inst.m, "B": inst.B, "A": list(inst.A)},
        "designated_cuts": list(art.designated_cuts),
        "expected_cluster_inputs": (
            list(art.expected_yes_layout) if art.expected_yes_layout else None),
    })
    return EXIT_OK


def cmd_plan(args) -> int:
    legal, circuit, layout = _load_graph(args)
    cert = _read_json(args.certificate)
    cuts = CutSet.of(cert["cuts"])
    from .duplication import ClusterAssignment

    cluster_of = tuple(cert["cluster_of_component"])
    assignment = ClusterAssignment(cluster_of, max(cluster_of, default=-1) + 1)
    inst = GdInstance(legal, cert.get("k", legal.t), cert.get("alpha", len(cluster_of)),
                      max(len(cuts), cert.get("beta", 0)))
    sizes = tuple(cert["clusters"][i]["inputs"] for i in range(assignment.p))
    sol = GdSolution(inst, cuts, assignment, sizes, cert.get("witness", "decision"))
    plan = make_plan(sol, args.epsilon, circuit=circuit, layout=layout)
    doc, text, dots = plan_report(plan)
    _write(args, doc)
    sys.stderr.write(text)
    if args.dot_dir:
        outdir = Path(args.dot_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        for idx, dot in dots.items():
            (outdir / f"fragment{idx}.dot").write_text(dot)
    return EXIT_OK


def cmd_verify(args) -> int:
    circuit = circuit_from_json(_read_json(args.circuit))
    cut_ids = [int(x) for x in args.cuts.split(",")] if args.cuts else []
    report = crosscheck(circuit, cut_ids, args.obs, epsilon=args.epsilon)
    _write(args, report.to_json())
    return EXIT_OK if report.diff <= args.tolerance else EXIT_NO


def _config_tokens(path: str, subparser: argparse.ArgumentParser) -> list[str]:
    """Config lines become CLI tokens for options the subcommand defines.

    Injected before the user's own flags, so explicit flags still win.
    Boolean keys emit the bare flag when true.
    """
    known = subparser._option_string_actions  # stable argparse internals
    tokens: list[str] = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        flag = next(
            (f for f in (f"--{key}", f"-{key}") if f in known), None)
        if flag is None:
            continue
        if isinstance(known[flag], argparse._StoreTrueAction):
            if value.lower() == "true":
                tokens.append(flag)
        else:
            tokens.extend([flag, value])
    return tokens


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="dagcut",
        description="Timelike circuit cutting via exact graph duplication.",
        epilog="Cluster packing is an exact exponential search: the general "
               "multi-component case is NP-complete, so large instances may "
               "take long.  All outputs are deterministic for fixed inputs.")
    parser.add_argument("--config", help="key=value file of option defaults")
    sub = parser.add_subparsers(dest="command", required=True)
    created: dict[str, argparse.ArgumentParser] = {}
    _add_parser = sub.add_parser

    def add_parser(name, *a, **kw):
        p = _add_parser(name, *a, **kw)
        created[name] = p
        return p

    sub.add_parser = add_parser

    def add_graph_opts(p, circuit_ok=True):
        p.add_argument("--graph", help="dag JSON file")
        if circuit_ok:
            p.add_argument("--circuit", help="circuit JSON file (built into a dag)")
        p.add_argument("--two-legal", dest="two_legal", action="store_true",
                       help="require in/out degree 2 at every gate")
        p.add_argument("-o", "--output", help="write JSON here instead of stdout")

    p = sub.add_parser("validate", help="check legality, report t")
    add_graph_opts(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("paths", help="extract t edge-disjoint input-output paths")
    add_graph_opts(p)
    p.set_defaults(func=cmd_paths)

    p = sub.add_parser("export-dot", help="GraphViz rendering")
    add_graph_opts(p)
    p.set_defaults(func=cmd_export_dot)

    p = sub.add_parser("solve", help="decide GD(G, k, alpha, beta)")
    add_graph_opts(p)
    p.add_argument("-k", type=int, required=True, help="max inputs/outputs per cluster")
    p.add_argument("--alpha", type=int, required=True, help="max clusters")
    p.add_argument("--beta", type=int, required=True, help="max duplications")
    p.add_argument("--optimize", action="store_true",
                   help="minimize duplications up to --beta")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("knit-opt", help="partition-model solver (minimizes cuts)")
    add_graph_opts(p)
    p.add_argument("-Q", type=int, required=True, help="qubit budget per partition")
    p.add_argument("--pmax", type=int, required=True, help="max partition count")
    p.add_argument("--connected", action="store_true",
                   help="require each partition weakly connected")
    p.add_argument("--pair-io", dest="pair_io", action="store_true",
                   help="require an input/output pair of one qubit per partition")
    p.add_argument("--backend", choices=["builtin", "smtlib"], default="builtin")
    p.add_argument("--beta-cap", dest="beta_cap", type=int, default=None)
    p.add_argument("--emit", help="write the SMT-LIB2 model to this file")
    p.set_defaults(func=cmd_knit_opt)

    p = sub.add_parser("gen", help="generate a 3-partition reduction instance")
    p.add_argument("--family", choices=["g0", "gbeta", "connected"], required=True)
    p.add_argument("--a", required=True, help="comma-separated multiset, 3m values")
    p.add_argument("--B", type=int, required=True, help="triple target sum")
    p.add_argument("--beta", type=int, default=None, help="gadget copies (gbeta)")
    p.add_argument("--two-legal", dest="two_legal", action="store_true",
                   help="expand hubs to 2-in/2-out chains")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("plan", help="wire-cut plan from a solve certificate")
    add_graph_opts(p)
    p.add_argument("--certificate", required=True, help="JSON from `dagcut solve`")
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--dot-dir", dest="dot_dir", help="write fragment DOT files here")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("verify", help="reconstruction check on a circuit")
    p.add_argument("--circuit", required=True)
    p.add_argument("--cuts", default="", help="comma-separated edge ids")
    p.add_argument("--obs", required=True, help="Pauli string, one letter per qubit")
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--tolerance", type=float, default=1e-9)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_verify)

    return parser, created


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subparsers = build_parser()
    if "--config" in argv:
        idx = argv.index("--config")
        try:
            cfg = argv[idx + 1]
            at = next((j for j, tok in enumerate(argv) if tok in subparsers), None)
            if at is not None:
                argv[at + 1:at + 1] = _config_tokens(cfg, subparsers[argv[at]])
        except (OSError, IndexError) as exc:
            sys.stderr.write(dumps({"error": str(exc)}))
            return EXIT_INVALID
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (GraphFormatError, IllegalDagError) as exc:
        sys.stderr.write(dumps({"error": str(exc), "kind": type(exc).__name__}))
        return EXIT_INVALID
    except DagcutError as exc:
        sys.stderr.write(dumps({"error": str(exc), "kind": type(exc).__name__}))
        return EXIT_INVALID
    except Exception as exc:  # pragma: no cover - internal failures
        sys.stderr.write(dumps({"error": str(exc), "kind": type(exc).__name__}))
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
