"""Command-line surface: learn a graph, sample data or constraints from a
network, evaluate a learnt graph against a truth, and run experiment grids.

Any package error exits nonzero after printing a machine-readable JSON
object ``{"error": <class>, "message": <text>}``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import BnkitError
from .evaluation import evaluate
from .experiment import ExperimentManifest, ExperimentRunner
from .graph import Dag
from .io import (
    load_dataset_csv,
    load_edge_csv,
    load_network_json,
    save_dataset_csv,
    save_edge_csv,
    save_tiers_csv,
)
from .knowledge import (
    BdnAnnotation,
    KnowledgeSpec,
    parse_edge_constraints,
    parse_tiers,
)
from .model import forward_sample
from .sampling import (
    build_spec,
    sample_edge_constraints,
    sample_forbidden_constraints,
    sample_initial_graph,
    sample_tiers,
)
from .saiyanh import saiyanh
from .scoring import TargetWeights
from .search import SearchConfig, hill_climb, mahc, tabu

LEARNERS = {"hc": hill_climb, "tabu": tabu, "saiyanh": saiyanh, "mahc": mahc}


def _parse_targets(text: str) -> TargetWeights:
    weights = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        name, _, value = part.partition("=")
        if not value:
            raise ValueError(f"expected name=r, got {part!r}")
        weights[name.strip()] = float(value)
    return TargetWeights(weights)


def _read_csv_text(path) -> str:
    return Path(path).read_text(encoding="utf-8")


def _build_spec_from_args(args, variables) -> KnowledgeSpec:
    directed = parse_edge_constraints(_read_csv_text(args.directed)) if args.directed else ()
    undirected = (parse_edge_constraints(_read_csv_text(args.undirected), kind="undirected")
                  if args.undirected else ())
    forbidden = (parse_edge_constraints(_read_csv_text(args.forbidden), kind="undirected")
                 if args.forbidden else ())
    tiers = parse_tiers(_read_csv_text(args.tiers)) if args.tiers else None
    initial = Dag(variables, load_edge_csv(args.initial)) if args.initial else None
    weights = _parse_targets(args.targets) if args.targets else TargetWeights()
    bdn = None
    if args.decisions or args.utilities:
        bdn = BdnAnnotation(
            frozenset(x for x in (args.decisions or "").split(",") if x),
            frozenset(x for x in (args.utilities or "").split(",") if x),
        )
    return KnowledgeSpec(
        variables,
        directed_edges=directed,
        undirected_edges=undirected,
        forbidden_edges=forbidden,
        tiers=tiers,
        tiers_strict=args.tiers_strict,
        initial_graph=initial,
        variables_relevant=args.var_rel,
        target_weights=weights,
        bdn=bdn,
        bdn_strict=args.bdn_strict,
    )


def _constraints_applied(spec: KnowledgeSpec) -> list[str]:
    out = []
    if spec.directed_edges:
        out.append("dir-edg")
    if spec.undirected_edges:
        out.append("und-edg")
    if spec.forbidden_edges:
        out.append("for-edg")
    if spec.tiers is not None:
        out.append("str-tem" if spec.tiers_strict else "rel-tem")
    if spec.initial_graph is not None:
        out.append("ini-gra")
    if spec.variables_relevant:
        out.append("var-rel")
    if spec.target_weights.targets:
        out.append("tar-var")
    if spec.bdn is not None:
        out.append("str-bdn" if spec.bdn_strict else "rel-bdn")
    return out


def cmd_learn(args) -> int:
    states = None
    if args.net:
        states = load_network_json(args.net).states
    dataset = load_dataset_csv(args.data, states)
    spec = _build_spec_from_args(args, dataset.variables)
    config = SearchConfig(
        max_indegree=args.max_indegree,
        mahc_prune_indegree=args.prune_indegree,
        tabu_iteration_cap=args.tabu_cap,
        seed=args.seed,
        parallel_neighbors=args.parallel,
        timeout_secs=args.timeout_secs,
    )
    result = LEARNERS[args.algo](dataset, spec, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_edge_csv(result.dag.sorted_edges(), out / "graph.csv")
    report = {
        "algorithm": result.algorithm,
        "score": result.score,
        "free_parameters": result.free_parameters,
        "arcs": result.arcs_learnt,
        "iterations": result.iterations,
        "runtime_seconds": result.runtime_seconds,
        "constraints_applied": _constraints_applied(spec),
        "warnings": list(result.warnings),
    }
    if result.phase_durations is not None:
        report["phase_durations"] = result.phase_durations
    if result.bdn is not None:
        report["node_kinds"] = result.bdn.node_kinds
        report["informational_arcs"] = [
            [p, c] for (p, c), kind in result.bdn.arc_kinds.items()
            if kind == "informational"
        ]
    (out / "report.json").write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    print(json.dumps(report))
    return 0


def cmd_sample_data(args) -> int:
    bn = load_network_json(args.net)
    dataset = forward_sample(bn, args.n, args.seed)
    save_dataset_csv(dataset, args.out)
    print(json.dumps({"rows": dataset.n, "variables": len(dataset.variables),
                      "out": str(args.out)}))
    return 0


def cmd_sample_constraints(args) -> int:
    bn = load_network_json(args.net)
    truth = bn.dag
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    approach, rate, seed = args.approach, args.rate, args.seed
    build_spec(truth, approach, rate, seed)  # validates the (approach, rate) pair
    written = []
    if approach == "dir-edg":
        path = out / "directed.csv"
        save_edge_csv(sample_edge_constraints(truth, rate, seed), path)
        written.append(path)
    elif approach == "und-edg":
        path = out / "undirected.csv"
        save_edge_csv(sample_edge_constraints(truth, rate, seed), path,
                      header=("ID", "Var1", "Var2"))
        written.append(path)
    elif approach == "for-edg":
        path = out / "forbidden.csv"
        save_edge_csv(sample_forbidden_constraints(truth, rate, seed), path,
                      header=("ID", "Var1", "Var2"))
        written.append(path)
    elif approach in ("rel-tem", "str-tem"):
        path = out / "tiers.csv"
        save_tiers_csv(sample_tiers(truth, rate, seed), path)
        written.append(path)
    elif approach == "ini-gra":
        path = out / "initial.csv"
        save_edge_csv(sample_initial_graph(truth, rate, seed).sorted_edges(), path)
        written.append(path)
    print(json.dumps({"approach": approach, "rate": rate,
                      "files": [str(p) for p in written]}))
    return 0


def cmd_evaluate(args) -> int:
    if args.net:
        variables = load_network_json(args.net).variables
    elif args.variables:
        variables = tuple(
            line.strip() for line in Path(args.variables).read_text(encoding="utf-8").splitlines()
            if line.strip())
    else:
        raise BnkitError("evaluate needs --variables or --net")
    learned = Dag(variables, load_edge_csv(args.learned))
    truth = Dag(variables, load_edge_csv(args.truth))
    report = evaluate(learned, truth, args.mode)
    print(json.dumps(report.as_dict()))
    return 0


def cmd_experiment(args) -> int:
    manifest = ExperimentManifest.from_json(args.manifest)
    runner = ExperimentRunner(manifest, args.out)
    log = (lambda msg: print(msg, file=sys.stderr)) if args.verbose else (lambda msg: None)
    runs_path = runner.run(log)
    print(json.dumps({"runs": str(runs_path), "aggregates": str(runner.aggregate_path)}))
    return 0


def _add_learn_flags(p: argparse.ArgumentParser):
    p.add_argument("--algo", choices=sorted(LEARNERS), required=True)
    p.add_argument("--data", required=True, help="dataset CSV")
    p.add_argument("--net", help="network JSON fixing variable state order")
    p.add_argument("--directed", help="required directed edges CSV")
    p.add_argument("--undirected", help="required adjacencies CSV")
    p.add_argument("--forbidden", help="forbidden adjacencies CSV")
    p.add_argument("--tiers", help="temporal tiers CSV")
    p.add_argument("--tiers-strict", action="store_true",
                   help="also forbid arcs inside a tier")
    p.add_argument("--initial", help="starting-graph edge CSV")
    p.add_argument("--var-rel", action="store_true",
                   help="force a single connected component")
    p.add_argument("--targets", help="comma list name=r of target weights")
    p.add_argument("--decisions", help="comma list of decision variables")
    p.add_argument("--utilities", help="comma list of utility variables")
    p.add_argument("--bdn-strict", action="store_true",
                   help="require decision children and utility parents")
    p.add_argument("--max-indegree", type=int, default=None)
    p.add_argument("--prune-indegree", type=int, default=3)
    p.add_argument("--tabu-cap", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timeout-secs", type=float, default=None)
    p.add_argument("--parallel", action="store_true",
                   help="score neighbours in a thread pool")
    p.add_argument("--out", default="out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bnkit",
        description="Structure learning for discrete Bayesian networks "
                    "with knowledge constraints.")
    sub = parser.add_subparsers(dest="command", required=True)

    learn = sub.add_parser("learn", help="learn a graph from data")
    _add_learn_flags(learn)
    learn.set_defaults(func=cmd_learn)

    sample = sub.add_parser("sample", help="sample data or constraints")
    sample_sub = sample.add_subparsers(dest="what", required=True)
    sd = sample_sub.add_parser("data", help="forward-sample a dataset")
    sd.add_argument("--net", required=True)
    sd.add_argument("--n", type=int, required=True)
    sd.add_argument("--seed", type=int, default=0)
    sd.add_argument("--out", required=True)
    sd.set_defaults(func=cmd_sample_data)
    sc = sample_sub.add_parser("constraints", help="sample constraints from a network")
    sc.add_argument("--net", required=True)
    sc.add_argument("--approach", required=True,
                    choices=["dir-edg", "und-edg", "for-edg", "rel-tem",
                             "str-tem", "ini-gra"])
    sc.add_argument("--rate", type=float, required=True)
    sc.add_argument("--seed", type=int, default=0)
    sc.add_argument("--out", required=True)
    sc.set_defaults(func=cmd_sample_constraints)

    ev = sub.add_parser("evaluate", help="score a learnt graph against a truth")
    ev.add_argument("--learned", required=True)
    ev.add_argument("--truth", required=True)
    ev.add_argument("--variables", help="text file, one variable name per line")
    ev.add_argument("--net", help="network JSON naming the variables")
    ev.add_argument("--mode", choices=["dag", "cpdag"], default="dag")
    ev.set_defaults(func=cmd_evaluate)

    ex = sub.add_parser("experiment", help="run a manifest grid")
    ex.add_argument("--manifest", required=True)
    ex.add_argument("--out", required=True)
    ex.add_argument("--verbose", action="store_true")
    ex.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (BnkitError, OSError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return 1


if __name__ == "__main__":
    sys.exit(main())
