"""Command-line front end: ``expander <command> ...``.

Graphs are edge-list files (``u v`` per line, 0-based ids, ``#`` comments,
``u u`` for a self-loop); ``-`` reads standard input. Results are JSON with
sorted keys, so equal inputs and seeds give byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from typing import Sequence

from . import oracle
from .cutmatching import CutMatchConfig, cut_match
from .decomposition import DecompositionConfig, charge_audit, decompose
from .errors import ExpanderError, ParameterError, TrimFailure
from .generators import FAMILIES
from .graph import Graph, format_edge_list, parse_phi, read_edge_list
from .pruning import ExpanderPruner
from .trimming import trim


def _read_lines(path: str) -> list[str]:
    if path == "-":
        return sys.stdin.read().splitlines()
    with open(path, encoding="utf-8") as fh:
        return fh.read().splitlines()


def load_graph(path: str) -> Graph:
    return read_edge_list(_read_lines(path))


def load_nodes(path: str, graph: Graph) -> list[int]:
    nodes = []
    for line in _read_lines(path):
        for token in line.split("#", 1)[0].split():
            try:
                v = int(token)
            except ValueError as exc:
                raise ParameterError(f"bad node id {token!r}") from exc
            if not 0 <= v < graph.n:
                raise ParameterError(f"node {v} is not in the graph")
            nodes.append(v)
    return sorted(set(nodes))


def _frac(x: Fraction | None) -> str | None:
    return None if x is None else f"{x.numerator}/{x.denominator}"


class Report:
    """Writes records as JSON lines or as TSV with one header row.

    Records are flushed one by one, so a stream that fails halfway still
    leaves the records written so far.
    """

    def __init__(self, path: str | None, fmt: str):
        self.fmt = fmt
        self.fh = sys.stdout if path in (None, "-") else open(path, "w", encoding="utf-8")
        self.header: list[str] | None = None

    def write(self, record: dict) -> None:
        if self.fmt == "json":
            self.fh.write(json.dumps(record, sort_keys=True) + "\n")
        else:
            if self.header is None:
                self.header = sorted(record)
                self.fh.write("\t".join(self.header) + "\n")
            self.fh.write("\t".join(_cell(record.get(k)) for k in self.header) + "\n")
        self.fh.flush()

    def close(self) -> None:
        if self.fh is not sys.stdout:
            self.fh.close()


def _cell(value) -> str:
    if isinstance(value, str):
        return value
    return json.dumps(value, sort_keys=True)


def _cut_match_config(args: argparse.Namespace, **extra) -> CutMatchConfig:
    return CutMatchConfig(round_factor=args.c_t, c0=args.c0, debug=args.debug, **extra)


def cmd_decompose(args: argparse.Namespace, out: Report) -> int:
    graph = load_graph(args.graph)
    config = DecompositionConfig(
        workers=args.workers,
        c_charge=args.c_charge,
        c_b=args.c_b,
        cut_match=_cut_match_config(args),
    )
    result = decompose(graph, args.phi, seed=args.seed, config=config)
    payload = result.to_json(detail=True)
    payload["phi"] = _frac(args.phi)
    payload["seed"] = args.seed
    if args.audit:
        payload["audit"] = charge_audit(result, graph, args.phi, args.c_charge)
    out.write(payload)
    return 0


def cmd_trim(args: argparse.Namespace, out: Report) -> int:
    graph = load_graph(args.graph)
    nodes = load_nodes(args.nodes, graph)
    try:
        result = trim(graph, nodes, args.phi, debug=args.debug)
    except TrimFailure as exc:
        out.write({"status": "failed", "reason": exc.reason, "removed": exc.removed, "phi": _frac(args.phi)})
        return 1
    out.write(
        {
            "status": "ok",
            "phi": _frac(args.phi),
            "kept": result.kept,
            "removed": result.removed,
            "rounds": len(result.rounds),
            "height": result.height,
            "boundary_before": result.boundary_before,
            "boundary_after": result.boundary_after,
            "volume_before": result.volume_before,
            "volume_after": result.volume_after,
            "mass_initial": result.initial_mass,
            "mass_created": result.created,
            "mass_destroyed": result.destroyed,
            "work": result.work,
        }
    )
    return 0


def cmd_cutmatch(args: argparse.Namespace, out: Report) -> int:
    graph = load_graph(args.graph)
    config = _cut_match_config(args, track_potential=args.track_potential)
    result = cut_match(graph, args.phi, args.seed, config)
    payload = {
        "phi": _frac(args.phi),
        "seed": args.seed,
        "case": result.case,
        "kept": result.kept,
        "removed": result.removed,
        "cuts": result.cuts,
        "rounds": result.rounds,
        "round_budget": result.round_budget,
        "threshold": _frac(result.threshold),
        "removed_volume": result.removed_volume,
        "removed_conductance": _frac(result.removed_conductance),
        "near_bound": round(result.near_bound, 6),
        "capacity": result.capacity,
        "height": result.height,
        "matched": result.matched,
        "work": result.work,
        "exact": result.exact,
    }
    if args.track_potential:
        payload["potential_before"] = [round(x, 12) for x in result.potential_before]
        payload["potential_after"] = [round(x, 12) for x in result.potential_after]
    out.write(payload)
    return 0


def cmd_prune(args: argparse.Namespace, out: Report) -> int:
    graph = load_graph(args.graph)
    pruner = ExpanderPruner(graph, args.phi, debug=args.debug)
    for lineno, line in enumerate(_read_lines(args.deletions), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            u, v = (int(x) for x in parts)
        except ValueError as exc:
            raise ParameterError(f"line {lineno}: expected 'u v', got {line!r}") from exc
        newly = pruner.delete_edge(u, v)
        step = pruner.steps[-1]
        out.write(
            {
                "i": step.index,
                "edge": [u, v],
                "newly_pruned": newly,
                "vol_P": step.pruned_volume,
                "boundary_P": step.pruned_boundary,
                "mass_created": step.created,
                "work": pruner.work,
            }
        )
    return 0


def cmd_verify(args: argparse.Namespace, out: Report) -> int:
    graph = load_graph(args.graph)
    if args.check == "phi":
        value, side = oracle.exact_min_conductance(graph)
        record = {"conductance": _frac(value), "witness": side}
        if args.phi is not None:
            record["phi"] = _frac(args.phi)
            record["expander"] = value >= args.phi
        out.write(record)
        return 0
    if args.phi is None or args.nodes is None:
        raise ParameterError(f"verify {args.check} needs --nodes and --phi")
    nodes = load_nodes(args.nodes, graph)
    if args.check == "nearly":
        witness = oracle.nearly_expander_witness(graph, nodes, args.phi)
        out.write({"phi": _frac(args.phi), "nearly_expander": witness is None, "witness": witness})
        return 0
    p, q = args.phi.numerator, args.phi.denominator
    sub = graph.induce_with_loops(nodes)
    boundary = graph.boundary_counts(nodes)
    source = [2 * q * boundary.get(v, 0) for v in nodes]
    report = oracle.exact_flow_feasible(sub, source, [p * d for d in sub.deg], 2 * q)
    out.write(
        {
            "phi": _frac(args.phi),
            "feasible": report.feasible,
            "routed": report.routed,
            "demand": report.demand,
            "blocked": [nodes[i] for i in report.blocked],
        }
    )
    return 0


def cmd_generate(args: argparse.Namespace, out: Report) -> int:
    build, params = FAMILIES[args.family]
    if len(args.params) != len(params):
        raise ParameterError(f"{args.family} takes {len(params)} parameter(s): {', '.join(params)}")
    try:
        values = [int(x) for x in args.params]
    except ValueError as exc:
        raise ParameterError("generator parameters must be integers") from exc
    graph = build(*values, seed=args.seed) if args.family == "gnm" else build(*values)
    out.fh.write(format_edge_list(graph))
    return 0


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", default="-", help="report path, '-' for stdout")
    common.add_argument("--format", choices=["json", "tsv"], default="json", help="report format")
    common.add_argument("--debug", action="store_true", help="check internal invariants while running")

    parser = argparse.ArgumentParser(prog="expander", description=__doc__.splitlines()[0], formatter_class=fmt)
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug logs")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, help=help, parents=[common], formatter_class=fmt)

    def add_phi(p: argparse.ArgumentParser, required: bool = True) -> None:
        p.add_argument("--phi", type=parse_phi, required=required, help="p/q or decimal in (0, 1)")

    def add_cut_match(p: argparse.ArgumentParser) -> None:
        p.add_argument("--seed", type=int, default=0, help="random seed")
        p.add_argument(
            "--c-t", "--round-factor", dest="c_t", type=float, default=16.0,
            help="rounds per cut-matching call: ceil(c_t * log2(m)^2)",
        )
        p.add_argument("--c0", type=float, default=1.0, help="case-3 volume allowance m / (10 c0 log2(m)^2), reported")

    p = add("decompose", "expander decomposition")
    p.add_argument("graph")
    add_phi(p)
    add_cut_match(p)
    p.add_argument("--workers", type=int, default=1, help="threads for sibling components")
    p.add_argument("--c-charge", type=float, default=32.0, help="inter-cluster allowance c * phi * m * log2(m)^3")
    p.add_argument("--c-b", type=float, default=1.0, help="volume-drop diagnostic factor 1 - 1/(c_b log2(m)^2)")
    p.add_argument("--audit", action="store_true", help="include the inter-cluster edge audit")
    p.set_defaults(func=cmd_decompose)

    p = add("trim", "trim a nearly expander")
    p.add_argument("graph")
    p.add_argument("nodes", help="file with the node ids of A")
    add_phi(p)
    p.set_defaults(func=cmd_trim)

    p = add("cutmatch", "one cut-matching step")
    p.add_argument("graph")
    add_phi(p)
    add_cut_match(p)
    p.add_argument("--track-potential", action="store_true", help="record the potential per round (dense, small m only)")
    p.set_defaults(func=cmd_cutmatch)

    p = add("prune", "expander pruning over a deletion stream")
    p.add_argument("graph")
    p.add_argument("deletions", help="file with one 'u v' deletion per line")
    add_phi(p)
    p.set_defaults(func=cmd_prune)

    p = add("verify", "exact checks on small graphs")
    p.add_argument("check", choices=["phi", "nearly", "feasible"])
    p.add_argument("graph")
    p.add_argument("--nodes", help="file with the node ids of A")
    add_phi(p, required=False)
    p.set_defaults(func=cmd_verify)

    p = add("generate", "write a standard graph as an edge list")
    p.add_argument("family", choices=sorted(FAMILIES))
    p.add_argument("params", nargs="*")
    p.add_argument("--seed", type=int, default=0, help="random seed for gnm")
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        out = Report(args.output, args.format)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args, out)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ExpanderError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    finally:
        out.close()


if __name__ == "__main__":
    sys.exit(main())
