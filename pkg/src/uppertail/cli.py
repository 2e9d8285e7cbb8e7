"""Command-line front end: ``uppertail <subcommand> [options]``.

Output is JSON (keys sorted, floats at full precision) or CSV with a
versioned header comment.  Exit codes: 0 success, 1 a ``check`` suite
failed, 2 usage error, 3 domain/precondition error, 4 resource error.
Errors are also written to stderr as a JSON object.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import checks, theory
from .constructions import best_construction, clique_construction, graphon_construction, hub_construction
from .errors import DomainError, ResourceError
from .graphs import WeightedGraph
from .montecarlo import CSV_HEADER, TiltSpec, naive_tail_estimate, sample_gnp, tilted_tail_estimate
from .patterns import parse_pattern
from .regularity import partition_event_bound, reduced_density_error, weak_regular_partition
from .solver import SolverOptions, VariationalInstance, solve_phi, write_trace_csv

CSV_VERSION = "uppertail-csv/1"
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_RESOURCE = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text):
    return [float(x) for x in text.replace(",", " ").split()]


def _ints(text):
    return [int(float(x)) for x in text.replace(",", " ").split()]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dumps(payload):
    return json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n"


def _csv_text(header, rows):
    buf = io.StringIO()
    buf.write(f"# {CSV_VERSION} columns={','.join(header)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# subcommands; each returns (json_payload, csv_header, csv_rows)


def cmd_limit(args):
    regime = args.regime
    if args.n is not None and args.p is not None:
        regime = theory.regime_classify(args.n, args.p, args.k, args.margin).label
    if regime is None:
        raise DomainError("give --regime or both --n and --p")
    rows = []
    for d in args.delta:
        rows.append([args.k, d, regime, theory.limit_rate(args.k, d, regime)])
    payload = {
        "k": args.k,
        "regime": regime,
        "crossover_delta": theory.crossover_delta(args.k),
        "results": [{"delta": r[1], "rate": r[3]} for r in rows],
    }
    if len(rows) == 1:
        payload["delta"] = rows[0][1]
        payload["rate"] = rows[0][3]
    return payload, ["k", "delta", "regime", "rate"], rows


def cmd_construct(args):
    if args.kind in ("graphon-clique", "graphon-hub"):
        rep = graphon_construction(args.kind.split("-")[1], args.p, args.delta)
    else:
        if args.n is None:
            raise DomainError("--n is required for discrete constructions")
        build = {"clique": clique_construction, "hub": hub_construction, "best": best_construction}[args.kind]
        rep = build(args.n, args.p, args.delta, args.k)
    payload = rep.to_dict()
    if not args.include_graph:
        payload.pop("graph", None)
    header = ["kind", "n", "p", "delta", "k", "size_parameter", "objective", "normalized_rate", "constraint_value", "threshold"]
    row = [rep.kind, rep.n, rep.p, rep.delta, rep.k, rep.size_parameter, rep.objective, rep.normalized_rate,
           rep.constraint_value, rep.threshold]
    return payload, header, [row]


def _solver_options(args):
    return SolverOptions(random_starts=args.starts, max_iter=args.max_iter, seed=args.seed)


def cmd_solve(args):
    inst = VariationalInstance(args.n, args.p, args.delta, parse_pattern(args.pattern), args.injective)
    rep = solve_phi(inst, _solver_options(args))
    if args.trace_csv:
        with open(args.trace_csv, "w", newline="") as fh:
            write_trace_csv(rep, fh)
    payload = {
        "instance": inst.to_dict(),
        "options": _solver_options(args).to_dict(),
        "report": rep.to_dict(include_graph=args.include_graph),
    }
    header = ["n", "p", "delta", "objective", "normalized_rate", "cherry_ratio", "constraint_value", "threshold", "converged"]
    row = [inst.n, inst.p, inst.delta, rep.objective, rep.normalized_rate, rep.cherry_ratio, rep.constraint_value,
           rep.threshold, rep.converged]
    return payload, header, [row]


def cmd_sweep(args):
    pattern = parse_pattern(args.pattern)
    rows = []
    for n in sorted(args.n):
        for p in sorted(args.p):
            for d in sorted(args.delta):
                inst = VariationalInstance(n, p, d, pattern)
                rep = solve_phi(inst, _solver_options(args))
                rows.append([n, p, d, rep.objective, rep.normalized_rate, rep.cherry_ratio, rep.converged, rep.best_start])
    header = ["n", "p", "delta", "objective", "normalized_rate", "cherry_ratio", "converged", "best_start"]
    payload = {"pattern": pattern.to_dict(), "rows": [dict(zip(header, r)) for r in rows]}
    return payload, header, rows


def cmd_regularity(args):
    if args.graph:
        with open(args.graph) as fh:
            G = WeightedGraph.from_json(fh.read())
    else:
        if args.p is None:
            raise DomainError("give --graph or --p to sample G(n, p)")
        G = sample_gnp(args.n, args.p, args.seed)
    P = weak_regular_partition(G, args.eps, seed=args.seed)
    err = reduced_density_error(G, P)
    payload = {
        "n": G.n,
        "eps": args.eps,
        "parts": len(P.parts),
        "partition": P.to_dict(),
        "reduced_density_error": err,
        "counting_bound": 3 * args.eps,
    }
    if args.p is not None:
        rounded = P.rounded_densities(args.eps)
        payload["event_bound"] = partition_event_bound(P, rounded, args.p).to_dict()
    if args.delta is not None and args.eta is not None and args.p is not None:
        lower = theory.entropy_lower_bound(G.n, args.p, args.delta - args.eta)
        payload["certificate"] = theory.tail_certificate(G.n, args.p, args.delta, args.eta, lower).to_dict()
    header = ["n", "eps", "parts", "reduced_density_error"]
    return payload, header, [[G.n, args.eps, len(P.parts), err]]


def _tilt(args):
    spec = args.tilt
    if spec == "none":
        return TiltSpec.no_op(args.n, args.p)
    if spec.startswith("uniform:"):
        return TiltSpec.uniform(args.n, float(spec.split(":", 1)[1]))
    if spec == "clique":
        return TiltSpec.planted_clique(args.n, args.p, int(clique_construction(args.n, args.p, args.delta).size_parameter))
    if spec == "hub":
        return TiltSpec.planted_hub(args.n, args.p, int(hub_construction(args.n, args.p, args.delta).size_parameter))
    if spec == "solver":
        inst = VariationalInstance(args.n, args.p, args.delta, parse_pattern(args.pattern))
        return TiltSpec.from_graph(solve_phi(inst, SolverOptions(seed=args.seed)).minimizer)
    raise DomainError(f"unknown tilt {spec!r}")


def cmd_sample(args):
    pattern = parse_pattern(args.pattern)
    if args.method == "naive":
        est = naive_tail_estimate(args.n, args.p, args.delta, pattern, args.trials, args.seed)
    else:
        est = tilted_tail_estimate(args.n, args.p, args.delta, pattern, _tilt(args), args.trials, args.seed)
    payload = {"n": args.n, "p": args.p, "delta": args.delta, "method": args.method, "seed": args.seed,
               "pattern": pattern.to_dict(), "estimate": est.to_dict()}
    return payload, CSV_HEADER, [est.csv_row(args.n, args.p, args.delta, args.seed)]


def cmd_check(args):
    results = checks.run_all(seed=args.seed)
    payload = {"suites": [r.to_dict() for r in results], "all_passed": all(r.ok for r in results)}
    rows = [[r.name, r.passed, r.total, r.worst] for r in results]
    return payload, ["suite", "passed", "total", "worst"], rows


# ---------------------------------------------------------------------------


def build_parser():
    parser = _Parser(prog="uppertail", description="Upper-tail rates for subgraph counts in G(n, p).")
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "csv"), default=None, help="json (csv for sweep)")
    common.add_argument("--output", default=None, help="write here instead of stdout")
    common.add_argument("--config", default=None, help="key=value file; command-line flags take precedence")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("limit", parents=[common], help="closed-form limiting rate")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--delta", type=_floats, required=True)
    p.add_argument("--regime", choices=("dense", "sparse", "dense_side", "sparse_side"), default=None)
    p.add_argument("--n", type=float, default=None)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--margin", type=float, default=theory.DEFAULT_MARGIN)
    p.set_defaults(func=cmd_limit)

    p = sub.add_parser("construct", parents=[common], help="clique/hub constructions")
    p.add_argument("--kind", choices=("clique", "hub", "best", "graphon-clique", "graphon-hub"), default="best")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--include-graph", action="store_true")
    p.set_defaults(func=cmd_construct)

    def solver_flags(q):
        q.add_argument("--pattern", default="triangle")
        q.add_argument("--starts", type=int, default=8, help="seeded random starts")
        q.add_argument("--max-iter", type=int, default=3000)

    p = sub.add_parser("solve", parents=[common], help="numerical upper bound on phi")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--injective", action="store_true")
    p.add_argument("--include-graph", action="store_true")
    p.add_argument("--trace-csv", default=None)
    solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", parents=[common], help="solve a grid of instances")
    p.add_argument("--n", type=_ints, required=True)
    p.add_argument("--p", type=_floats, required=True)
    p.add_argument("--delta", type=_floats, required=True)
    solver_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("regularity", parents=[common], help="weak regular partition of a graph")
    p.add_argument("--graph", default=None, help="WeightedGraph JSON file; otherwise sample G(n, p)")
    p.add_argument("--n", type=int, default=40)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--eps", type=float, default=0.4)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--eta", type=float, default=None)
    p.set_defaults(func=cmd_regularity)

    p = sub.add_parser("sample", parents=[common], help="Monte Carlo tail estimate")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--pattern", default="triangle")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--method", choices=("naive", "tilted"), default="naive")
    p.add_argument("--tilt", default="solver", help="none | uniform:Q | clique | hub | solver")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("check", parents=[common], help="run the inequality and identity suites")
    p.set_defaults(func=cmd_check)
    return parser


def _config_tokens(parser, argv):
    """Turn a ``key=value`` config file into flags placed before the command-line ones."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if not known.config or not argv:
        return argv
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    command = argv[0]
    if command not in subparsers.choices:
        return argv
    actions = {a.dest: a for a in subparsers.choices[command]._actions}
    tokens = []
    with open(known.config) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{known.config}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            dest = key.replace("-", "_")
            if dest not in actions or dest in ("config", "help"):
                raise UsageError(f"{known.config}:{lineno}: unknown option {key!r} for {command}")
            flag = "--" + dest.replace("_", "-")
            if actions[dest].nargs == 0:
                if value.lower() in ("1", "true", "yes", "on"):
                    tokens.append(flag)
            else:
                tokens += [flag, value]
    return [command] + tokens + argv[1:]


def run(argv=None, stdout=None, stderr=None):
    """Run one command; returns the exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_config_tokens(parser, argv))
        payload, header, rows = args.func(args)
    except UsageError as exc:
        stderr.write(dumps({"error": {"type": "UsageError", "message": str(exc)}}))
        return EXIT_USAGE
    except OSError as exc:
        stderr.write(dumps({"error": {"type": "UsageError", "message": str(exc)}}))
        return EXIT_USAGE
    except ResourceError as exc:
        stderr.write(dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}))
        return EXIT_RESOURCE
    except DomainError as exc:
        stderr.write(dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}))
        return EXIT_DOMAIN
    fmt = args.format or ("csv" if args.command == "sweep" else "json")
    text = dumps(payload) if fmt == "json" else _csv_text(header, rows)
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    if args.command == "check" and not payload["all_passed"]:
        return EXIT_CHECK_FAILED
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
