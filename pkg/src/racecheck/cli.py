"""Command-line front end.

    racecheck single   --trace FILE V W [--race] [--json]
    racecheck allpairs --trace FILE [--out FILE] [--parallel] [--json]
    racecheck schedule --trace FILE [--json]
    racecheck reduce   --dag FILE --ell N --stage g1|g2 [--out FILE]
    racecheck oracle {valid,precede,optheight,dagheight} ...

Node selectors are ``chain:pos``, 1-based.  Exit codes: 0 success, 2 bad
input, 3 unschedulable trace (allpairs), 4 oracle bound exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys

from .all_pairs import UnschedulableError, build_first_table
from .humps import opt_height, optimal_schedule
from .oracle import (
    OracleBoundExceeded,
    oracle_dag_height,
    oracle_multi_can_precede,
    oracle_multi_valid,
)
from .reduction import construct_g1, encode_units_g2, parse_dag
from .single_pair import can_precede, minheight
from .trace import (
    TraceError,
    parse_multi_trace,
    parse_node_ref,
    parse_trace,
    serialize_multi_trace,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_UNSCHEDULABLE = 3
EXIT_ORACLE_BOUND = 4


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as f:
        return f.read()


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as f:
            f.write(text)


def cmd_single(args: argparse.Namespace) -> int:
    g = parse_trace(_read(args.trace))
    v = parse_node_ref(args.v)
    w = parse_node_ref(args.w)
    g._check(v)
    g._check(w)
    if v.chain == w.chain:
        fwd = can_precede(g, v, w)
        h = None
    else:
        h = minheight(g, v, w)
        fwd = h == 0
    result = {"v": str(v), "w": str(w), "h_star": h, "can_precede": fwd}
    if args.race:
        if v.chain == w.chain:
            raise TraceError("race queries need nodes on different chains")
        rev = minheight(g, w, v) == 0
        result["reverse"] = rev
        result["race"] = fwd and rev
    if args.json:
        print(json.dumps(result))
        return EXIT_OK
    if h is not None:
        print(f"h*={h}")
    print(f"{v}->{w}: {'yes' if fwd else 'no'}")
    if args.race:
        print(f"{w}->{v}: {'yes' if result['reverse'] else 'no'}")
        print(f"race: {'yes' if result['race'] else 'no'}")
    return EXIT_OK


def cmd_allpairs(args: argparse.Namespace) -> int:
    g = parse_trace(_read(args.trace))
    try:
        table = build_first_table(g, parallel=args.parallel)
    except UnschedulableError as e:
        print(f"opt_height={e.opt_height}", file=sys.stderr)
        return EXIT_UNSCHEDULABLE
    if args.json:
        rows = [
            {"v_chain": i, "v_pos": k, "j": j, "first_pos": cell}
            for i, k, j, cell in table.rows()
        ]
        _emit(json.dumps({"rows": rows}) + "\n", args.out)
    else:
        _emit(table.to_tsv(), args.out)
    return EXIT_OK


def cmd_schedule(args: argparse.Namespace) -> int:
    g = parse_trace(_read(args.trace))
    schedule, height = optimal_schedule(g)
    # replay to re-verify the reported height
    run = 0
    peak = 0
    for ref in schedule:
        run += g.node(ref).cost
        peak = max(peak, run)
    assert max(0, peak) == height, "schedule replay disagrees with merge stats"
    if args.json:
        print(
            json.dumps(
                {
                    "height": height,
                    "schedule": [f"{r.chain}:{r.pos}" for r in schedule],
                }
            )
        )
        return EXIT_OK
    print(f"height={height}")
    for ref in schedule:
        print(f"{ref} {g.node(ref).value}")
    return EXIT_OK


def cmd_reduce(args: argparse.Namespace) -> int:
    dag = parse_dag(_read(args.dag))
    g1 = construct_g1(dag, args.ell)
    mg = g1 if args.stage == "g1" else encode_units_g2(g1)
    _emit(serialize_multi_trace(mg), args.out)
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    if args.oracle_cmd == "dagheight":
        dag = parse_dag(_read(args.dag))
        h = oracle_dag_height(dag.costs, dag.arcs)
        print(json.dumps({"height": h}) if args.json else f"height={h}")
        return EXIT_OK
    mg = parse_multi_trace(_read(args.trace))
    if args.oracle_cmd == "valid":
        ok = oracle_multi_valid(mg, args.convention, args.max_states)
        print(json.dumps({"valid": ok}) if args.json else ("yes" if ok else "no"))
    elif args.oracle_cmd == "precede":
        v = parse_node_ref(args.v)
        w = parse_node_ref(args.w)
        ok = oracle_multi_can_precede(mg, v, w, args.convention, args.max_states)
        print(json.dumps({"can_precede": ok}) if args.json else ("yes" if ok else "no"))
    else:  # optheight: single-semaphore optimum
        g = parse_trace(_read(args.trace))
        h = opt_height(g)
        print(json.dumps({"opt_height": h}) if args.json else f"opt_height={h}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="racecheck", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("single", help="single-pair precedence / race query")
    s.add_argument("--trace", required=True)
    s.add_argument("v", help="node selector chain:pos")
    s.add_argument("w", help="node selector chain:pos")
    s.add_argument("--race", action="store_true", help="also query the reverse direction")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_single)

    s = sub.add_parser("allpairs", help="build the first-reachable table (TSV)")
    s.add_argument("--trace", required=True)
    s.add_argument("--out", default=None, help="output path (default stdout)")
    s.add_argument("--parallel", action="store_true")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_allpairs)

    s = sub.add_parser("schedule", help="print a minimum-height schedule")
    s.add_argument("--trace", required=True)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_schedule)

    s = sub.add_parser("reduce", help="generate a hardness gadget from a DAG")
    s.add_argument("--dag", required=True)
    s.add_argument("--ell", type=int, required=True)
    s.add_argument("--stage", choices=("g1", "g2"), default="g1")
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_reduce)

    s = sub.add_parser("oracle", help="brute-force verdicts on small instances")
    osub = s.add_subparsers(dest="oracle_cmd", required=True)
    for name in ("valid", "precede", "optheight"):
        o = osub.add_parser(name)
        o.add_argument("--trace", required=True)
        if name == "precede":
            o.add_argument("v")
            o.add_argument("w")
        if name in ("valid", "precede"):
            o.add_argument("--convention", choices=("nonneg", "nonpos"), default="nonneg")
            o.add_argument("--max-states", type=int, default=2_000_000, dest="max_states")
        o.add_argument("--json", action="store_true")
        o.set_defaults(func=cmd_oracle)
    o = osub.add_parser("dagheight")
    o.add_argument("--dag", required=True)
    o.add_argument("--json", action="store_true")
    o.set_defaults(func=cmd_oracle)

    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except OracleBoundExceeded as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ORACLE_BOUND
    except (TraceError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
