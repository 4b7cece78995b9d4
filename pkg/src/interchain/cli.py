"""Command-line entry point: ``python -m interchain <command> ...``.

Exit codes: 0 success, 1 a checked property failed, 2 bad input or usage.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse exits with 2 as well; keep the message short
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="interchain", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="run a scenario file and write its trace")
    s.add_argument("--scenario", required=True)
    s.add_argument("--seed", type=_u64)
    s.add_argument("--out")

    v = sub.add_parser("verify", help="run the safety/liveness fault matrix")
    v.add_argument("--k", type=int, required=True, help="number of provider chains (k+1 chains total)")
    v.add_argument("--f", type=_int_list, help="per-chain fault tolerance, k+1 values")
    v.add_argument("--expect", help="JSON file overriding predicted outcomes")
    v.add_argument("--relay-delay", type=int, default=None)

    e = sub.add_parser("enumerate", help="list upper-boundary property points")
    e.add_argument("--k", type=int, required=True, help="number of chains")
    e.add_argument("--da", type=_int_list, help="chains that check data availability (default: all)")

    f = sub.add_parser("forensics", help="detect violations and culprits in a trace")
    f.add_argument("--trace", required=True)

    a = sub.add_parser("analyze", help="zone-graph security report")
    a.add_argument("--graph", required=True)
    a.add_argument("--k", type=_int_list, required=True)
    a.add_argument("--p", type=_float_list)
    a.add_argument("--out", required=True, help="output prefix")
    return p


# -- commands -------------------------------------------------------------------


def cmd_simulate(args) -> int:
    from .sim import ScenarioError, load_scenario, run

    try:
        scenario = load_scenario(args.scenario)
        trace = run(scenario, args.seed)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        trace.write(args.out)
    s = trace.summary
    for name, c in s["clients"].items():
        print(f"client {name}: ledger length {c['length']}, stalled {str(c['stalled']).lower()}")
    print(f"violations: {len(s['violations'])}")
    for chain, culprits in s["forensics"].items():
        print(f"culprits chain {chain}: " + " ".join(f"{c}:{i}" for c, i in culprits))
    if args.out:
        print(f"trace: {args.out} sha256={trace.fingerprint()}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from . import matrix

    if args.k < 1:
        print("error: --k must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    fs = args.f or [1] * (args.k + 1)
    if len(fs) != args.k + 1 or any(f < 0 for f in fs):
        print(f"error: --f needs {args.k + 1} non-negative values", file=sys.stderr)
        return EXIT_USAGE
    expect: dict = {}
    if args.expect:
        try:
            expect = matrix.load_expectations(args.expect)
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
    rows = matrix.safety_matrix(args.k, fs, expect.get("safety")) + matrix.liveness_matrix(
        args.k, fs, expect.get("liveness"), relay_delay=args.relay_delay
    )
    print(matrix.format_table(rows))
    failed = sum(not r.passed for r in rows)
    print(f"{len(rows) - failed}/{len(rows)} cells pass")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_enumerate(args) -> int:
    from .boundary import enumerate_upper_boundary, marker

    try:
        tuples = enumerate_upper_boundary(args.k, args.da)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for t in tuples:
        print(f"{t.to_text()}\t{marker(t)}")
    return EXIT_OK


def cmd_forensics(args) -> int:
    from .forensics import interchain_forensics, ledger_violation
    from .sim import Trace

    try:
        trace = Trace.read(args.trace)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    violation = ledger_violation(trace)
    if violation is None:
        print("no violation")
        return EXIT_OK
    a, b = violation["clients"]
    ra, rb = violation["rounds"]
    print(f"violation: {a}@{ra} vs {b}@{rb} diverge at index {violation['index']}")
    k = trace.setup().get("k", 0)
    for chain, proof in interchain_forensics(trace, range(k + 1)).items():
        if proof is None:
            print(f"chain {chain}: no conflicting blocks")
        else:
            print(f"chain {chain}: culprits " + " ".join(str(v) for v in sorted(proof.culprits)))
    return EXIT_OK


def cmd_analyze(args) -> int:
    from . import mesh

    try:
        g = mesh.load_zone_graph(args.graph)
    except mesh.MeshError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    ps = tuple(args.p) if args.p else mesh.DEFAULT_PS
    if any(k < 0 for k in args.k) or any(not 0 <= p <= 1 for p in ps):
        print("error: k must be >= 0 and p in [0, 1]", file=sys.stderr)
        return EXIT_USAGE
    rep = mesh.report(g, args.k, ps)
    text = mesh.export_csv(rep)
    prefix = Path(args.out)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    Path(f"{prefix}.csv").write_text(text)
    for k in sorted(set(args.k)):
        values = [r.econ_security_usd for r in rep.rows if r.k == k]
        Path(f"{prefix}_hist_k{k}.csv").write_text(mesh.histogram_csv(values))
    sys.stdout.write(text)
    if any(not r.exact for r in rep.rows):
        print("note: graph exceeds the exact-search limit; paths come from beam search", file=sys.stderr)
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "enumerate": cmd_enumerate,
    "forensics": cmd_forensics,
    "analyze": cmd_analyze,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
