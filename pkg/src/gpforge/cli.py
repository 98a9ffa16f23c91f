"""Command line front end: ``gpforge run FILE``.

Exit codes: 0 when every query succeeds, 1 when any query fails (a failed
verification, an out-of-slice derivation, a failed model check, a missing
countermodel, or a reported violation), 2 for usage or parse errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .dsl import RunFlags, Runner, parse_script
from .exprs import ParseError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gpforge",
        description="Exact identity checking for differential nonassociative algebras")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="execute a script of declarations and queries")
    run.add_argument("file", help="script path, or '-' for stdin")
    run.add_argument("--json", metavar="OUT", default=None,
                     help="write a machine-readable report ( '-' for stdout )")
    run.add_argument("--degree", type=int, default=3,
                     help="default slice degree for derive/equivalent queries")
    run.add_argument("--dweight", type=int, default=1,
                     help="default derivation-weight bound")
    run.add_argument("--seed", type=int, default=0,
                     help="seed for randomized searches")
    run.add_argument("--cap", type=int, default=50_000,
                     help="instance generation cap")
    run.add_argument("--noncommutative", action="store_true",
                     help="drop the commutativity flag of the dot in structure checks")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    if args.file == "-":
        source = sys.stdin.read()
        base_dir = Path.cwd()
    else:
        path = Path(args.file)
        try:
            source = path.read_text()
        except OSError as e:
            print(f"gpforge: cannot read {args.file}: {e}", file=sys.stderr)
            return 2
        base_dir = path.parent

    try:
        script = parse_script(source)
    except ParseError as e:
        print(f"gpforge: parse error: {e}", file=sys.stderr)
        return 2

    flags = RunFlags(degree=args.degree, weight=args.dweight, seed=args.seed,
                     cap=args.cap, noncommutative=args.noncommutative,
                     base_dir=base_dir)
    runner = Runner(script, flags)
    code = runner.run()

    for line in runner.lines:
        print(line)
    summary = "all queries passed" if code == 0 else "some queries failed"
    print(f"gpforge: {len(runner.records)} query(ies), {summary}")

    if args.json is not None:
        payload = runner.report_json()
        if args.json == "-":
            sys.stdout.write(payload)
        else:
            Path(args.json).write_text(payload)
    return code


if __name__ == "__main__":
    sys.exit(main())
