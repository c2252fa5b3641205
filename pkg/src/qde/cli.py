"""Command-line entry point.

    qde run <spec.json> [--out DIR] [--seed S] [--threads T]
    qde verify [--dims 2,3,4] [--trials K] [--seed S] [--out DIR]
    qde capacity <spec.json> --n {1,2} [--out DIR] [--seed S] [--threads T]

Exit codes: 0 success, 2 validation failure, 3 property-suite violation,
4 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import QdeError, SpecFormatError
from .harness import SCHEMA_VERSION, SystemSpec, parse_spec, run_task, write_record


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qde", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the task declared in a spec file")
    run.add_argument("spec", help="path to a JSON system spec")
    run.add_argument("--out", default=None, help="directory for result files")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--threads", type=int, default=1)

    verify = sub.add_parser("verify", help="run the randomized property suite")
    verify.add_argument("--dims", default="2,3,4", help="comma-separated dimensions")
    verify.add_argument("--trials", type=int, default=200)
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--out", default=None)

    cap = sub.add_parser("capacity", help="finite-block capacity bounds for a spec")
    cap.add_argument("spec", help="path to a JSON system spec")
    cap.add_argument("--n", type=int, choices=(1, 2), default=1)
    cap.add_argument("--out", default=None)
    cap.add_argument("--seed", type=int, default=None)
    cap.add_argument("--threads", type=int, default=1)
    return parser


def _load_spec(path: str) -> SystemSpec:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise SpecFormatError(path, f"cannot read spec file: {exc.strerror}") from exc
    return parse_spec(text)


def _emit(record, out_dir, stem) -> None:
    print(record.human_table())
    if out_dir:
        for path in write_record(record, out_dir, stem):
            print(f"wrote {path}")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            spec = _load_spec(args.spec)
            record = run_task(spec, seed=args.seed, threads=args.threads)
            _emit(record, args.out, os.path.splitext(os.path.basename(args.spec))[0])
            return 3 if record.has_violation else 0

        if args.command == "verify":
            raw = {
                "schema_version": SCHEMA_VERSION,
                "task": "verify",
                "params": {
                    "dims": [int(d) for d in args.dims.split(",")],
                    "trials": args.trials,
                    "seed": args.seed,
                },
            }
            spec = parse_spec(json.dumps(raw))
            record = run_task(spec, seed=args.seed)
            _emit(record, args.out, "verify")
            return 3 if record.has_violation else 0

        if args.command == "capacity":
            spec = _load_spec(args.spec)
            spec.params["n"] = args.n
            record = run_task(spec, seed=args.seed, threads=args.threads)
            _emit(record, args.out, os.path.splitext(os.path.basename(args.spec))[0])
            return 0
    except QdeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
