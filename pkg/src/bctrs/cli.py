"""Command-line entry point: ``run``, ``curves`` and ``verify``.

Exit status: 0 on success, 1 for usage, config or I/O errors, 2 when a
verification criterion fails.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from .scenario import (
    ConfigError,
    CurveKind,
    ExportError,
    export,
    export_curve,
    load_config,
    reference_curves,
    run,
)
from .verification import CHECKS, FAULTS, run_check

EXIT_OK, EXIT_ERROR, EXIT_VERIFY = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bctrs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="run a scenario and export its metrics and ledger trace")
    p.add_argument("--config", required=True, help="scenario YAML file")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config field by dotted path; repeatable")

    p = sub.add_parser("curves", help="write analytic reference curves")
    p.add_argument("--kind", required=True, help="one of: " + ", ".join(k.value for k in CurveKind))
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="curve parameter, e.g. gammas=0.6,0.7 or t_max=80; repeatable")

    p = sub.add_parser("verify", help="run the acceptance suite")
    p.add_argument("--out", default="out", help="directory for the verification report")
    p.add_argument("--inject-fault", action="append", default=[], help=argparse.SUPPRESS)
    return parser


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_ERROR


def cmd_run(config: str, out: str, overrides: Sequence[str]) -> int:
    try:
        cfg = load_config(config, overrides)
    except ConfigError as exc:
        return _fail(str(exc))
    result = run(cfg)
    try:
        export(result, out)
    except ExportError as exc:
        return _fail(str(exc))
    totals = result.metrics.totals()
    violations = sum(v for k, v in totals.items() if k.startswith("violation:"))
    denied = sum(v for k, v in totals.items() if k.startswith("denied:"))
    print(
        f"{cfg.rounds} rounds, {len(cfg.nodes)} nodes: {totals['tokens_issued']} tokens issued, "
        f"{denied} denied, {violations} violations -> {out}"
    )
    return EXIT_OK


def _params(pairs: Sequence[str]) -> dict[str, str]:
    params = {}
    for item in pairs:
        if "=" not in item:
            raise ValueError(f"{item}: parameter must look like key=value")
        key, value = item.split("=", 1)
        params[key.strip()] = value
    return params


def cmd_curves(kind: str, out: str, pairs: Sequence[str]) -> int:
    try:
        curve_kind = CurveKind(kind)
    except ValueError:
        return _fail(f"unknown curve kind {kind!r}; valid kinds: " + ", ".join(k.value for k in CurveKind))
    try:
        table = reference_curves(curve_kind, _params(pairs))
    except ValueError as exc:
        return _fail(str(exc))
    path = Path(out) / f"{curve_kind.value}.csv"
    try:
        export_curve(table, path)
    except ExportError as exc:
        return _fail(str(exc))
    print(f"{curve_kind.value}: {len(table.series)} series x {len(table.x)} points -> {path}")
    return EXIT_OK


def cmd_verify(out: str, faults: Sequence[str] = ()) -> int:
    unknown = sorted(set(faults) - set(FAULTS))
    if unknown:
        return _fail(f"unknown fault {unknown[0]!r}")
    out_dir = Path(out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        return _fail(f"{out_dir}: {exc.strerror or exc}")

    results = []
    for number, _ in CHECKS:
        result = run_check(number, faults)
        print(result.line(), flush=True)
        results.append(result)
    failed = [r for r in results if not r.passed]
    report = [
        {"criterion": r.number, "name": r.name, "passed": r.passed, "detail": r.detail,
         "seconds": round(r.seconds, 3)}
        for r in results
    ]
    try:
        (out_dir / "verify_report.json").write_text(json.dumps(report, indent=2) + "\n")
        if failed:
            first = failed[0]
            cx = json.dumps({"criterion": first.number, "name": first.name, "detail": first.detail,
                             "counterexample": first.counterexample}, default=str, indent=2)
            (out_dir / "counterexample.json").write_text(cx + "\n")
    except OSError as exc:
        return _fail(f"{out_dir}: {exc.strerror or exc}")
    if failed:
        first = failed[0]
        print(f"{len(failed)} of {len(results)} criteria failed; first counterexample "
              f"(criterion {first.number}):", file=sys.stderr)
        print(json.dumps(first.counterexample, default=str), file=sys.stderr)
        return EXIT_VERIFY
    print(f"all {len(results)} criteria passed")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args.config, args.out, args.set)
    if args.command == "curves":
        return cmd_curves(args.kind, args.out, args.set)
    return cmd_verify(args.out, args.inject_fault)


if __name__ == "__main__":
    sys.exit(main())
