"""Command-line front end for the certificate toolkit.

Three verbs:

``certify``
    Run the full pipeline and write the report, the canonical report body,
    and the CSV exports into the output directory.

``experiment``
    Run the pipeline plus the configured experiment suites, with the same
    outputs extended by one CSV per experiment figure.

``check``
    Run the pipeline and print only the invariant check lines; nothing is
    written.

Every verb exits 0 exactly when all checks pass; a configuration error
exits 2 and a pipeline failure exits 1 with the failing stage named in
the partial report.
"""

from __future__ import annotations

import argparse
import sys
from typing import Any

from .errors import ConfigError
from .report import (
    emit_report,
    load_config,
    render_human_table,
    run_certificate,
    run_experiments,
)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavecert",
        description="explicit log-stability certificates for the wave operator",
    )
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb, text in (
        ("certify", "compute the certificate and write the report"),
        ("experiment", "compute the certificate and run the experiment suites"),
        ("check", "run the pipeline invariants and print pass/fail lines"),
    ):
        p = sub.add_parser(verb, help=text)
        p.add_argument("--config", default=None, help="YAML configuration file (defaults used when omitted)")
        p.add_argument("--out", default="wavecert-out", help="output directory for report and CSV exports")
        p.add_argument("--seed", type=int, default=None, help="override experiments.seed")
        p.add_argument(
            "--resolution", type=int, default=None, help="override metric.nodes (spatial grid resolution)"
        )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    overrides: dict[str, Any] = {}
    if args.seed is not None:
        overrides["experiments.seed"] = args.seed
    if args.resolution is not None:
        overrides["metric.nodes"] = args.resolution

    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    if args.verb == "experiment":
        report = run_experiments(cfg)
    else:
        report = run_certificate(cfg)

    if args.verb == "check":
        body = report.body
        for name in sorted(body.get("checks", {})):
            print(f"check {name:<34} {'pass' if body['checks'][name] else 'FAIL'}")
        if "failure" in body:
            print(f"FAILED at stage {body['failure']['stage']}: {body['failure']['error']}")
        print(f"result {'PASS' if report.ok else 'FAIL'}")
        return report.exit_code

    paths = emit_report(report, args.out)
    sys.stdout.write(render_human_table(report))
    print("artifacts written:")
    for name in sorted(paths):
        print(f"  {paths[name]}")
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
