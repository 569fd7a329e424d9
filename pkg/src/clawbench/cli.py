"""Command-line front end: run scenarios, run suites, print the schema."""

import argparse
import json
import sys

from .errors import ScenarioError
from .harness import run, scenario_schema, suite


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="clawbench",
        description="Deterministic verification experiments for hyperbolic "
                    "conservation laws.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one scenario file")
    p_run.add_argument("scenario", help="path to a scenario JSON file")
    p_run.add_argument("--out", default=None, help="artifact output directory")
    p_run.add_argument("--seed", type=int, default=None, help="override the seed")

    p_suite = sub.add_parser("suite", help="execute every scenario in a manifest")
    p_suite.add_argument("manifest", help="path to a manifest JSON file")
    p_suite.add_argument("--jobs", type=int, default=1, help="parallel workers")
    p_suite.add_argument("--out", default=None, help="artifact output directory")
    p_suite.add_argument("--seed", type=int, default=None, help="override all seeds")

    sub.add_parser("schema", help="print the scenario schema")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            report = run(args.scenario, args.out, args.seed)
            print(json.dumps(report.to_json(), indent=2, sort_keys=True))
            return 0 if report.passed else 1
        if args.command == "suite":
            aggregate = suite(args.manifest, args.jobs, args.out, args.seed)
            for entry in aggregate["results"]:
                mark = "pass" if entry["passed"] else "FAIL"
                print(f"[{mark}] {entry['name']}")
            return 0 if aggregate["passed"] else 1
        print(json.dumps(scenario_schema(), indent=2, sort_keys=True))
        return 0
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
