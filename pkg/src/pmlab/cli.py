"""Command-line entry points.

    pmlab simulate <config.json>
    pmlab sweep <config.json> --param run.cfl_safety --values 0.2,0.4
    pmlab verify-barrier <config.json>
    pmlab counterexample [--n-max N]
    pmlab plot <report.json>

Exit code 0 iff every criterion of the invoked scenario(s) passed.  The
default output root is ./pmlab-out, overridable with PMLAB_OUTPUT_ROOT.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import PMLabError
from .experiments import default_config, load_config, run_scenario, run_sweep


def _print_report(payload: dict):
    print(f"scenario {payload['scenario']}: {'PASS' if payload['passed'] else 'FAIL'}")
    for name, crit in payload["criteria"].items():
        status = "pass" if crit["passed"] else "FAIL"
        print(f"  [{status}] {name}: value={crit['value']:.6g} ({crit['detail']})")


def _cmd_simulate(args) -> int:
    report = run_scenario(args.config, out_dir=args.out)
    payload = report.to_payload()
    _print_report(payload)
    return 0 if payload["passed"] else 1


def _cmd_verify_barrier(args) -> int:
    cfg = load_config(args.config)
    if not cfg["scenario"].startswith("barrier-verify"):
        print("verify-barrier expects a barrier-verify-1 or barrier-verify-2 config", file=sys.stderr)
        return 2
    report = run_scenario(cfg, out_dir=args.out)
    _print_report(report.to_payload())
    return 0 if report.passed else 1


def _cmd_sweep(args) -> int:
    values = [json.loads(v) for v in args.values.split(",")]
    payloads = run_sweep(args.config, args.param, values, out_dir=args.out)
    ok = True
    for value, payload in zip(values, payloads):
        print(f"-- param {args.param} = {value}")
        _print_report(payload)
        ok = ok and payload["passed"]
    return 0 if ok else 1


def _cmd_counterexample(args) -> int:
    cfg = default_config("counterexample")
    cfg["counterexample"]["n_max"] = args.n_max
    report = run_scenario(cfg, out_dir=args.out)
    payload = report.to_payload()
    _print_report(payload)
    print(json.dumps(payload["metrics"], indent=2, sort_keys=True))
    return 0 if payload["passed"] else 1


def _cmd_plot(args) -> int:
    from .plots import emit_plots

    for path in emit_plots(args.manifest, out_dir=args.out):
        print(path)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="pmlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one scenario from a JSON config")
    p.add_argument("config")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("sweep", help="run a scenario over a list of parameter values")
    p.add_argument("config")
    p.add_argument("--param", required=True, help="dotted path, e.g. grid.n_cells")
    p.add_argument("--values", required=True, help="comma-separated JSON scalars")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("verify-barrier", help="run a barrier verification scenario")
    p.add_argument("config")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_verify_barrier)

    p = sub.add_parser("counterexample", help="emit the 2D counterexample certificate")
    p.add_argument("--n-max", type=int, default=50)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_counterexample)

    p = sub.add_parser("plot", help="render SVG plots from a scenario report")
    p.add_argument("manifest")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_plot)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except PMLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
