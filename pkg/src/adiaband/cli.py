"""Command line front end: run, sweep, verify, fit.

Exit codes: 0 on success (all checks / runs passed), 1 when a requested
check or sweep member failed, 2 on configuration or input errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import AdiabandError
from .harness import (CSV_COLUMNS, RunConfig, fit_scaling, read_csv,
                      run_single, render_csv, sweep, SUMMARY_COLUMNS)
from .verify import verify_suite


def _load_config(path: str) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return RunConfig.from_dict(json.load(fh))


def _aggregate_per_run(rows, x_column):
    """Collapse per-grid-point rows to one row per run (max over s)."""
    groups = {}
    order = []
    for row in rows:
        key = row.get("run_id", row.get(x_column))
        if key not in groups:
            groups[key] = dict(row)
            order.append(key)
        g = groups[key]
        for col in ("proj_distance", "transition_prob"):
            val = row.get(col)
            if val not in (None, ""):
                prev = g.get(col)
                g[col] = val if prev in (None, "") \
                    else f"{max(float(prev), float(val)):.12g}"
        if float(row.get("s", 0.0) or 0.0) >= float(g.get("s", 0.0) or 0.0):
            g["s"] = row.get("s")
            g["A_tight_end"] = row.get("A_tight")
    return [groups[k] for k in order]


def _cmd_run(args) -> int:
    cfg = _load_config(args.config)
    if args.output:
        cfg = RunConfig(**{**cfg.__dict__, "output": args.output})
    report = run_single(cfg)
    if cfg.output:
        print(f"wrote {len(report.rows)} rows to {cfg.output}", file=sys.stderr)
    else:
        sys.stdout.write(render_csv(CSV_COLUMNS, report.rows))
    s = report.summary
    print(f"run {s['run_id']}: max proj distance {s['max_proj_distance']:.6g}, "
          f"max transition {s['max_transition_prob']:.6g}", file=sys.stderr)
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    if args.output:
        cfg = RunConfig(**{**cfg.__dict__, "output": args.output})
    result = sweep(cfg)
    if cfg.output:
        print(f"wrote {len(result.rows)} summary rows to {cfg.output}",
              file=sys.stderr)
    else:
        sys.stdout.write(render_csv(SUMMARY_COLUMNS, result.rows))
    failed = [r for r in result.rows if r["status"] != "ok"]
    for row in failed:
        print(f"failed: {row['run_id']} ({row['error']})", file=sys.stderr)
    return 0 if not failed else 1


def _cmd_verify(args) -> int:
    report = verify_suite(name_filter=args.filter)
    print(report.to_text())
    return 0 if report.passed else 1


def _cmd_fit(args) -> int:
    rows = read_csv(args.input)
    if not rows:
        print("error: empty input", file=sys.stderr)
        return 2
    y = args.y
    if y not in rows[0] and f"max_{y}" in rows[0]:
        y = f"max_{y}"
    if "s" in rows[0]:
        rows = _aggregate_per_run(rows, args.x)
    cutoff = None if args.cutoff is not None and args.cutoff <= 0 else args.cutoff
    fit = fit_scaling(rows, args.x, y, a_tight_cutoff=cutoff)
    print(f"slope={fit.slope:.8g} intercept={fit.intercept:.8g} "
          f"stderr={fit.stderr:.4g} points={len(fit.points)}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="adiaband",
        description="Adiabatic evolution diagnostics: runs, sweeps, "
                    "identity verification, scaling fits.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="one configured run, per-grid-point CSV")
    p_run.add_argument("--config", required=True, help="JSON config path")
    p_run.add_argument("--output", help="override the config's output path")
    p_run.set_defaults(fn=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="Cartesian sweep, one summary row per run")
    p_sweep.add_argument("--config", required=True, help="JSON config path")
    p_sweep.add_argument("--output", help="override the config's output path")
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the identity-check fleet")
    p_verify.add_argument("--filter", help="only checks whose name contains this")
    p_verify.set_defaults(fn=_cmd_verify)

    p_fit = sub.add_parser("fit", help="log-log scaling fit on CSV columns")
    p_fit.add_argument("--input", required=True, help="CSV path")
    p_fit.add_argument("--x", default="tau")
    p_fit.add_argument("--y", default="proj_distance")
    p_fit.add_argument("--cutoff", type=float, default=0.5,
                       help="drop rows with A_tight_end above this; <= 0 disables")
    p_fit.set_defaults(fn=_cmd_fit)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except AdiabandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
