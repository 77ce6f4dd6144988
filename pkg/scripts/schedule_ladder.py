#!/usr/bin/env python3
"""Error across problem sizes when tau follows a gap rule.

Ladder over reduced search problems n = 4..12 (g_min = 2^(-n/2)):
  (a) linear schedule with tau = 400 / g_min^2: error stays flat;
  (b) adaptive schedule (p = 1.5) with tau = 400 / g_min: error stays
      flat at quadratically shorter runtimes, and beats the linear
      schedule run at the same tau.

Both are plain harness sweeps driven by a tau rule {gap_power, constant}.
"""

import argparse
import os

from adiaband.harness import RunConfig, sweep

NS = [4, 6, 8, 10, 12]
POLICY = {"step_tol": 2e-5, "step_limit": 2 ** 33}


def _band_ratio(rows):
    vals = [r["max_proj_distance"] for r in rows if r["status"] == "ok"]
    return max(vals) / min(vals), vals


def ladder(outdir: str, gap_power: float, schedule, name: str):
    cfg = RunConfig.from_dict({
        "problem": {"kind": "grover", "n": NS, "representation": "reduced"},
        "schedule": schedule, "grid": 257,
        "tau": {"gap_power": gap_power, "constant": 400.0},
        "policy": POLICY, "bounds": [], "identity_checks": False,
        "output": os.path.join(outdir, f"ladder_{name}.csv")})
    result = sweep(cfg)
    print(f"wrote {cfg.output}")
    return result


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="results")
    args = ap.parse_args()
    os.makedirs(args.outdir, exist_ok=True)

    lin = ladder(args.outdir, 2.0, "linear", "linear_gap2")
    ratio, _ = _band_ratio(lin.rows)
    print(f"linear, tau*g_min^2=400: max proj band ratio {ratio:.2f} "
          f"over n={NS}")

    both = ladder(args.outdir, 1.0, ["adaptive:p=1.5", "linear"],
                  "adaptive_gap1")
    ada = [r for r in both.rows if r["schedule"].startswith("adaptive")]
    lin_same = [r for r in both.rows if r["schedule"] == "linear"]
    ratio, vals = _band_ratio(ada)
    print(f"adaptive p=1.5, tau*g_min=400: max proj band ratio {ratio:.2f}")
    for ra, rl in zip(ada, lin_same):
        flag = "<" if ra["max_proj_distance"] < rl["max_proj_distance"] else ">"
        print(f"  n={ra['n']:2d} tau={ra['tau']:9.1f}: "
              f"adaptive {ra['max_proj_distance']:.5f} {flag} "
              f"linear {rl['max_proj_distance']:.5f}")


if __name__ == "__main__":
    main()
