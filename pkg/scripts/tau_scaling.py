#!/usr/bin/env python3
"""Fit error-vs-timescale orders on the n=3 search path.

Two experiments:
  (a) linear schedule: max-over-s projector distance ~ 1/tau and
      max transition probability ~ 1/tau^2;
  (b) switching schedules (beta:k, bump): transition probability at s=1,
      which decays like 1/tau^(2(k-1)) and super-polynomially for the
      smooth bump.

Writes one summary CSV per experiment and prints log-log slopes.
"""

import argparse
import os

import adiaband as ab
from adiaband.harness import (RunConfig, fit_points, fit_scaling, render_csv,
                              sweep, write_csv)

TAUS_LINEAR = [100.0, 200.0, 400.0, 800.0, 1600.0, 3200.0]
TAUS_SWITCH = [200.0, 400.0, 800.0, 1600.0, 3200.0, 6400.0]
POLICY = {"step_tol": 1e-7, "step_limit": 2 ** 26}


def linear_order(outdir: str):
    cfg = RunConfig.from_dict({
        "problem": {"kind": "grover", "n": 3, "representation": "reduced"},
        "schedule": "linear", "tau": TAUS_LINEAR, "grid": 257,
        "policy": POLICY, "bounds": ["theorem3"], "identity_checks": False,
        "output": os.path.join(outdir, "tau_scaling_linear.csv")})
    result = sweep(cfg)
    for col, label in (("max_proj_distance", "proj distance"),
                       ("max_transition_prob", "transition prob")):
        fit = fit_scaling(result.rows, "tau", col, a_tight_cutoff=None)
        print(f"linear {label:15s}: slope {fit.slope:+.3f} "
              f"(stderr {fit.stderr:.1e}, {len(fit.points)} points)")
    print(f"wrote {cfg.output}")


def switching_order(outdir: str):
    pol = ab.DEFAULT_POLICY.replace(**POLICY)
    grid = ab.TimeGrid.uniform(257)
    band = ab.BandSelector.lowest(1)
    gapfn = ab.grover_gap_function(3)
    rows = []
    for name in ("beta:k=2", "beta:k=3", "bump"):
        sch = ab.schedule_from_name(name, gapfn=gapfn)
        fam, _ = ab.grover_family(3, sch, representation="reduced")
        ys = []
        for tau in TAUS_SWITCH:
            real = ab.evolve_real(fam, tau, grid, pol)
            trans, proj = ab.adiabatic_diagnostics(real, band, fam, pol)
            end = max(float(trans[-1]), 1e-300)  # guard log of underflow
            ys.append(end)
            rows.append({"schedule": name, "tau": tau,
                         "end_transition_prob": end,
                         "max_proj_distance": float(proj.max())})
        full = fit_points(TAUS_SWITCH, ys)
        tail = fit_points(TAUS_SWITCH[-4:], ys[-4:])
        print(f"{name:9s} end transition: slope {full.slope:+.2f} "
              f"(last decade {tail.slope:+.2f})")
    path = os.path.join(outdir, "tau_scaling_switching.csv")
    write_csv(path, ("schedule", "tau", "end_transition_prob",
                     "max_proj_distance"), rows)
    print(f"wrote {path}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="results")
    args = ap.parse_args()
    os.makedirs(args.outdir, exist_ok=True)
    linear_order(args.outdir)
    switching_order(args.outdir)


if __name__ == "__main__":
    main()
