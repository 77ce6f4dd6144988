"""Experiment harness: configured runs, sweeps, scaling fits, CSV output.

A run is described by a JSON-serializable config (problem, schedule, time
scale, grid, band, bound selection, policy overrides).  ``run_single``
produces per-grid-point diagnostics and bound values; ``sweep`` expands
list-valued axes into a Cartesian product and emits one summary row per
run; ``fit_scaling`` performs log-log least squares on any two dataset
columns.  Outputs are plain CSV with a fixed column order so that repeated
runs of the same config are byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .bounds import (fit_theorem4_constant, ingredient_profile,
                     theorem3_profile, theorem4_profile)
from .errors import (AdiabandError, ConfigError, InsufficientPoints,
                     NonPositiveValue)
from .families import (HamiltonianFamily, grover_family, grover_gap_function,
                       interpolating_family, random_smooth_family,
                       reparametrized_family)
from .operators import spectral_decompose
from .policy import DEFAULT_POLICY, NumericalPolicy
from .propagators import (TimeGrid, adiabatic_diagnostics, evolve_adiabatic,
                          evolve_real, intertwining_residual,
                          volterra_residual, wave_operator)
from .schedules import schedule_from_name
from .spectral import BandSelector, band_projector, bundles_along

CSV_COLUMNS = (
    "run_id", "problem", "n", "dim", "schedule", "p", "tau", "s", "gap", "m",
    "transition_prob", "proj_distance", "A_tight", "A_coarse", "A_theorem4",
    "intertwining_residual", "volterra_residual", "walltime_ms")

SUMMARY_COLUMNS = (
    "run_id", "problem", "n", "dim", "schedule", "p", "tau", "g_min",
    "max_proj_distance", "max_transition_prob", "A_tight_end", "A_coarse_end",
    "A_theorem4_end", "fitted_c", "max_intertwining_residual",
    "max_volterra_residual", "status", "error", "walltime_ms")

_SCHEDULE_RE = re.compile(
    r"^(linear|bump|beta:k=\d+|adaptive:p=\d+(\.\d+)?)$")

_PROBLEM_KEYS = {
    "grover": {"kind", "n", "representation", "marked"},
    "random": {"kind", "dim", "seed", "harmonics"},
    "matrix-file": {"kind", "path"},
}

_BAND_KEYS = {
    "lowest": {"mode", "count"},
    "indices": {"mode", "indices"},
    "window": {"mode", "lo", "hi"},
}

_TOP_KEYS = {"problem", "schedule", "tau", "grid", "band", "bounds", "output",
             "policy", "identity_checks", "c_const", "record_walltime"}


def _reject_unknown(d: Mapping, allowed: set, path: str):
    extra = sorted(set(d) - allowed)
    if extra:
        raise ConfigError(f"{path}{extra[0]}: unknown key")


def _check_schedule_name(name, path: str) -> str:
    if not isinstance(name, str) or not _SCHEDULE_RE.match(name):
        raise ConfigError(
            f"{path}: unrecognized schedule {name!r}; expected linear, bump, "
            f"beta:k=<int>, or adaptive:p=<real>")
    return name


@dataclass(frozen=True)
class RunConfig:
    """Validated description of one run (or one sweep, via list fields)."""

    problem: Mapping
    schedule: str | tuple = "linear"
    tau: float | tuple | Mapping = 100.0
    grid: int = 1024
    band: Mapping = field(default_factory=lambda: {"mode": "lowest", "count": 1})
    bounds: tuple = ("theorem3", "theorem4")
    output: str | None = None
    policy: Mapping = field(default_factory=dict)
    identity_checks: bool = True
    c_const: float = 1.0
    record_walltime: bool = False

    @classmethod
    def from_dict(cls, raw: Mapping) -> "RunConfig":
        if not isinstance(raw, Mapping):
            raise ConfigError("config root must be a JSON object")
        _reject_unknown(raw, _TOP_KEYS, "")
        if "problem" not in raw:
            raise ConfigError("problem: required")
        problem = dict(raw["problem"])
        kind = problem.get("kind")
        if kind not in _PROBLEM_KEYS:
            raise ConfigError(f"problem.kind: unknown problem kind {kind!r}")
        _reject_unknown(problem, _PROBLEM_KEYS[kind], "problem.")
        if kind == "grover":
            problem.setdefault("representation", "full")
            problem.setdefault("marked", "")
            if "n" not in problem:
                raise ConfigError("problem.n: required for grover")
        elif kind == "random":
            problem.setdefault("harmonics", 3)
            for key in ("dim", "seed"):
                if key not in problem:
                    raise ConfigError(f"problem.{key}: required for random")
        elif "path" not in problem:
            raise ConfigError("problem.path: required for matrix-file")

        schedule = raw.get("schedule", "linear")
        if isinstance(schedule, (list, tuple)):
            if not schedule:
                raise ConfigError("schedule: sweep list must be nonempty")
            schedule = tuple(_check_schedule_name(x, "schedule") for x in schedule)
        else:
            schedule = _check_schedule_name(schedule, "schedule")

        tau = raw.get("tau", 100.0)
        if isinstance(tau, Mapping):
            _reject_unknown(tau, {"gap_power", "constant"}, "tau.")
            for key in ("gap_power", "constant"):
                if key not in tau:
                    raise ConfigError(f"tau.{key}: required in a tau rule")
            tau = dict(tau)
        elif isinstance(tau, (list, tuple)):
            if not tau:
                raise ConfigError("tau: sweep list must be nonempty")
            tau = tuple(float(x) for x in tau)
            if any(x <= 0.0 for x in tau):
                raise ConfigError("tau: all values must be positive")
        else:
            tau = float(tau)
            if tau <= 0.0:
                raise ConfigError(f"tau: must be positive, got {tau}")

        band = dict(raw.get("band", {"mode": "lowest", "count": 1}))
        mode = band.get("mode")
        if mode not in _BAND_KEYS:
            raise ConfigError(f"band.mode: unknown mode {mode!r}")
        _reject_unknown(band, _BAND_KEYS[mode], "band.")
        if mode == "lowest":
            band.setdefault("count", 1)

        bounds = raw.get("bounds", ["theorem3", "theorem4"])
        if not isinstance(bounds, (list, tuple)):
            raise ConfigError("bounds: expected a list of bound names")
        for b in bounds:
            if b not in ("theorem3", "theorem4"):
                raise ConfigError(f"bounds: unknown bound evaluator {b!r}")

        policy = dict(raw.get("policy", {}))
        try:
            DEFAULT_POLICY.replace(**policy)
        except TypeError:
            bad = sorted(set(policy) - set(DEFAULT_POLICY.__dataclass_fields__))
            raise ConfigError(f"policy.{bad[0]}: unknown policy field") from None

        return cls(problem=problem, schedule=schedule, tau=tau,
                   grid=int(raw.get("grid", 1024)), band=band,
                   bounds=tuple(bounds), output=raw.get("output"),
                   policy=policy,
                   identity_checks=bool(raw.get("identity_checks", True)),
                   c_const=float(raw.get("c_const", 1.0)),
                   record_walltime=bool(raw.get("record_walltime", False)))

    def canonical(self) -> str:
        def enc(v):
            if isinstance(v, Mapping):
                return {k: enc(v[k]) for k in sorted(v)}
            if isinstance(v, (list, tuple)):
                return [enc(x) for x in v]
            return v
        payload = {
            "problem": enc(self.problem), "schedule": enc(self.schedule),
            "tau": enc(self.tau), "grid": self.grid, "band": enc(self.band),
            "bounds": enc(self.bounds), "policy": enc(self.policy),
            "identity_checks": self.identity_checks, "c_const": self.c_const,
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    def run_id(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]


def _band_selector(band: Mapping) -> BandSelector:
    if band["mode"] == "lowest":
        return BandSelector.lowest(int(band["count"]))
    if band["mode"] == "indices":
        return BandSelector.by_indices(tuple(int(i) for i in band["indices"]))
    return BandSelector.by_window(float(band["lo"]), float(band["hi"]))


def _numeric_fraction_gap(h0, h1, selector: BandSelector,
                          policy: NumericalPolicy):
    """Ground-band gap of (1 - x) H0 + x H1 as a function of x."""
    if selector.mode != "lowest":
        raise ConfigError(
            "schedule: adaptive schedules need a 'lowest' band selector "
            "for this problem kind")

    def gap(x):
        x = np.asarray(x, dtype=float)
        out = np.empty(x.shape)
        for idx in np.ndindex(x.shape):
            h = (1.0 - x[idx]) * h0 + x[idx] * h1
            spec = spectral_decompose(h, policy=policy)
            out[idx] = band_projector(spec, selector, policy).gap
        return out if out.shape else float(out)

    return gap


def _load_matrix_file(path: str):
    try:
        data = np.load(path)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"problem.path: cannot read {path!r}: {exc}") from exc
    for key in ("h0", "h1"):
        if key not in data:
            raise ConfigError(f"problem.path: {path!r} lacks array {key!r}")
    return np.asarray(data["h0"]), np.asarray(data["h1"])


def _problem_g_min(problem: Mapping, selector: BandSelector,
                   policy: NumericalPolicy):
    """Analytic minimal gap when available, else a dense numeric probe."""
    if problem["kind"] == "grover":
        return 2.0 ** (-problem["n"] / 2.0)
    if problem["kind"] == "random":
        base = random_smooth_family(problem["dim"], problem["seed"],
                                    problem["harmonics"], policy)
        bundles = bundles_along(base, np.linspace(0.0, 1.0, 513), selector, policy)
    else:
        h0, h1 = _load_matrix_file(problem["path"])
        base = interpolating_family(h0, h1, schedule_from_name("linear"), policy)
        bundles = bundles_along(base, np.linspace(0.0, 1.0, 513), selector, policy)
    return min(b.gap for b in bundles)


def _build_family(problem: Mapping, schedule_name: str,
                  selector: BandSelector, policy: NumericalPolicy):
    """(family, n label, analytic g_min or None) for a scalar config."""
    kind = problem["kind"]
    if kind == "grover":
        n = int(problem["n"])
        schedule = schedule_from_name(schedule_name,
                                      gapfn=grover_gap_function(n),
                                      policy=policy)
        fam, _ = grover_family(n, schedule,
                               representation=problem["representation"],
                               marked=problem["marked"], policy=policy)
        return fam, n, 2.0 ** (-n / 2.0)
    if kind == "random":
        base = random_smooth_family(int(problem["dim"]), int(problem["seed"]),
                                    int(problem["harmonics"]), policy)
        gapfn = None
        if schedule_name.startswith("adaptive"):
            # adaptive reparametrization of a generic path: gap as a
            # function of the base parameter
            def gapfn(x, _base=base, _sel=selector, _pol=policy):
                x = np.asarray(x, dtype=float)
                out = np.empty(x.shape)
                for idx in np.ndindex(x.shape):
                    spec = spectral_decompose(_base.at(float(x[idx])).h,
                                              policy=_pol)
                    out[idx] = band_projector(spec, _sel, _pol).gap
                return out if out.shape else float(out)
            if selector.mode != "lowest":
                raise ConfigError(
                    "schedule: adaptive schedules need a 'lowest' band "
                    "selector for this problem kind")
        schedule = schedule_from_name(schedule_name, gapfn=gapfn, policy=policy)
        return reparametrized_family(base, schedule), "", None
    h0, h1 = _load_matrix_file(problem["path"])
    gapfn = None
    if schedule_name.startswith("adaptive"):
        gapfn = _numeric_fraction_gap(h0, h1, selector, policy)
    schedule = schedule_from_name(schedule_name, gapfn=gapfn, policy=policy)
    return interpolating_family(h0, h1, schedule, policy), "", None


def _problem_label(problem: Mapping) -> str:
    if problem["kind"] == "grover":
        return f"grover-{problem['representation']}"
    if problem["kind"] == "random":
        return f"random-d{problem['dim']}-s{problem['seed']}"
    return "matrix-file"


def _schedule_p(schedule_name: str):
    if schedule_name.startswith("adaptive:p="):
        return float(schedule_name.split("=", 1)[1])
    return None


def _fmt(v) -> str:
    if v is None or v == "":
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.12g}"


def render_csv(columns: Sequence[str], rows: Sequence[Mapping]) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(c)) for c in columns))
    return "\n".join(lines) + "\n"


def write_csv(path: str, columns: Sequence[str], rows: Sequence[Mapping]):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_csv(columns, rows))


@dataclass(frozen=True)
class RunReport:
    """Per-grid-point diagnostics plus run-level summary for one config."""

    config: RunConfig
    rows: tuple
    summary: dict

    def csv_text(self) -> str:
        return render_csv(CSV_COLUMNS, self.rows)


def _policy_from(config: RunConfig) -> NumericalPolicy:
    return DEFAULT_POLICY.replace(**dict(config.policy))


def run_single(config: RunConfig) -> RunReport:
    """Execute one scalar config; returns the report and writes CSV if asked."""
    if isinstance(config.tau, (tuple, list, Mapping)):
        raise ConfigError("tau: run_single needs a single value; use sweep")
    if isinstance(config.schedule, (tuple, list)):
        raise ConfigError("schedule: run_single needs a single name; use sweep")
    t0 = time.perf_counter()
    policy = _policy_from(config)
    selector = _band_selector(config.band)
    family, n_label, g_min = _build_family(config.problem, config.schedule,
                                           selector, policy)
    tau = float(config.tau)
    grid = TimeGrid.uniform(config.grid)
    real = evolve_real(family, tau, grid, policy)
    bundles = bundles_along(family, grid.s_values, selector, policy)
    transition, proj = adiabatic_diagnostics(real, selector, family, policy,
                                             bundles=bundles)
    gap = np.array([b.gap for b in bundles])
    m_vals = np.array([b.m for b in bundles])

    a_tight = a_coarse = a4 = None
    fitted_c = None
    if config.bounds:
        prof = ingredient_profile(family, selector, grid.s_values, policy,
                                  bundles=bundles)
        if "theorem3" in config.bounds:
            a_tight, a_coarse, _ = theorem3_profile(
                family, selector, tau, grid.s_values, policy, prof=prof)
        if "theorem4" in config.bounds:
            a4, first_order, bracket = theorem4_profile(
                family, selector, tau, grid.s_values, c_const=config.c_const,
                policy=policy, prof=prof)
            fitted_c = fit_theorem4_constant(proj, first_order, bracket, tau)

    inter = volt = None
    if config.identity_checks:
        adia = evolve_adiabatic(family, selector, tau, grid, policy)
        wave = wave_operator(real, adia)
        inter = intertwining_residual(adia, family, selector, policy,
                                      bundles=bundles, pointwise=True)
        volt = volterra_residual(wave, family, selector, policy,
                                 bundles=bundles, pointwise=True)

    walltime = (time.perf_counter() - t0) * 1e3 if config.record_walltime else None
    run_id = config.run_id()
    label = _problem_label(config.problem)
    p_val = _schedule_p(config.schedule)
    rows = []
    for k, s in enumerate(grid.s_values):
        rows.append({
            "run_id": run_id, "problem": label, "n": n_label,
            "dim": family.dim, "schedule": config.schedule, "p": p_val,
            "tau": tau, "s": s, "gap": gap[k], "m": m_vals[k],
            "transition_prob": transition[k], "proj_distance": proj[k],
            "A_tight": None if a_tight is None else a_tight[k],
            "A_coarse": None if a_coarse is None else a_coarse[k],
            "A_theorem4": None if a4 is None else a4[k],
            "intertwining_residual": None if inter is None else inter[k],
            "volterra_residual": None if volt is None else volt[k],
            "walltime_ms": walltime,
        })
    summary = {
        "run_id": run_id, "problem": label, "n": n_label, "dim": family.dim,
        "schedule": config.schedule, "p": p_val, "tau": tau,
        "g_min": g_min if g_min is not None else float(gap.min()),
        "max_proj_distance": float(np.max(proj)),
        "max_transition_prob": float(np.max(transition)),
        "A_tight_end": None if a_tight is None else float(a_tight[-1]),
        "A_coarse_end": None if a_coarse is None else float(a_coarse[-1]),
        "A_theorem4_end": None if a4 is None else float(a4[-1]),
        "fitted_c": fitted_c,
        "max_intertwining_residual": None if inter is None else float(np.max(inter)),
        "max_volterra_residual": None if volt is None else float(np.max(volt)),
        "status": "ok", "error": "", "walltime_ms": walltime,
    }
    report = RunReport(config=config, rows=tuple(rows), summary=summary)
    if config.output:
        write_csv(config.output, CSV_COLUMNS, rows)
    return report


def _resolve_taus(config: RunConfig, problem: Mapping,
                  selector: BandSelector, policy: NumericalPolicy):
    if isinstance(config.tau, Mapping):
        g_min = _problem_g_min(problem, selector, policy)
        return (float(config.tau["constant"])
                / g_min ** float(config.tau["gap_power"]),)
    if isinstance(config.tau, tuple):
        if not config.tau:
            raise ConfigError("tau: sweep list must be nonempty")
        return config.tau
    return (float(config.tau),)


def expand_sweep(config: RunConfig) -> tuple:
    """Cartesian expansion of list-valued axes into scalar configs.

    Expansion order is deterministic: problem sizes, then schedules, then
    time scales; the tau rule {gap_power, constant} resolves per problem.
    """
    policy = _policy_from(config)
    selector = _band_selector(config.band)
    n_axis = config.problem.get("n")
    if isinstance(n_axis, (list, tuple)):
        if not n_axis:
            raise ConfigError("problem.n: sweep list must be nonempty")
        problems = [dict(config.problem, n=int(n)) for n in n_axis]
    else:
        problems = [dict(config.problem)]
    schedules = config.schedule if isinstance(config.schedule, tuple) \
        else (config.schedule,)
    out = []
    for problem in problems:
        taus = _resolve_taus(config, problem, selector, policy)
        for schedule in schedules:
            for tau in taus:
                out.append(RunConfig(
                    problem=problem, schedule=schedule, tau=float(tau),
                    grid=config.grid, band=config.band, bounds=config.bounds,
                    output=None, policy=config.policy,
                    identity_checks=config.identity_checks,
                    c_const=config.c_const,
                    record_walltime=config.record_walltime))
    return tuple(out)


def _worker_count() -> int:
    raw = os.environ.get("ADIABAND_WORKERS", "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ConfigError(
                f"ADIABAND_WORKERS must be an integer, got {raw!r}") from None
        return max(1, n)
    return min(4, os.cpu_count() or 1)


def _failure_row(cfg: RunConfig, exc: Exception) -> dict:
    return {
        "run_id": cfg.run_id(), "problem": _problem_label(cfg.problem),
        "n": cfg.problem.get("n", ""), "dim": "", "schedule": cfg.schedule,
        "p": _schedule_p(cfg.schedule), "tau": cfg.tau, "g_min": None,
        "max_proj_distance": None, "max_transition_prob": None,
        "A_tight_end": None, "A_coarse_end": None, "A_theorem4_end": None,
        "fitted_c": None, "max_intertwining_residual": None,
        "max_volterra_residual": None, "status": "error",
        "error": f"{type(exc).__name__}: {exc}", "walltime_ms": None,
    }


@dataclass(frozen=True)
class SweepResult:
    """Summary rows for every expanded run, in expansion order."""

    config: RunConfig
    rows: tuple

    @property
    def all_ok(self) -> bool:
        return all(r["status"] == "ok" for r in self.rows)

    def csv_text(self) -> str:
        return render_csv(SUMMARY_COLUMNS, self.rows)


def sweep(config: RunConfig) -> SweepResult:
    """Run the Cartesian product; merge summary rows in parameter order.

    Failures of individual runs are recorded in their row (status, error)
    rather than aborting the sweep.
    """
    configs = expand_sweep(config)

    def one(cfg):
        try:
            return run_single(cfg).summary
        except AdiabandError as exc:
            return _failure_row(cfg, exc)
        except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            return _failure_row(cfg, exc)

    workers = _worker_count()
    if workers == 1 or len(configs) == 1:
        rows = [one(cfg) for cfg in configs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, configs))
    result = SweepResult(config=config, rows=tuple(rows))
    if config.output:
        write_csv(config.output, SUMMARY_COLUMNS, result.rows)
    return result


@dataclass(frozen=True)
class ScalingFit:
    """Log-log least-squares fit y ~ exp(intercept) * x^slope."""

    slope: float
    intercept: float
    stderr: float
    points: tuple

    def __post_init__(self):
        if len(self.points) < 4:
            raise InsufficientPoints(
                f"scaling fit needs >= 4 points, got {len(self.points)}")
        if not np.isfinite(self.stderr):
            raise NonPositiveValue("scaling fit stderr is not finite")


def fit_points(xs, ys) -> ScalingFit:
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size != ys.size:
        raise InsufficientPoints("x and y lengths differ")
    if xs.size < 4:
        raise InsufficientPoints(f"scaling fit needs >= 4 points, got {xs.size}")
    if np.any(xs <= 0.0) or np.any(ys <= 0.0):
        raise NonPositiveValue("log-log fit needs strictly positive data")
    lx, ly = np.log(xs), np.log(ys)
    a = np.stack([lx, np.ones_like(lx)], axis=1)
    coef, *_ = np.linalg.lstsq(a, ly, rcond=None)
    slope, intercept = float(coef[0]), float(coef[1])
    resid = ly - a @ coef
    sxx = float(np.sum((lx - lx.mean()) ** 2))
    dof = xs.size - 2
    stderr = float(np.sqrt(np.sum(resid ** 2) / dof / sxx)) if sxx > 0 else np.inf
    return ScalingFit(slope=slope, intercept=intercept, stderr=stderr,
                      points=tuple(zip(xs.tolist(), ys.tolist())))


def fit_scaling(dataset: Sequence[Mapping], x_column: str, y_column: str,
                a_tight_cutoff: float | None = 0.5) -> ScalingFit:
    """Least squares on (log x, log y) over dataset rows.

    Rows with empty values or failed status are skipped.  By default rows
    whose end-point tight bound is >= 0.5 are discarded, since scaling
    orders are asymptotic statements valid once the bound is small.
    """
    xs, ys = [], []
    for row in dataset:
        if row.get("status", "ok") != "ok":
            continue
        xv, yv = row.get(x_column), row.get(y_column)
        if xv in (None, "") or yv in (None, ""):
            continue
        if a_tight_cutoff is not None:
            bound = row.get("A_tight_end")
            if bound not in (None, "") and float(bound) >= a_tight_cutoff:
                continue
        xs.append(float(xv))
        ys.append(float(yv))
    if len(xs) < 4:
        raise InsufficientPoints(
            f"scaling fit needs >= 4 usable rows, got {len(xs)}")
    return fit_points(xs, ys)


def read_csv(path: str) -> list:
    """CSV back into a list of row dicts (all values as strings)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    header = lines[0].split(",")
    return [dict(zip(header, ln.split(","))) for ln in lines[1:]]
