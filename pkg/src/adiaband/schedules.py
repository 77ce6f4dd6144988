"""Interpolation schedules f(s) on [0,1].

A schedule maps scaled time s to an interpolation coordinate f with
f(0) = 0, f(1) = 1, monotone non-decreasing, and reports the first three
derivatives alongside the value.  Provided kinds:

- linear: f(s) = s;
- smooth switching of order k: the regularized incomplete beta I_s(k,k),
  a polynomial whose derivatives 1..k-1 vanish at both endpoints;
- bump: normalized integral of exp(-1/(s(1-s))), all derivatives vanish
  at the endpoints;
- adaptive: solution of fdot = k g^p(f) with k = integral of g^(-p),
  which slows the sweep where the supplied gap function is small.

Evaluation is vectorized: s may be a float or an ndarray.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import (ConfigError, EndpointViolation, NonPositiveGap,
                     NormalizationFailure)
from .numerics import adaptive_simpson, hermite_interpolate
from .policy import DEFAULT_POLICY, NumericalPolicy


@dataclass(frozen=True)
class AdaptiveScheduleParams:
    """Parameters of a gap-adaptive schedule.

    ``p`` is the slowdown exponent in (1,2); ``k`` the normalization
    constant, the integral of g^(-p) over [0,1]; ``grid_points`` the number
    of integration steps used to solve the schedule ODE.
    """

    p: float
    k: float
    grid_points: int

    def __post_init__(self):
        if not (1.0 < self.p < 2.0):
            raise ConfigError(f"adaptive exponent p must lie in (1,2), got {self.p}")
        if self.k <= 0:
            raise ConfigError(f"adaptive normalization k must be positive, got {self.k}")


@dataclass(frozen=True)
class Schedule:
    """A schedule with vectorized evaluation of (f, fdot, fddot, fdddot)."""

    kind: str
    _fn: Callable = field(repr=False)
    _fn2: Callable | None = field(default=None, repr=False)
    params: object = None

    def __call__(self, s):
        scalar = np.ndim(s) == 0
        arr = np.atleast_1d(np.asarray(s, dtype=float))
        out = self._fn(arr)
        if scalar:
            return tuple(float(o[0]) for o in out)
        return out

    def value_slope(self, s):
        """(f, fdot) only; cheaper than full evaluation for some kinds."""
        scalar = np.ndim(s) == 0
        arr = np.atleast_1d(np.asarray(s, dtype=float))
        if self._fn2 is not None:
            out = self._fn2(arr)
        else:
            out = self._fn(arr)[:2]
        if scalar:
            return tuple(float(o[0]) for o in out)
        return out


def schedule_invariant_report(schedule: Schedule, grid_step: float = 1e-3) -> dict:
    """Endpoint and monotonicity diagnostics used by the verification suite."""
    f0 = schedule(0.0)[0]
    f1 = schedule(1.0)[0]
    s = np.arange(0.0, 1.0 + grid_step / 2, grid_step)
    f = schedule(s)[0]
    diffs = np.diff(f)
    return {
        "endpoint_start": abs(f0),
        "endpoint_end": abs(f1 - 1.0),
        "endpoints_ok": abs(f0) <= 1e-10 and abs(f1 - 1.0) <= 1e-10,
        "min_increment": float(diffs.min()) if diffs.size else 0.0,
        "monotone_ok": bool(np.all(diffs >= -1e-12)),
    }


def linear_schedule() -> Schedule:
    """f(s) = s."""

    def fn(s):
        return s, np.ones_like(s), np.zeros_like(s), np.zeros_like(s)

    return Schedule(kind="linear", _fn=fn)


def polynomial_schedule(coeffs, kind: str = "custom") -> Schedule:
    """Schedule from polynomial coefficients (lowest order first).

    Used for custom three-term weights like s(1-s); no endpoint
    normalization is imposed.
    """
    c0 = np.asarray(coeffs, dtype=float)
    c1 = npoly.polyder(c0)
    c2 = npoly.polyder(c1)
    c3 = npoly.polyder(c2)

    def fn(s):
        return (npoly.polyval(s, c0), npoly.polyval(s, c1),
                npoly.polyval(s, c2), npoly.polyval(s, c3))

    return Schedule(kind=kind, _fn=fn)


def smooth_switching(k: int) -> Schedule:
    """Regularized incomplete beta schedule I_s(k, k), k >= 2.

    fdot(s) = s^(k-1)(1-s)^(k-1)/B(k,k); derivatives of order 1..k-1 vanish
    at both endpoints, which drives the improved large-tau error order.
    """
    if k < 2:
        raise ConfigError(f"switching order must be >= 2, got {k}")
    binv = math.factorial(2 * k - 1) / (math.factorial(k - 1) ** 2)
    c1 = np.zeros(2 * k - 1)
    for j in range(k):
        c1[k - 1 + j] = math.comb(k - 1, j) * (-1) ** j * binv
    sched = polynomial_schedule(npoly.polyint(c1), kind=f"beta:k={k}")
    return Schedule(kind=sched.kind, _fn=sched._fn, params={"k": k})


# ---------------------------------------------------------------------------
# bump schedule
# ---------------------------------------------------------------------------

# exp(-1/(s(1-s))) underflows well before 1/(s-s^2) reaches this cutoff
_BUMP_CUT = 1.0 / 700.0


def _bump_pieces(s):
    """w = exp(-1/(s-s^2)) and its first two derivatives, masked to 0 outside."""
    t = s - s * s
    w = np.zeros_like(s)
    w1 = np.zeros_like(s)
    w2 = np.zeros_like(s)
    m = t > _BUMP_CUT
    tm = t[m]
    sm = s[m]
    wm = np.exp(-1.0 / tm)
    a = (1.0 - 2.0 * sm) / tm ** 2
    w[m] = wm
    w1[m] = wm * a
    w2[m] = wm * (a * a - 2.0 / tm ** 2 - 2.0 * (1.0 - 2.0 * sm) ** 2 / tm ** 3)
    return w, w1, w2


def bump_schedule(grid_points: int = 4097) -> Schedule:
    """Normalized integral of exp(-1/(s(1-s))).

    Infinitely differentiable with every derivative vanishing at s = 0, 1.
    The cumulative integral is tabulated on a uniform grid with an
    endpoint-derivative trapezoid correction and queried through cubic
    Hermite interpolation with analytic slopes.
    """
    n = grid_points - 1
    h = 1.0 / n
    grid = np.linspace(0.0, 1.0, grid_points)
    w, w1, _ = _bump_pieces(grid)
    cum = np.zeros(grid_points)
    cum[1:] = np.cumsum((w[1:] + w[:-1]) / 2.0) * h
    # Euler-Maclaurin endpoint correction; the s=0 slope term vanishes
    cum = cum - (h * h / 12.0) * w1
    z = cum[-1]
    fvals = cum / z
    slopes = w / z

    def fn(s):
        f = hermite_interpolate(0.0, h, fvals, slopes, s)
        ws, w1s, w2s = _bump_pieces(s)
        return f, ws / z, w1s / z, w2s / z

    def fn2(s):
        f = hermite_interpolate(0.0, h, fvals, slopes, s)
        ws, _, _ = _bump_pieces(s)
        return f, ws / z

    return Schedule(kind="bump", _fn=fn, _fn2=fn2)


# ---------------------------------------------------------------------------
# gap-adaptive schedule
# ---------------------------------------------------------------------------

def _vectorized_gap(gapfn):
    probe = np.array([0.25, 0.75])
    try:
        out = np.asarray(gapfn(probe), dtype=float)
        if out.shape == probe.shape:
            return gapfn
    except Exception:
        pass
    return np.vectorize(lambda x: float(gapfn(x)))


def adaptive_schedule(gapfn: Callable, p: float, grid_points: int | None = None,
                      policy: NumericalPolicy = DEFAULT_POLICY) -> Schedule:
    """Solve f(0) = 0, fdot(s) = k g^p(f(s)), k = integral of g^(-p) du.

    The solution reaches f(1) = 1 up to integration error; the result is
    rescaled to hit the endpoint exactly and NormalizationFailure is raised
    when the defect exceeds the policy tolerance.  fddot is evaluated from
    the chain rule, fddot = k^2 p g^(2p-1)(f) gdot(f), and fdddot by central
    differencing of fddot.
    """
    n = grid_points if grid_points is not None else policy.ode_steps
    if n < 100:
        raise ConfigError(f"adaptive schedule needs >= 100 grid points, got {n}")
    gap = _vectorized_gap(gapfn)
    probe = np.linspace(0.0, 1.0, 1001)
    gv = np.asarray(gap(probe), dtype=float)
    if not np.all(gv > 0.0):
        raise NonPositiveGap("gap function must be strictly positive on [0,1]")

    rough = float(np.trapezoid(gv ** (-p), probe))
    k = adaptive_simpson(lambda u: float(gap(u)) ** (-p), 0.0, 1.0,
                         tol=1e-9 * max(1.0, rough))
    params = AdaptiveScheduleParams(p=p, k=k, grid_points=n)

    h = 1.0 / n
    fgrid = np.empty(n + 1)
    fgrid[0] = 0.0

    def rhs(y):
        return k * float(gap(y)) ** p

    for i in range(n):
        y = fgrid[i]
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        fgrid[i + 1] = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    c = fgrid[-1]
    if abs(c - 1.0) > policy.normalization_tol:
        raise NormalizationFailure(
            f"adaptive schedule ended at f(1) = {c!r}, defect {abs(c - 1.0):.3e}")
    slopes = k * np.asarray(gap(fgrid), dtype=float) ** p

    def raw_pair(s):
        f = hermite_interpolate(0.0, h, fgrid, slopes, s)
        f1 = k * np.asarray(gap(f), dtype=float) ** p
        return f, f1

    def gap_slope(x, e=1e-5):
        d1 = (np.asarray(gap(x + e), float) - np.asarray(gap(x - e), float)) / (2 * e)
        d2 = (np.asarray(gap(x + e / 2), float)
              - np.asarray(gap(x - e / 2), float)) / e
        return (4.0 * d2 - d1) / 3.0

    def raw_f2(s):
        f, _ = raw_pair(s)
        return k * k * p * np.asarray(gap(f), float) ** (2.0 * p - 1.0) * gap_slope(f)

    def fn(s):
        f, f1 = raw_pair(s)
        f2 = raw_f2(s)
        d = policy.fd_second_step / 10.0
        f3 = (raw_f2(s + d) - raw_f2(s - d)) / (2.0 * d)
        return f / c, f1 / c, f2 / c, f3 / c

    def fn2(s):
        f, f1 = raw_pair(s)
        return f / c, f1 / c

    return Schedule(kind=f"adaptive:p={p:g}", _fn=fn, _fn2=fn2, params=params)


def schedule_from_name(name: str, gapfn: Callable | None = None,
                       policy: NumericalPolicy = DEFAULT_POLICY) -> Schedule:
    """Resolve a config name: linear, beta:k=<int>, bump, adaptive:p=<real>."""
    if name == "linear":
        return linear_schedule()
    if name == "bump":
        return bump_schedule()
    if name.startswith("beta:"):
        spec = name[len("beta:"):]
        if not spec.startswith("k="):
            raise ConfigError(f"malformed beta schedule name: {name!r}")
        try:
            return smooth_switching(int(spec[2:]))
        except ValueError as exc:
            raise ConfigError(f"malformed beta schedule name: {name!r}") from exc
    if name.startswith("adaptive:"):
        spec = name[len("adaptive:"):]
        if not spec.startswith("p="):
            raise ConfigError(f"malformed adaptive schedule name: {name!r}")
        if gapfn is None:
            raise ConfigError(
                "adaptive schedule requires a problem with an analytic gap")
        try:
            p = float(spec[2:])
        except ValueError as exc:
            raise ConfigError(f"malformed adaptive schedule name: {name!r}") from exc
        return adaptive_schedule(gapfn, p, policy=policy)
    raise ConfigError(f"unknown schedule name: {name!r}")
