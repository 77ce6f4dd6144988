"""Shared numerical helpers: quadrature, finite differences, interpolation.

These are small, deterministic building blocks used by several modules.  They
operate on plain numpy arrays; the leading axis is always the sample axis so
the same routines integrate scalar profiles and stacked matrices alike.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import ConvergenceFailure, QuadratureNotConverged


def simpson(y: np.ndarray, dx: float) -> np.ndarray:
    """Composite Simpson integral of uniformly sampled values along axis 0.

    Odd sample counts use pure Simpson pairs.  Even counts handle the final
    interval with the three-point (quadratic) end rule, keeping fourth-order
    accuracy.
    """
    y = np.asarray(y)
    n = y.shape[0]
    if n < 2:
        return np.zeros(y.shape[1:], dtype=y.dtype)
    if n == 2:
        return (y[0] + y[1]) * (dx / 2.0)
    m = n if n % 2 == 1 else n - 1
    core = (dx / 3.0) * (y[0] + y[m - 1] + 4.0 * y[1:m - 1:2].sum(axis=0)
                         + 2.0 * y[2:m - 2:2].sum(axis=0))
    if n % 2 == 1:
        return core
    # last interval from the quadratic through the final three samples
    tail = (dx / 12.0) * (-y[n - 3] + 8.0 * y[n - 2] + 5.0 * y[n - 1])
    return core + tail


def cumulative_simpson(y: np.ndarray, dx: float) -> np.ndarray:
    """Cumulative integral with local quadratic (Simpson-type) sub-rules.

    Returns an array of the same shape as ``y`` whose k-th slice approximates
    the integral from sample 0 to sample k.  Each interval is integrated with
    the quadratic through its three nearest samples, so interior cumulative
    values keep better than second-order accuracy.
    """
    y = np.asarray(y)
    n = y.shape[0]
    out = np.zeros_like(y, dtype=np.result_type(y.dtype, float))
    if n < 2:
        return out
    if n == 2:
        out[1] = (y[0] + y[1]) * (dx / 2.0)
        return out
    # interval [k, k+1] via quadratic through (k, k+1, k+2): h(5a + 8b - c)/12
    fwd = (dx / 12.0) * (5.0 * y[:-2] + 8.0 * y[1:-1] - y[2:])
    # final interval via quadratic through the last three points
    last = (dx / 12.0) * (-y[n - 3] + 8.0 * y[n - 2] + 5.0 * y[n - 1])
    steps = np.concatenate([fwd, last[None]], axis=0)
    np.cumsum(steps, axis=0, out=out[1:])
    return out


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = 1e-10, max_depth: int = 48) -> float:
    """Classic recursive adaptive Simpson quadrature for a scalar integrand."""

    def rule(x0, x2, f0, f1, f2):
        return (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2)

    def recurse(x0, x2, f0, f1, f2, whole, eps, depth):
        xm = 0.5 * (x0 + x2)
        xl = 0.5 * (x0 + xm)
        xr = 0.5 * (xm + x2)
        fl = f(xl)
        fr = f(xr)
        left = rule(x0, xm, f0, fl, f1)
        right = rule(xm, x2, f1, fr, f2)
        if depth <= 0:
            raise ConvergenceFailure("adaptive quadrature exceeded recursion depth")
        if abs(left + right - whole) <= 15.0 * eps:
            return left + right + (left + right - whole) / 15.0
        return (recurse(x0, xm, f0, fl, f1, left, eps / 2.0, depth - 1)
                + recurse(xm, x2, f1, fr, f2, right, eps / 2.0, depth - 1))

    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = rule(a, b, fa, fm, fb)
    return recurse(a, b, fa, fm, fb, whole, tol, max_depth)


def simpson_with_doubling_check(values_at: Callable[[np.ndarray], np.ndarray],
                                a: float, b: float, n_points: int,
                                rel_tol: float) -> float:
    """Simpson integral on n_points nodes, validated against half resolution.

    ``values_at`` maps an array of sample locations to integrand values.
    Raises QuadratureNotConverged when the coarse and fine results disagree
    by more than ``rel_tol`` relatively.
    """
    if b <= a:
        return 0.0
    n = max(5, n_points)
    if n % 2 == 0:
        n += 1
    s_fine = np.linspace(a, b, n)
    y_fine = values_at(s_fine)
    fine = simpson(y_fine, s_fine[1] - s_fine[0])
    coarse = simpson(y_fine[::2], 2.0 * (s_fine[1] - s_fine[0]))
    scale = max(abs(fine), abs(coarse), 1e-30)
    if abs(fine - coarse) > rel_tol * max(scale, 1.0) + rel_tol:
        raise QuadratureNotConverged(
            f"quadrature changed by {abs(fine - coarse):.3e} under node doubling")
    return float(fine)


def central_difference(fun: Callable[[float], np.ndarray], s: float,
                       h: float) -> np.ndarray:
    """First derivative by central difference."""
    return (fun(s + h) - fun(s - h)) / (2.0 * h)


def richardson_derivative(fun: Callable[[float], np.ndarray], s: float,
                          h: float) -> np.ndarray:
    """Fourth-order first derivative: Richardson pair of central differences."""
    d1 = central_difference(fun, s, h)
    d2 = central_difference(fun, s, h / 2.0)
    return (4.0 * d2 - d1) / 3.0


def second_difference(fun: Callable[[float], np.ndarray], s: float,
                      h: float) -> np.ndarray:
    """Second derivative by the three-point central stencil."""
    return (fun(s + h) - 2.0 * fun(s) + fun(s - h)) / (h * h)


def richardson_second_derivative(fun: Callable[[float], np.ndarray], s: float,
                                 h: float) -> np.ndarray:
    """Fourth-order second derivative via Richardson extrapolation."""
    d1 = second_difference(fun, s, h)
    d2 = second_difference(fun, s, h / 2.0)
    return (4.0 * d2 - d1) / 3.0


def hermite_interpolate(x0: float, dx: float, values: np.ndarray,
                        slopes: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Cubic Hermite evaluation on a uniform node grid.

    ``values`` and ``slopes`` are node data on ``x0 + k*dx``.  Accuracy is
    O(dx^4) for smooth data since exact derivatives are supplied.
    """
    x = np.asarray(x, dtype=float)
    n = values.shape[0]
    idx = np.clip(((x - x0) / dx).astype(int), 0, n - 2)
    t = (x - (x0 + idx * dx)) / dx
    t2 = t * t
    t3 = t2 * t
    h00 = 2.0 * t3 - 3.0 * t2 + 1.0
    h10 = t3 - 2.0 * t2 + t
    h01 = -2.0 * t3 + 3.0 * t2
    h11 = t3 - t2
    return (h00 * values[idx] + h10 * dx * slopes[idx]
            + h01 * values[idx + 1] + h11 * dx * slopes[idx + 1])


def spectral_norm(a: np.ndarray) -> float:
    """Largest singular value, via the top eigenvalue of ``A^dag A``."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    gram = a.conj().T @ a
    top = np.linalg.eigvalsh(gram)[-1]
    return float(np.sqrt(max(top.real, 0.0)))


def spectral_norms(stack: np.ndarray) -> np.ndarray:
    """Largest singular value of every matrix in a (n, d, d) stack."""
    stack = np.asarray(stack)
    gram = np.einsum("kji,kjl->kil", stack.conj(), stack)
    tops = np.linalg.eigvalsh(gram)[:, -1]
    return np.sqrt(np.clip(tops.real, 0.0, None))
