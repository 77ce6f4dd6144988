"""Time-dependent Hamiltonian families H(s) on s in [0,1].

Every family evaluates to the operator together with its first three
derivatives in s.  Analytic families propagate schedule derivatives through
the chain rule; a finite-difference mode exists for user-supplied matrix
functions without closed-form derivatives.

The search family comes in two representations: the full 2^n-dimensional
pair of rank-one projector complements, and an exactly equivalent 2x2 block
on the invariant subspace spanned by the marked state and the orthonormalized
uniform superposition.  Outside that block the full operator acts as the
identity at every s, so the ground band and the gap live entirely in the
block; the reduced form makes large n affordable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (ConfigError, DimensionMismatch, DimensionTooLarge,
                     EndpointViolation)
from .numerics import spectral_norm
from .operators import HermitianOperator, _as_matrix
from .policy import DEFAULT_POLICY, NumericalPolicy
from .schedules import Schedule, linear_schedule


@dataclass(frozen=True)
class FamilyPoint:
    """H and its first three s-derivatives at one parameter value."""

    h: np.ndarray
    dh: np.ndarray
    d2h: np.ndarray
    d3h: np.ndarray


@dataclass(frozen=True)
class HamiltonianFamily:
    """Base class; concrete families implement ``at``.

    ``eval`` wraps the same data as validated Hermitian operators for
    external consumers; internal numerics use the raw arrays from ``at``.
    """

    dim: int
    derivative_mode: str = "analytic"
    metadata: str = ""

    def at(self, s: float) -> FamilyPoint:
        raise NotImplementedError

    def eval(self, s: float):
        pt = self.at(s)
        return (HermitianOperator(pt.h), HermitianOperator(pt.dh),
                HermitianOperator(pt.d2h), HermitianOperator(pt.d3h))

    def h_many(self, s_values: np.ndarray) -> np.ndarray:
        """H(s) stacked over an array of parameter values."""
        s_values = np.asarray(s_values, dtype=float)
        out = np.empty((s_values.size, self.dim, self.dim), dtype=complex)
        for i, s in enumerate(s_values.ravel()):
            out[i] = self.at(float(s)).h
        return out


def _coerce_hermitian(x, policy: NumericalPolicy) -> np.ndarray:
    if isinstance(x, HermitianOperator):
        return x.matrix
    return HermitianOperator(_as_matrix(x), policy=policy).matrix


@dataclass(frozen=True)
class InterpolatingFamily(HamiltonianFamily):
    """H(s) = [1 - f(s)] H0 + f(s) H1 for a schedule f."""

    h0: np.ndarray = None
    h1: np.ndarray = None
    schedule: Schedule = None

    def at(self, s: float) -> FamilyPoint:
        f, f1, f2, f3 = self.schedule(float(s))
        diff = self.h1 - self.h0
        return FamilyPoint(h=self.h0 + f * diff, dh=f1 * diff,
                           d2h=f2 * diff, d3h=f3 * diff)

    def h_many(self, s_values):
        f = self.schedule(np.asarray(s_values, dtype=float))[0]
        diff = self.h1 - self.h0
        return self.h0[None, :, :] + f[:, None, None] * diff[None, :, :]


def interpolating_family(h0, h1, schedule: Schedule,
                         policy: NumericalPolicy = DEFAULT_POLICY) -> InterpolatingFamily:
    m0 = _coerce_hermitian(h0, policy)
    m1 = _coerce_hermitian(h1, policy)
    if m0.shape != m1.shape:
        raise DimensionMismatch(
            f"endpoint dims differ: {m0.shape[0]} vs {m1.shape[0]}")
    return InterpolatingFamily(
        dim=m0.shape[0], metadata=f"interpolating(dim={m0.shape[0]}, "
        f"schedule={schedule.kind})", h0=m0, h1=m1, schedule=schedule)


@dataclass(frozen=True)
class ThreeTermFamily(HamiltonianFamily):
    """H(s) = [1 - f(s)] H0 + f(s) H1 + k(s) H2 with k(0) = k(1) = 0."""

    h0: np.ndarray = None
    h1: np.ndarray = None
    h2: np.ndarray = None
    f_schedule: Schedule = None
    k_schedule: Schedule = None

    def at(self, s: float) -> FamilyPoint:
        f, f1, f2, f3 = self.f_schedule(float(s))
        k, k1, k2, k3 = self.k_schedule(float(s))
        diff = self.h1 - self.h0
        return FamilyPoint(h=self.h0 + f * diff + k * self.h2,
                           dh=f1 * diff + k1 * self.h2,
                           d2h=f2 * diff + k2 * self.h2,
                           d3h=f3 * diff + k3 * self.h2)

    def h_many(self, s_values):
        s_values = np.asarray(s_values, dtype=float)
        f = self.f_schedule(s_values)[0]
        k = self.k_schedule(s_values)[0]
        diff = self.h1 - self.h0
        return (self.h0[None] + f[:, None, None] * diff[None]
                + k[:, None, None] * self.h2[None])


def three_term_family(h0, h1, h2, f: Schedule, k: Schedule,
                      policy: NumericalPolicy = DEFAULT_POLICY) -> ThreeTermFamily:
    m0 = _coerce_hermitian(h0, policy)
    m1 = _coerce_hermitian(h1, policy)
    m2 = _coerce_hermitian(h2, policy)
    if not (m0.shape == m1.shape == m2.shape):
        raise DimensionMismatch("all three endpoint operators must share a dimension")
    for end in (0.0, 1.0):
        val = k(end)[0]
        if abs(val) > 1e-12:
            raise EndpointViolation(
                f"three-term weight must vanish at s={end:g}, got {val!r}")
    return ThreeTermFamily(
        dim=m0.shape[0], metadata=f"three-term(dim={m0.shape[0]})",
        h0=m0, h1=m1, h2=m2, f_schedule=f, k_schedule=k)


@dataclass(frozen=True)
class TrigFamily(HamiltonianFamily):
    """Seeded random smooth family: trigonometric polynomial in s."""

    a0: np.ndarray = None
    cos_coeffs: tuple = ()
    sin_coeffs: tuple = ()

    def at(self, s: float) -> FamilyPoint:
        h = self.a0.copy()
        dh = np.zeros_like(self.a0)
        d2h = np.zeros_like(self.a0)
        d3h = np.zeros_like(self.a0)
        for r, (a, b) in enumerate(zip(self.cos_coeffs, self.sin_coeffs), start=1):
            w = 2.0 * np.pi * r
            c, sn = np.cos(w * s), np.sin(w * s)
            h += a * c + b * sn
            dh += w * (-a * sn + b * c)
            d2h += w * w * (-a * c - b * sn)
            d3h += w ** 3 * (a * sn - b * c)
        return FamilyPoint(h=h, dh=dh, d2h=d2h, d3h=d3h)

    def h_many(self, s_values):
        s_values = np.asarray(s_values, dtype=float)
        out = np.broadcast_to(self.a0, (s_values.size, self.dim, self.dim)).copy()
        for r, (a, b) in enumerate(zip(self.cos_coeffs, self.sin_coeffs), start=1):
            w = 2.0 * np.pi * r
            out += (np.cos(w * s_values)[:, None, None] * a[None]
                    + np.sin(w * s_values)[:, None, None] * b[None])
        return out


def _random_hermitian(rng, dim):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (g + g.conj().T) / 2.0


def random_smooth_family(dim: int, seed: int, num_harmonics: int,
                         policy: NumericalPolicy = DEFAULT_POLICY) -> TrigFamily:
    """H(s) = A0 + sum_r [A_r cos(2 pi r s) + B_r sin(2 pi r s)], ||H|| <= 1.

    A0 is a uniform level ladder plus a seeded Hermitian perturbation; the
    perturbation budget (constant part plus all harmonics, by the triangle
    inequality) is capped at 30% of half the ladder spacing, so every
    eigenvalue stays inside its own ladder cell and all single-level bands
    keep a gap >= 0.7 spacings at every s.  The whole family is rescaled to
    sup_s ||H(s)|| <= 1.  Deterministic per seed.
    """
    if dim < 2:
        raise ConfigError(f"random family needs dim >= 2, got {dim}")
    rng = np.random.default_rng(seed)
    r0 = _random_hermitian(rng, dim)
    cos_coeffs = [_random_hermitian(rng, dim) for _ in range(num_harmonics)]
    sin_coeffs = [_random_hermitian(rng, dim) for _ in range(num_harmonics)]
    budget = spectral_norm(r0) + sum(spectral_norm(m)
                                     for m in cos_coeffs + sin_coeffs)
    pscale = 0.15 / max(budget, 1e-300)
    ladder = np.diag(np.arange(dim, dtype=float)).astype(complex)
    scale = 1.0 / (dim - 1.0 + 0.15)
    return TrigFamily(
        dim=dim, metadata=f"random(dim={dim}, seed={seed}, "
        f"harmonics={num_harmonics})", a0=(ladder + pscale * r0) * scale,
        cos_coeffs=tuple(pscale * scale * m for m in cos_coeffs),
        sin_coeffs=tuple(pscale * scale * m for m in sin_coeffs))


@dataclass(frozen=True)
class CallableFamily(HamiltonianFamily):
    """Family defined by a matrix-valued function, derivatives by
    Richardson-extrapolated central differences."""

    fn: Callable = None
    fd_step: float = 1e-4

    def at(self, s: float) -> FamilyPoint:
        h = self.fd_step

        def d1(step):
            return (self.fn(s + step) - self.fn(s - step)) / (2.0 * step)

        def d2(step):
            return (self.fn(s + step) - 2.0 * self.fn(s) + self.fn(s - step)) / step ** 2

        def d3(step):
            return (self.fn(s + 2 * step) - 2.0 * self.fn(s + step)
                    + 2.0 * self.fn(s - step) - self.fn(s - 2 * step)) / (2.0 * step ** 3)

        dh = (4.0 * d1(h / 2) - d1(h)) / 3.0
        d2h = (4.0 * d2(h / 2) - d2(h)) / 3.0
        d3h = (4.0 * d3(h / 2) - d3(h)) / 3.0
        return FamilyPoint(h=np.asarray(self.fn(s), dtype=complex),
                           dh=dh, d2h=d2h, d3h=d3h)


def callable_family(fn: Callable, dim: int, fd_step: float = 1e-4,
                    metadata: str = "callable") -> CallableFamily:
    return CallableFamily(dim=dim, derivative_mode="finite-difference",
                          metadata=metadata, fn=fn, fd_step=fd_step)


@dataclass(frozen=True)
class ReparametrizedFamily(HamiltonianFamily):
    """Base family traversed at schedule speed: H(s) = B(f(s)).

    Derivatives follow the chain rule through third order, so bound
    ingredients computed from this family see the reparametrized path.
    """

    base: HamiltonianFamily = None
    schedule: Schedule = None

    def at(self, s: float) -> FamilyPoint:
        f, f1, f2, f3 = self.schedule(float(s))
        pt = self.base.at(float(f))
        return FamilyPoint(
            h=pt.h,
            dh=f1 * pt.dh,
            d2h=f2 * pt.dh + f1 ** 2 * pt.d2h,
            d3h=f3 * pt.dh + 3.0 * f1 * f2 * pt.d2h + f1 ** 3 * pt.d3h)

    def h_many(self, s_values):
        f = self.schedule(np.asarray(s_values, dtype=float))[0]
        return self.base.h_many(f)


def reparametrized_family(base: HamiltonianFamily,
                          schedule: Schedule) -> HamiltonianFamily:
    if schedule.kind == "linear":
        return base
    return ReparametrizedFamily(
        dim=base.dim, derivative_mode=base.derivative_mode,
        metadata=f"{base.metadata}@{schedule.kind}", base=base,
        schedule=schedule)


# ---------------------------------------------------------------------------
# search problem
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GroverProblem:
    """Search instance: n qubits, marked bitstring u, representation choice.

    Full representation: H0 = I - |uniform><uniform|, H1 = I - |u><u| on
    dimension 2^n.  Reduced representation: the 2x2 block on
    span{|u>, orthonormalized uniform state}.
    """

    n: int
    u: str = ""
    representation: str = "full"

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError(f"qubit count must be >= 1, got {self.n}")
        if self.representation not in ("full", "reduced"):
            raise ConfigError(
                f"representation must be full or reduced, got {self.representation!r}")
        if self.representation == "full" and self.n > 12:
            raise DimensionTooLarge(
                f"full representation capped at n = 12, got n = {self.n}")
        if self.representation == "reduced" and self.n > 40:
            raise DimensionTooLarge(
                f"reduced representation capped at n = 40, got n = {self.n}")
        u = self.u or "0" * self.n
        if len(u) != self.n or set(u) - {"0", "1"}:
            raise ConfigError(f"marked bitstring {u!r} invalid for n = {self.n}")
        object.__setattr__(self, "u", u)

    def endpoint_matrices(self):
        if self.representation == "full":
            d = 2 ** self.n
            uniform = np.full(d, d ** -0.5, dtype=complex)
            h0 = np.eye(d, dtype=complex) - np.outer(uniform, uniform.conj())
            marked = np.zeros(d, dtype=complex)
            marked[int(self.u, 2)] = 1.0
            h1 = np.eye(d, dtype=complex) - np.outer(marked, marked.conj())
            return h0, h1
        alpha = 2.0 ** (-self.n / 2.0)
        beta = np.sqrt(1.0 - alpha * alpha)
        h0 = np.array([[beta * beta, -alpha * beta],
                       [-alpha * beta, alpha * alpha]], dtype=complex)
        h1 = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)
        return h0, h1


def grover_gap_function(n: int) -> Callable:
    """g(x) = sqrt(2^-n + 4 (1 - 2^-n)(x - 1/2)^2), vectorized."""
    eps = 2.0 ** (-n)

    def gap(x):
        x = np.asarray(x, dtype=float)
        return np.sqrt(eps + 4.0 * (1.0 - eps) * (x - 0.5) ** 2)

    return gap


def grover_family(n: int, schedule: Schedule | None = None,
                  representation: str = "full", marked: str = "",
                  policy: NumericalPolicy = DEFAULT_POLICY):
    """Search family and its analytic ground gap s -> g(f(s)).

    The marked element defaults to the all-zeros string; spectrum, gap, and
    norms are independent of the choice by symmetry.
    """
    schedule = schedule if schedule is not None else linear_schedule()
    prob = GroverProblem(n=n, u=marked, representation=representation)
    h0, h1 = prob.endpoint_matrices()
    fam = InterpolatingFamily(
        dim=h0.shape[0], metadata=f"grover(n={n}, {representation}, "
        f"schedule={schedule.kind})", h0=h0, h1=h1, schedule=schedule)
    base_gap = grover_gap_function(n)

    def analytic_gap(s):
        return base_gap(schedule.value_slope(s)[0])

    return fam, analytic_gap
