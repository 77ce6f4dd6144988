"""Real and adiabatic time evolutions, the wave operator, and dynamical
identity diagnostics.

The scaled Schrodinger equation i dU/ds = tau H(s) U is integrated by the
exponential midpoint rule: U(s + h) = exp(-i tau h H(s + h/2)) U(s).  Each
factor is an exact matrix exponential, so every stored propagator is unitary
to machine precision and the only error source is the second-order midpoint
truncation, controlled by automatic substep doubling until self-convergence.

The adiabatic evolution uses the generator H(s) + (i/tau)[Pdot(s), P(s)],
which transports the band projector exactly; its deviation from the real
evolution is the wave operator Omega = Ua' U (prime = adjoint), the central
object of the error analysis.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import _su2
from .errors import (GridMismatch, NonPositiveValue, StepLimitExceeded)
from .families import HamiltonianFamily, InterpolatingFamily
from .numerics import cumulative_simpson, spectral_norm
from .operators import spectral_decompose
from .policy import DEFAULT_POLICY, NumericalPolicy
from .spectral import (BandSelector, ProjectorBundle, band_projector,
                       bundles_along, track_band, twiddle)

_CHUNK = 1 << 19


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid on [0,1] at which propagators are stored."""

    s_values: np.ndarray
    step: float

    def __post_init__(self):
        s = np.asarray(self.s_values, dtype=float)
        object.__setattr__(self, "s_values", s)
        if s.size < 64:
            raise GridMismatch(f"time grid needs >= 64 points, got {s.size}")
        if abs(s[0]) > 1e-12 or abs(s[-1] - 1.0) > 1e-12:
            raise GridMismatch("time grid must span [0, 1]")
        if np.max(np.abs(np.diff(s) - self.step)) > 1e-12:
            raise GridMismatch("time grid must be uniform")

    @classmethod
    def uniform(cls, points: int = 1024) -> "TimeGrid":
        return cls(s_values=np.linspace(0.0, 1.0, points),
                   step=1.0 / (points - 1))

    @property
    def n_points(self) -> int:
        return self.s_values.size


@dataclass(frozen=True)
class PropagatorTrace:
    """Propagator at every grid point for one evolution."""

    tau: float
    grid: TimeGrid
    u: np.ndarray
    kind: str
    substeps_per_interval: int
    convergence_error: float

    @property
    def dim(self) -> int:
        return self.u.shape[-1]

    def final(self) -> np.ndarray:
        return self.u[-1]

    def unitarity_defect(self) -> float:
        eye = np.eye(self.dim)
        return max(spectral_norm(uk.conj().T @ uk - eye) for uk in self.u)


@dataclass(frozen=True)
class WaveOperatorTrace:
    """Omega(s) = Ua(s)' U(s) per grid point, plus the adiabatic frame."""

    tau: float
    grid: TimeGrid
    omega: np.ndarray
    adiabatic_u: np.ndarray


def _is_ground_selector(band) -> bool:
    if band is None:
        return True
    if band.mode == "lowest" and band.count == 1:
        return True
    return band.mode == "indices" and band.indices == (0,)


def _bloch(m: np.ndarray):
    a = float((m[0, 0] + m[1, 1]).real) / 2.0
    c = np.array([m[0, 1].real, -m[0, 1].imag,
                  float((m[0, 0] - m[1, 1]).real) / 2.0])
    return a, c


def _estimate_substeps(family: HamiltonianFamily, tau: float, grid: TimeGrid,
                       policy: NumericalPolicy) -> int:
    if tau == 0.0:
        return 1
    comm = 0.0
    second = 0.0
    for s in np.linspace(0.0, 1.0, 17):
        pt = family.at(float(s))
        comm = max(comm, spectral_norm(pt.h @ pt.dh - pt.dh @ pt.h))
        second = max(second, spectral_norm(pt.d2h))
    n_comm = tau * np.sqrt(comm / (12.0 * policy.step_tol))
    n_second = np.sqrt(tau * second / (24.0 * policy.step_tol))
    total = int(np.ceil(1.2 * max(n_comm, n_second, 1.0)))
    return max(1, -(-total // (grid.n_points - 1)))


def _ordered_product(stack: np.ndarray) -> np.ndarray:
    """Product stack[-1] @ ... @ stack[0] by pairwise reduction."""
    m = stack
    while m.shape[0] > 1:
        even = m.shape[0] & ~1
        pairs = np.matmul(m[1:even:2], m[0:even:2])
        if m.shape[0] % 2:
            m = np.concatenate([pairs, m[-1:]])
        else:
            m = pairs
    return m[0]


def _compute_su2(family: InterpolatingFamily, tau: float, grid: TimeGrid,
                 policy: NumericalPolicy, r: int, adiabatic: bool) -> np.ndarray:
    a0, c0 = _bloch(family.h0)
    a1, c1 = _bloch(family.h1)
    da, dc = a1 - a0, c1 - c0
    n = grid.n_points
    dt = grid.step / r
    out = np.empty((n, 2, 2), dtype=complex)
    out[0] = np.eye(2)
    u = (1.0 + 0.0j, 0.0j, 0.0j, 1.0 + 0.0j)
    phase_acc = 0.0
    for k in range(n - 1):
        s0 = grid.s_values[k]
        done = 0
        while done < r:
            cnt = min(_CHUNK, r - done)
            mids = s0 + (done + 0.5 + np.arange(cnt)) * dt
            f, f1 = family.schedule.value_slope(mids)
            c = c0[None, :] + f[:, None] * dc[None, :]
            if adiabatic:
                cd = f1[:, None] * dc[None, :]
                norm = np.linalg.norm(c, axis=1)
                chat = c / norm[:, None]
                rad = (cd - chat * np.einsum("ki,ki->k", chat, cd)[:, None]) \
                    / norm[:, None]
                c = c + np.cross(chat, rad) / (2.0 * tau)
            norm = np.linalg.norm(c, axis=1)
            theta = tau * dt * norm
            st = np.sin(theta) / np.maximum(norm, 1e-300)
            ct = np.cos(theta)
            u = _su2.su2_chain(ct, st * c[:, 0], st * c[:, 1], st * c[:, 2], *u)
            phase_acc += tau * dt * float(np.sum(a0 + f * da))
            done += cnt
        ph = np.exp(-1j * phase_acc)
        out[k + 1] = np.array([[u[0], u[1]], [u[2], u[3]]]) * ph
    return out


def _compute_general(family: HamiltonianFamily, tau: float, grid: TimeGrid,
                     policy: NumericalPolicy, r: int, band) -> np.ndarray:
    n = grid.n_points
    d = family.dim
    dt = grid.step / r
    out = np.empty((n, d, d), dtype=complex)
    out[0] = np.eye(d)
    cur = np.eye(d, dtype=complex)
    bundle = None
    if band is not None:
        spec0 = spectral_decompose(family.at(0.0).h, policy=policy)
        bundle = band_projector(spec0, band, policy)
    chunk = max(1, _CHUNK // max(1, d * d // 4))
    for k in range(n - 1):
        s0 = grid.s_values[k]
        done = 0
        while done < r:
            cnt = min(chunk, r - done)
            mids = s0 + (done + 0.5 + np.arange(cnt)) * dt
            if band is None:
                hm = family.h_many(mids)
            else:
                hm = np.empty((cnt, d, d), dtype=complex)
                for j, s in enumerate(mids):
                    pt = family.at(float(s))
                    spec = spectral_decompose(pt.h, policy=policy)
                    bundle = track_band(spec, bundle, policy)
                    pdot = twiddle(pt.dh, pt.h, bundle, policy)
                    hm[j] = pt.h + (1j / tau) * (pdot @ bundle.p - bundle.p @ pdot)
            w, v = np.linalg.eigh(hm)
            steps = np.einsum("kij,kj,klj->kil", v,
                              np.exp(-1j * tau * dt * w), v.conj())
            cur = _ordered_product(steps) @ cur
            done += cnt
        out[k + 1] = cur
    return out


def _compute_u(family, tau, grid, policy, r, band, adiabatic):
    if isinstance(family, InterpolatingFamily) and family.dim == 2 \
            and (not adiabatic or _is_ground_selector(band)):
        return _compute_su2(family, tau, grid, policy, r, adiabatic)
    return _compute_general(family, tau, grid, policy, r,
                            band if adiabatic else None)


def _evolve(family, tau, grid, policy, substeps, band, adiabatic, kind):
    grid = grid if grid is not None else TimeGrid.uniform(policy.grid_points)
    if tau < 0.0:
        raise NonPositiveValue(f"time scale must be nonnegative, got {tau}")
    if adiabatic and tau <= 0.0:
        raise NonPositiveValue("adiabatic generator needs tau > 0")
    intervals = grid.n_points - 1
    if substeps is not None:
        r = int(substeps)
        if r * intervals > policy.step_limit:
            raise StepLimitExceeded(
                f"{r * intervals} substeps exceed cap {policy.step_limit}")
        u = _compute_u(family, tau, grid, policy, r, band, adiabatic)
        return PropagatorTrace(tau=tau, grid=grid, u=u, kind=kind,
                               substeps_per_interval=r,
                               convergence_error=float("nan"))
    r = _estimate_substeps(family, tau, grid, policy)
    if r * intervals > policy.step_limit:
        raise StepLimitExceeded(
            f"{r * intervals} substeps exceed cap {policy.step_limit}")
    prev = _compute_u(family, tau, grid, policy, r, band, adiabatic)
    while True:
        if 2 * r * intervals > policy.step_limit:
            raise StepLimitExceeded(
                f"no self-convergence within cap {policy.step_limit}: "
                f"residual above {policy.step_tol} at {r * intervals} substeps")
        cur = _compute_u(family, tau, grid, policy, 2 * r, band, adiabatic)
        diff = spectral_norm(cur[-1] - prev[-1])
        if diff <= policy.step_tol:
            return PropagatorTrace(tau=tau, grid=grid, u=cur, kind=kind,
                                   substeps_per_interval=2 * r,
                                   convergence_error=diff)
        prev = cur
        r *= 2


def evolve_real(family: HamiltonianFamily, tau: float, grid: TimeGrid | None = None,
                policy: NumericalPolicy = DEFAULT_POLICY,
                substeps: int | None = None) -> PropagatorTrace:
    """Integrate i dU/ds = tau H(s) U with U(0) = I.

    With ``substeps`` unset, the per-interval substep count starts from a
    commutator-based estimate and doubles until the final propagator moves
    by at most the policy step tolerance; an explicit ``substeps`` fixes the
    resolution (used by convergence-order studies).
    """
    return _evolve(family, tau, grid, policy, substeps, band=None,
                   adiabatic=False, kind="real")


def evolve_adiabatic(family: HamiltonianFamily, band: BandSelector, tau: float,
                     grid: TimeGrid | None = None,
                     policy: NumericalPolicy = DEFAULT_POLICY,
                     substeps: int | None = None) -> PropagatorTrace:
    """Evolution generated by H + (i/tau)[Pdot, P] for the tracked band."""
    return _evolve(family, tau, grid, policy, substeps, band=band,
                   adiabatic=True, kind="adiabatic")


def wave_operator(real_trace: PropagatorTrace,
                  adiabatic_trace: PropagatorTrace) -> WaveOperatorTrace:
    """Omega(s) = Ua(s)' U(s), pointwise over a shared grid."""
    if abs(real_trace.tau - adiabatic_trace.tau) > 1e-12 * max(1.0, real_trace.tau):
        raise GridMismatch("wave operator needs matching time scales")
    ga, gb = real_trace.grid, adiabatic_trace.grid
    if ga.n_points != gb.n_points or \
            np.max(np.abs(ga.s_values - gb.s_values)) > 1e-12:
        raise GridMismatch("wave operator needs matching grids")
    if real_trace.dim != adiabatic_trace.dim:
        raise GridMismatch("wave operator needs matching dimensions")
    omega = np.einsum("kji,kjl->kil", adiabatic_trace.u.conj(), real_trace.u)
    return WaveOperatorTrace(tau=real_trace.tau, grid=ga, omega=omega,
                             adiabatic_u=adiabatic_trace.u)


def volterra_residual(wave: WaveOperatorTrace, family: HamiltonianFamily,
                      band: BandSelector,
                      policy: NumericalPolicy = DEFAULT_POLICY,
                      bundles: Sequence[ProjectorBundle] | None = None,
                      pointwise: bool = False):
    """Defect of Omega(s) = I - integral_0^s K Omega, K = Ua'[Pdot, P] Ua."""
    grid = wave.grid
    if bundles is None:
        bundles = bundles_along(family, grid.s_values, band, policy)
    n = grid.n_points
    d = wave.omega.shape[-1]
    k_stack = np.empty((n, d, d), dtype=complex)
    for i, s in enumerate(grid.s_values):
        pt = family.at(float(s))
        pdot = twiddle(pt.dh, pt.h, bundles[i], policy)
        bracket = pdot @ bundles[i].p - bundles[i].p @ pdot
        ua = wave.adiabatic_u[i]
        k_stack[i] = ua.conj().T @ bracket @ ua
    integ = np.einsum("kij,kjl->kil", k_stack, wave.omega)
    rhs = np.eye(d) - cumulative_simpson(integ, grid.step)
    defect = np.array([spectral_norm(wave.omega[i] - rhs[i]) for i in range(n)])
    return defect if pointwise else float(defect.max())


def intertwining_residual(adiabatic_trace: PropagatorTrace,
                          family: HamiltonianFamily, band: BandSelector,
                          policy: NumericalPolicy = DEFAULT_POLICY,
                          bundles: Sequence[ProjectorBundle] | None = None,
                          pointwise: bool = False):
    """||Ua(s) P(0) - P(s) Ua(s)|| over the grid."""
    grid = adiabatic_trace.grid
    if bundles is None:
        bundles = bundles_along(family, grid.s_values, band, policy)
    p0 = bundles[0].p
    vals = np.array([
        spectral_norm(adiabatic_trace.u[i] @ p0 - bundles[i].p @ adiabatic_trace.u[i])
        for i in range(grid.n_points)])
    return vals if pointwise else float(vals.max())


def adiabatic_diagnostics(real_trace: PropagatorTrace, band: BandSelector,
                          family: HamiltonianFamily,
                          policy: NumericalPolicy = DEFAULT_POLICY,
                          bundles: Sequence[ProjectorBundle] | None = None):
    """Per-grid-point transition probability and projector distance.

    transition(s) = ||Q(s) U(s) P(0)||^2 is the worst-case band-leakage
    probability over initial states in the band; proj_distance(s) =
    ||U(s) P(0) U(s)' - P(s)||.
    """
    grid = real_trace.grid
    if bundles is None:
        bundles = bundles_along(family, grid.s_values, band, policy)
    p0 = bundles[0].p
    n = grid.n_points
    transition = np.empty(n)
    proj_distance = np.empty(n)
    for i in range(n):
        u = real_trace.u[i]
        transition[i] = spectral_norm(bundles[i].q @ u @ p0) ** 2
        proj_distance[i] = spectral_norm(u @ p0 @ u.conj().T - bundles[i].p)
    return transition, proj_distance
