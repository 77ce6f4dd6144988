"""Rigorous error-bound evaluation and exact-identity residuals.

Two bound expressions are implemented for the deviation between the real
evolution and the spectral band:

- ``theorem3_bound``: boundary term plus an integral of projector-derivative
  norms, in a tight form using ||Pdot||, ||Q Pddot P||, and a coarser form
  using only ||Hdot||, ||Hddot|| and gap powers;
- ``theorem4_bound``: a 1/tau boundary term plus an explicit 1/tau^2
  bracket, with an undetermined prefactor C supplied by the caller and,
  separately, fitted a posteriori against measured data.

Also here: the inequality chain relating the derivative norms to gap powers
(``lemma8_chain``), the classic sup ||Hdot||/g^2 slowness criterion, and the
residual of the second-order integration-by-parts expansion of the wave
operator's off-diagonal block (an exact identity, so its residual measures
only discretization error).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import QuadratureNotConverged
from .families import HamiltonianFamily
from .numerics import cumulative_simpson, simpson, spectral_norm
from .operators import spectral_decompose
from .policy import DEFAULT_POLICY, NumericalPolicy
from .propagators import (TimeGrid, WaveOperatorTrace, evolve_adiabatic,
                          evolve_real, wave_operator)
from .spectral import (BandSelector, ProjectorBundle, band_projector,
                       bundles_along, pdot_twiddle_derivative,
                       projector_second_derivative,
                       projector_second_derivative_fd, track_band, twiddle,
                       twiddle_derivative)


@dataclass(frozen=True)
class BoundReport:
    """Bound and measurement values at one scaled time."""

    s: float
    a_tight: float
    a_coarse: float
    a_theorem4: float
    measured_proj_distance: float
    measured_transition: float
    ingredients: dict


@dataclass(frozen=True)
class IngredientProfile:
    """Pointwise bound ingredients along a parameter grid."""

    s_values: np.ndarray
    gap: np.ndarray
    m: np.ndarray
    dh_norm: np.ndarray
    d2h_norm: np.ndarray
    d3h_norm: np.ndarray
    h_max: np.ndarray
    pdot_norm: np.ndarray
    pdot_twiddle_norm: np.ndarray
    qpddp_norm: np.ndarray
    qtdotp_norm: np.ndarray
    bundles: tuple


def ingredient_profile(family: HamiltonianFamily, band: BandSelector,
                       s_values: np.ndarray,
                       policy: NumericalPolicy = DEFAULT_POLICY,
                       bundles=None) -> IngredientProfile:
    s_values = np.asarray(s_values, dtype=float)
    if bundles is None:
        bundles = bundles_along(family, s_values, band, policy)
    n = s_values.size
    gap = np.empty(n)
    m = np.empty(n)
    dh_norm = np.empty(n)
    d2h_norm = np.empty(n)
    d3h_norm = np.empty(n)
    pdot_norm = np.empty(n)
    pdot_twiddle_norm = np.empty(n)
    qpddp_norm = np.empty(n)
    qtdotp_norm = np.empty(n)
    for i, s in enumerate(s_values):
        b = bundles[i]
        pt = family.at(float(s))
        gap[i] = b.gap
        m[i] = b.m
        dh_norm[i] = spectral_norm(pt.dh)
        d2h_norm[i] = spectral_norm(pt.d2h)
        d3h_norm[i] = spectral_norm(pt.d3h)
        pdot = twiddle(pt.dh, pt.h, b, policy)
        pdot_norm[i] = spectral_norm(pdot)
        pdot_twiddle_norm[i] = spectral_norm(twiddle(pdot, pt.h, b, policy))
        pddot = projector_second_derivative(family, float(s), b, policy)
        qpddp_norm[i] = spectral_norm(b.q @ pddot @ b.p)
        qtdotp_norm[i] = spectral_norm(twiddle_derivative(family, float(s), b, policy))
    return IngredientProfile(
        s_values=s_values, gap=gap, m=m, dh_norm=dh_norm, d2h_norm=d2h_norm,
        d3h_norm=d3h_norm, h_max=np.maximum(dh_norm, np.maximum(d2h_norm, d3h_norm)),
        pdot_norm=pdot_norm, pdot_twiddle_norm=pdot_twiddle_norm,
        qpddp_norm=qpddp_norm, qtdotp_norm=qtdotp_norm, bundles=tuple(bundles))


def _tight_pieces(prof: IngredientProfile):
    rm = np.sqrt(prof.m)
    boundary = rm * prof.pdot_norm / prof.gap
    integrand = (rm * (prof.qpddp_norm + prof.pdot_norm ** 2) / prof.gap
                 + 2.0 * prof.m * prof.dh_norm * prof.pdot_norm / prof.gap ** 2)
    return boundary, integrand


def _coarse_pieces(prof: IngredientProfile):
    boundary = prof.m * prof.dh_norm / prof.gap ** 2
    integrand = (prof.m * prof.d2h_norm / prof.gap ** 2
                 + 7.0 * prof.m * np.sqrt(prof.m) * prof.dh_norm ** 2 / prof.gap ** 3)
    return boundary, integrand


def _quadrature_nodes(s: float, quadrature_points: int) -> np.ndarray:
    q = max(int(quadrature_points), 9)
    q += (-(q - 1)) % 4  # force 4k+1 so the half grid is Simpson-ready too
    return np.linspace(0.0, s, q)


def _checked_integral(values: np.ndarray, dx: float,
                      policy: NumericalPolicy) -> float:
    full = simpson(values, dx)
    half = simpson(values[::2], 2.0 * dx)
    if abs(full - half) > policy.quadrature_rel_tol * max(abs(full), 1e-30):
        raise QuadratureNotConverged(
            f"Simpson refinement disagreement {abs(full - half):.3e} "
            f"on integral of size {abs(full):.3e}")
    return full


def theorem3_bound(family: HamiltonianFamily, band: BandSelector, tau: float,
                   s: float = 1.0, quadrature_points: int = 257,
                   policy: NumericalPolicy = DEFAULT_POLICY):
    """Both bound expressions at scaled time s, plus their ingredients.

    Returns ``(a_tight, a_coarse, ingredients)`` where the tight expression
    uses computed projector-derivative norms and the coarse one replaces
    them by operator-derivative norms over gap powers.  Integrals use
    composite Simpson quadrature with a half-grid consistency check.
    """
    nodes = _quadrature_nodes(s, quadrature_points)
    prof = ingredient_profile(family, band, nodes, policy)
    bt, it = _tight_pieces(prof)
    bc, ic = _coarse_pieces(prof)
    if s == 0.0:
        int_t = int_c = 0.0
    else:
        dx = nodes[1] - nodes[0]
        int_t = _checked_integral(it, dx, policy)
        int_c = _checked_integral(ic, dx, policy)
    a_tight = (bt[0] + bt[-1] + int_t) / tau
    a_coarse = (bc[0] + bc[-1] + int_c) / tau
    ingredients = {
        "gap_0": prof.gap[0], "gap_s": prof.gap[-1],
        "m_0": prof.m[0], "m_s": prof.m[-1],
        "dh_norm_0": prof.dh_norm[0], "dh_norm_s": prof.dh_norm[-1],
        "d2h_norm_max": float(prof.d2h_norm.max()),
        "pdot_norm_0": prof.pdot_norm[0], "pdot_norm_s": prof.pdot_norm[-1],
        "pdot_twiddle_norm_s": prof.pdot_twiddle_norm[-1],
        "qpddp_norm_s": prof.qpddp_norm[-1],
        "qtdotp_norm_s": prof.qtdotp_norm[-1],
        "tight_boundary": bt[0] + bt[-1], "tight_integral": int_t,
        "coarse_boundary": bc[0] + bc[-1], "coarse_integral": int_c,
        "profile": prof,
    }
    return a_tight, a_coarse, ingredients


def theorem3_profile(family: HamiltonianFamily, band: BandSelector, tau: float,
                     s_values: np.ndarray,
                     policy: NumericalPolicy = DEFAULT_POLICY,
                     bundles=None, prof: IngredientProfile | None = None):
    """Tight and coarse bound values at every point of a uniform grid.

    One ingredient pass plus cumulative Simpson integration; equivalent to
    evaluating ``theorem3_bound`` at each grid point.
    """
    s_values = np.asarray(s_values, dtype=float)
    dx = s_values[1] - s_values[0]
    if prof is None:
        prof = ingredient_profile(family, band, s_values, policy, bundles=bundles)
    bt, it = _tight_pieces(prof)
    bc, ic = _coarse_pieces(prof)
    a_tight = (bt[0] + bt + cumulative_simpson(it, dx)) / tau
    a_coarse = (bc[0] + bc + cumulative_simpson(ic, dx)) / tau
    return a_tight, a_coarse, prof


def _theorem4_pieces(prof: IngredientProfile):
    h2g3 = prof.h_max ** 2 / prof.gap ** 3
    base = prof.m * prof.h_max / prof.gap ** 2
    ub4 = prof.h_max ** 2 / prof.gap ** 4
    h2g5 = prof.h_max ** 2 / prof.gap ** 5
    return base, ub4, h2g3, h2g5


def theorem4_bound(family: HamiltonianFamily, band: BandSelector, tau: float,
                   s: float = 1.0, c_const: float = 1.0,
                   quadrature_points: int = 257,
                   policy: NumericalPolicy = DEFAULT_POLICY) -> float:
    """Three-derivative bound with caller-supplied constant ``c_const``.

    A(s) = [m h / (tau g^2)] at 0 and s, plus (C/tau^2) times an explicit
    bracket of gap-power integrals including a nested double integral;
    h = max(||Hdot||, ||Hddot||, ||Hdddot||) pointwise.
    """
    nodes = _quadrature_nodes(s, quadrature_points)
    prof = ingredient_profile(family, band, nodes, policy)
    base, ub4, h2g3, h2g5 = _theorem4_pieces(prof)
    if s == 0.0:
        bracket = ub4[0] + ub4[-1]
    else:
        dx = nodes[1] - nodes[0]
        inner = cumulative_simpson(h2g3, dx)
        bracket = (ub4[0] + ub4[-1]
                   + (prof.h_max[0] / prof.gap[0] ** 2) * _checked_integral(h2g3, dx, policy)
                   + _checked_integral(h2g5, dx, policy)
                   + _checked_integral(h2g3 * inner, dx, policy))
    return (base[0] + base[-1]) / tau + (c_const / tau ** 2) * bracket


def theorem4_profile(family: HamiltonianFamily, band: BandSelector, tau: float,
                     s_values: np.ndarray, c_const: float = 1.0,
                     policy: NumericalPolicy = DEFAULT_POLICY,
                     prof: IngredientProfile | None = None):
    """Per-grid-point bound value plus (base, bracket) split for C fitting.

    Returns ``(a4, first_order, bracket)`` with
    a4 = first_order + (c_const/tau^2) * bracket.
    """
    s_values = np.asarray(s_values, dtype=float)
    dx = s_values[1] - s_values[0]
    if prof is None:
        prof = ingredient_profile(family, band, s_values, policy)
    base, ub4, h2g3, h2g5 = _theorem4_pieces(prof)
    inner = cumulative_simpson(h2g3, dx)
    bracket = (ub4[0] + ub4
               + (prof.h_max[0] / prof.gap[0] ** 2) * inner
               + cumulative_simpson(h2g5, dx)
               + cumulative_simpson(h2g3 * inner, dx))
    first_order = (base[0] + base) / tau
    a4 = first_order + (c_const / tau ** 2) * bracket
    return a4, first_order, bracket


def fit_theorem4_constant(measured: np.ndarray, first_order: np.ndarray,
                          bracket: np.ndarray, tau: float) -> float:
    """Smallest C >= 0 making first_order + (C/tau^2) bracket >= measured
    at every grid point."""
    extra = np.asarray(bracket, dtype=float) / tau ** 2
    mask = extra > 1e-300
    if not np.any(mask):
        return 0.0
    need = (np.asarray(measured, float) - np.asarray(first_order, float))[mask] \
        / extra[mask]
    return float(max(0.0, need.max()))


def lemma8_chain(family: HamiltonianFamily, band: BandSelector, s: float,
                 policy: NumericalPolicy = DEFAULT_POLICY,
                 bundle: ProjectorBundle | None = None) -> dict:
    """Inequality chain bounding derivative norms by gap powers.

    Returns name -> (lhs, rhs) for each link; every lhs should not exceed
    its rhs (up to 1e-8 slack, asserted by the verification suite).  Also
    records the finite-difference cross-check of ||Q Pddot P||.
    """
    pt = family.at(float(s))
    if bundle is None:
        bundle = band_projector(spectral_decompose(pt.h, policy=policy), band, policy)
    g = bundle.gap
    m = bundle.m
    rm = np.sqrt(m)
    ndh = spectral_norm(pt.dh)
    nd2h = spectral_norm(pt.d2h)
    pdot = twiddle(pt.dh, pt.h, bundle, policy)
    npdot = spectral_norm(pdot)
    nt = spectral_norm(twiddle(pdot, pt.h, bundle, policy))
    pddot = projector_second_derivative(family, float(s), bundle, policy)
    nqpp = spectral_norm(bundle.q @ pddot @ bundle.p)
    nqtd = spectral_norm(twiddle_derivative(family, float(s), bundle, policy))
    pddot_fd = projector_second_derivative_fd(family, float(s), bundle, policy)
    fd_gap = spectral_norm(bundle.q @ (pddot - pddot_fd) @ bundle.p)
    return {
        "pdot": (npdot, rm * ndh / g),
        "pdot_twiddle": (nt, rm * npdot / g),
        "pdot_twiddle_chain": (rm * npdot / g, m * ndh / g ** 2),
        "qpddotp": (nqpp, rm * nd2h / g + 4.0 * m * ndh ** 2 / g ** 2),
        "qtdotp": (nqtd, rm * nqpp / g + 2.0 * m * ndh * npdot / g ** 2),
        "qtdotp_chain": (rm * nqpp / g + 2.0 * m * ndh * npdot / g ** 2,
                         m * nd2h / g ** 2 + 6.0 * m * rm * ndh ** 2 / g ** 3),
        "qpddotp_fd_crosscheck": (fd_gap, 1e-5 * max(1.0, nqpp)),
    }


def traditional_criterion(family: HamiltonianFamily, band: BandSelector,
                          policy: NumericalPolicy = DEFAULT_POLICY,
                          points: int = 1001) -> float:
    """sup over s of ||Hdot(s)|| / g(s)^2, the classic slowness criterion."""
    s_values = np.linspace(0.0, 1.0, points)
    bundles = bundles_along(family, s_values, band, policy)
    best = 0.0
    for s, b in zip(s_values, bundles):
        best = max(best, spectral_norm(family.at(float(s)).dh) / b.gap ** 2)
    return best


# ---------------------------------------------------------------------------
# second-order expansion residual
# ---------------------------------------------------------------------------

def _chain_operators(family, s, near_bundle, policy):
    """(bundle, P, Pdot, T, Tdot, S) at s with band tracked from near_bundle."""
    pt = family.at(float(s))
    spec = spectral_decompose(pt.h, policy=policy)
    b = track_band(spec, near_bundle, policy)
    pdot = twiddle(pt.dh, pt.h, b, policy)
    t = twiddle(pdot, pt.h, b, policy)
    tdot = pdot_twiddle_derivative(family, float(s), b, policy)
    s_op = twiddle(tdot, pt.h, b, policy)
    return b, pdot, t, tdot, s_op


def expansion_residual(family: HamiltonianFamily, band: BandSelector, tau: float,
                       grid: TimeGrid | None = None,
                       policy: NumericalPolicy = DEFAULT_POLICY,
                       substeps: int | None = None,
                       wave: WaveOperatorTrace | None = None,
                       pointwise: bool = False):
    """Residual of the twice-integrated-by-parts expansion of Q0 Omega P0.

    The expansion expresses the off-diagonal block through boundary terms at
    orders 1/tau and 1/tau^2 plus single and double integrals of conjugated
    twiddle combinations; it is an exact operator identity, so the returned
    max-norm defect measures stepping and quadrature error only and must
    shrink under grid refinement.
    """
    grid = grid if grid is not None else TimeGrid.uniform(policy.grid_points)
    if wave is None:
        real = evolve_real(family, tau, grid, policy, substeps=substeps)
        adia = evolve_adiabatic(family, band, tau, grid, policy, substeps=substeps)
        wave = wave_operator(real, adia)
    omega = wave.omega
    ua = wave.adiabatic_u
    n = grid.n_points
    d = omega.shape[-1]
    bundles = bundles_along(family, grid.s_values, band, policy)
    p0 = bundles[0].p
    q0 = bundles[0].q

    tc = np.empty((n, d, d), complex)
    sc = np.empty((n, d, d), complex)
    sdc = np.empty((n, d, d), complex)
    tdc = np.empty((n, d, d), complex)
    tppd = np.empty((n, d, d), complex)
    sppd = np.empty((n, d, d), complex)
    tppdqt = np.empty((n, d, d), complex)
    fd = policy.fd_step
    for i, s in enumerate(grid.s_values):
        b = bundles[i]
        pt = family.at(float(s))
        pdot = twiddle(pt.dh, pt.h, b, policy)
        t = twiddle(pdot, pt.h, b, policy)
        tdot = pdot_twiddle_derivative(family, float(s), b, policy)
        s_op = twiddle(tdot, pt.h, b, policy)
        sp = _chain_operators(family, s + fd, b, policy)[4]
        sm = _chain_operators(family, s - fd, b, policy)[4]
        sdot = (sp - sm) / (2.0 * fd)
        u = ua[i]
        ud = u.conj().T
        tc[i] = ud @ t @ u
        sc[i] = ud @ s_op @ u
        sdc[i] = ud @ sdot @ u
        tdc[i] = ud @ tdot @ u
        tppd[i] = ud @ (t @ b.p @ pdot) @ u
        sppd[i] = ud @ (s_op @ b.p @ pdot) @ u
        tppdqt[i] = ud @ (t @ b.p @ pdot @ b.q @ t) @ u

    dx = grid.step
    lhs = np.einsum("ij,kjl,lm->kim", q0, omega, p0)
    t1 = np.einsum("ij,kjl,klm,mo->kio", q0, tc, omega, p0) \
        - (q0 @ tc[0] @ p0)[None]
    t2 = np.einsum("ij,kjl,klm,mo->kio", q0, sc, omega, p0) \
        - (q0 @ sc[0] @ p0)[None]
    cum_tppd = cumulative_simpson(np.einsum("ij,kjl->kil", q0, tppd), dx)
    t3 = np.einsum("kij,jl,lm->kim", cum_tppd, tc[0], p0)
    integrand4 = np.einsum("ij,kjl,klm,mo->kio", q0,
                           sdc @ p0[None] + sppd + tppdqt, omega, p0)
    t4 = cumulative_simpson(integrand4, dx)
    inner_ig = np.einsum("kij,kjl,lm->kim", tdc @ p0[None] + tppd, omega, p0)
    inner = cumulative_simpson(inner_ig, dx)
    outer_ig = np.einsum("ij,kjl,klm->kim", q0, tppd, inner)
    t5 = cumulative_simpson(outer_ig, dx)

    rhs = (-(1j / tau) * t1 - t2 / tau ** 2 - t3 / tau ** 2
           + t4 / tau ** 2 - t5 / tau ** 2)
    defect = np.array([spectral_norm(lhs[i] - rhs[i]) for i in range(n)])
    return defect if pointwise else float(defect.max())
