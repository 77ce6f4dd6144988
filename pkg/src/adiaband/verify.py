"""Named identity checks over a standard fleet of small problems.

Every exact statement the package relies on is checked numerically here:
intertwining of the adiabatic propagator, the off-diagonal and commutator
properties of the twiddle map, agreement with the contour-integral form,
the triple-resolvent identity, derivative identities for P and (P')~, the
norm bound and the full inequality chain, the Volterra equation for the
wave operator, the second-order expansion residual, and bound validity
against measured data.

``verify_suite`` returns a machine-readable report; the CLI maps it to an
exit code.  The twiddle implementation is injectable so the suite can
demonstrate that a corrupted operator is caught (used by the tests).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spectral
from .bounds import expansion_residual, lemma8_chain, theorem3_profile
from .families import grover_family, random_smooth_family
from .numerics import spectral_norm
from .operators import spectral_decompose
from .policy import DEFAULT_POLICY, NumericalPolicy
from .propagators import (TimeGrid, adiabatic_diagnostics, evolve_adiabatic,
                          evolve_real, intertwining_residual,
                          volterra_residual, wave_operator)
from .schedules import linear_schedule, schedule_from_name
from .spectral import (BandSelector, ContourSpec, band_projector,
                       g_operator, g_operator_identity_rhs,
                       pdot_twiddle_derivative, track_band,
                       twiddle_contour_oracle, twiddle_derivative)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    limit: float
    detail: str = ""


@dataclass(frozen=True)
class VerifyReport:
    results: tuple

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_text(self) -> str:
        lines = []
        for r in self.results:
            status = "PASS" if r.passed else "FAIL"
            lines.append(f"{status}  {r.name:28s} value={r.value:.3e} "
                         f"limit={r.limit:.3e}  {r.detail}")
        lines.append(f"{'OK' if self.passed else 'FAILED'}: "
                     f"{sum(r.passed for r in self.results)}/{len(self.results)} "
                     "checks passed")
        return "\n".join(lines)


@dataclass
class _Member:
    label: str
    family: object
    band: BandSelector
    tau: float
    grid: TimeGrid
    real: object = None
    adia: object = None
    wave: object = None
    bundles: object = None


def _fleet(policy: NumericalPolicy):
    ground = BandSelector.lowest(1)
    g2, _ = grover_family(2, linear_schedule(), representation="full",
                          policy=policy)
    g3, _ = grover_family(3, schedule_from_name("beta:k=2"),
                          representation="reduced", policy=policy)
    r4 = random_smooth_family(4, seed=3, num_harmonics=2, policy=policy)
    r6 = random_smooth_family(6, seed=7, num_harmonics=3, policy=policy)
    grid = TimeGrid.uniform(1024)
    return [
        _Member("grover-n2-full", g2, ground, 16.0, grid),
        _Member("grover-n3-reduced", g3, ground, 16.0, grid),
        _Member("random-d4-s3", r4, ground, 16.0, grid),
        _Member("random-d6-s7", r6, BandSelector.lowest(2), 16.0, grid),
    ]


def _traces(member: _Member, policy: NumericalPolicy) -> _Member:
    if member.wave is None:
        member.real = evolve_real(member.family, member.tau, member.grid, policy)
        member.adia = evolve_adiabatic(member.family, member.band, member.tau,
                                       member.grid, policy)
        member.wave = wave_operator(member.real, member.adia)
        member.bundles = spectral.bundles_along(member.family,
                                                member.grid.s_values,
                                                member.band, policy)
    return member


def _sample_points(member: _Member, policy: NumericalPolicy, count: int = 7):
    """(s, bundle, FamilyPoint) triples on interior sample times.

    Fleet bands are count-based selectors, so each sample point selects
    independently; no path tracking is needed between distant samples.
    """
    out = []
    for s in np.linspace(0.04, 0.96, count):
        pt = member.family.at(float(s))
        spec = spectral_decompose(pt.h, policy=policy)
        out.append((float(s), band_projector(spec, member.band, policy), pt))
    return out


def _random_hermitians(dim: int, count: int, seed: int):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        yield (g + g.conj().T) / 2.0


def _check_lemma1(fleet, policy, twiddle_fn):
    worst, where = 0.0, ""
    for member in fleet:
        _traces(member, policy)
        res = intertwining_residual(member.adia, member.family, member.band,
                                    policy, bundles=member.bundles)
        if res > worst:
            worst, where = res, member.label
    return CheckResult("lemma1_intertwining", worst <= 1e-6, worst, 1e-6, where)


def _check_lemma2_offdiag(fleet, policy, twiddle_fn):
    worst, where = 0.0, ""
    for member in fleet:
        for i, (s, bundle, pt) in enumerate(_sample_points(member, policy)):
            for x in _random_hermitians(member.family.dim, 3, seed=100 + i):
                xt = twiddle_fn(x, pt.h, bundle, policy)
                blocks = max(spectral_norm(bundle.p @ xt @ bundle.p),
                             spectral_norm(bundle.q @ xt @ bundle.q))
                if blocks > worst:
                    worst, where = blocks, f"{member.label} s={s:g}"
    return CheckResult("lemma2_offdiag", worst <= 1e-9, worst, 1e-9, where)


def _check_lemma2_commutator(fleet, policy, twiddle_fn):
    worst, where = 0.0, ""
    for member in fleet:
        for i, (s, bundle, pt) in enumerate(_sample_points(member, policy)):
            for x in _random_hermitians(member.family.dim, 3, seed=200 + i):
                xt = twiddle_fn(x, pt.h, bundle, policy)
                lhs = pt.h @ xt - xt @ pt.h
                rhs = bundle.p @ x - x @ bundle.p
                res = spectral_norm(lhs - rhs)
                if res > worst:
                    worst, where = res, f"{member.label} s={s:g}"
    return CheckResult("lemma2_commutator", worst <= 1e-8, worst, 1e-8, where)


def _check_lemma5_oracle(fleet, policy, twiddle_fn):
    contour = ContourSpec(nodes=512)
    worst, where = 0.0, ""
    for member in fleet:
        for i, (s, bundle, pt) in enumerate(_sample_points(member, policy, 5)):
            for x in _random_hermitians(member.family.dim, 2, seed=300 + i):
                xt = twiddle_fn(x, pt.h, bundle, policy)
                oracle = twiddle_contour_oracle(x, pt.h, bundle, contour, policy)
                rel = spectral_norm(xt - oracle) / max(spectral_norm(oracle), 1e-30)
                if rel > worst:
                    worst, where = rel, f"{member.label} s={s:g}"
    return CheckResult("lemma5_twiddle_oracle", worst <= 1e-8, worst, 1e-8, where)


def _check_lemma5_g(fleet, policy, twiddle_fn):
    contour = ContourSpec(nodes=512)
    worst, where = 0.0, ""
    for member in fleet:
        for i, (s, bundle, pt) in enumerate(_sample_points(member, policy, 5)):
            rng_ab = list(_random_hermitians(member.family.dim, 2, seed=400 + i))
            a, b = rng_ab[0], rng_ab[1]
            lhs = g_operator(a, b, pt.h, bundle, contour, policy)
            rhs = g_operator_identity_rhs(a, b, pt.h, bundle, policy)
            rel = spectral_norm(lhs - rhs) / max(spectral_norm(rhs), 1e-30)
            if rel > worst:
                worst, where = rel, f"{member.label} s={s:g}"
    return CheckResult("lemma5_g_operator", worst <= 1e-7, worst, 1e-7, where)


def _fd_projector(member, s, bundle, policy, step=1e-3):
    def p_at(x):
        spec = spectral_decompose(member.family.at(float(x)).h, policy=policy)
        return track_band(spec, bundle, policy).p

    def d1(h):
        return (p_at(s + h) - p_at(s - h)) / (2.0 * h)

    return (4.0 * d1(step / 2.0) - d1(step)) / 3.0


def _check_lemma6_pdot(fleet, policy, twiddle_fn):
    worst, where = 0.0, ""
    for member in fleet:
        for s, bundle, pt in _sample_points(member, policy, 5):
            pdot = twiddle_fn(pt.dh, pt.h, bundle, policy)
            res = spectral_norm(pdot - _fd_projector(member, s, bundle, policy))
            if res > worst:
                worst, where = res, f"{member.label} s={s:g}"
    return CheckResult("lemma6_pdot", worst <= 1e-6, worst, 1e-6, where)


def _t_of(member, s, bundle, policy):
    pt = member.family.at(float(s))
    spec = spectral_decompose(pt.h, policy=policy)
    b = track_band(spec, bundle, policy)
    pdot = spectral.twiddle(pt.dh, pt.h, b, policy)
    return spectral.twiddle(pdot, pt.h, b, policy)


def _check_lemma6_tdot(fleet, policy, twiddle_fn):
    worst, where = 0.0, ""
    for member in fleet:
        for s, bundle, pt in _sample_points(member, policy, 5):
            tdot = pdot_twiddle_derivative(member.family, s, bundle, policy)

            def d1(h, _m=member, _s=s, _b=bundle):
                return (_t_of(_m, _s + h, _b, policy)
                        - _t_of(_m, _s - h, _b, policy)) / (2.0 * h)

            fd = (4.0 * d1(5e-4) - d1(1e-3)) / 3.0
            res = spectral_norm(tdot - fd)
            if res > worst:
                worst, where = res, f"{member.label} s={s:g}"
    return CheckResult("lemma6_tdot", worst <= 1e-6, worst, 1e-6, where)


def _check_lemma6_dgamma(fleet, policy, twiddle_fn):
    worst, where = 0.0, ""
    for member in fleet:
        for s, bundle, pt in _sample_points(member, policy, 5):
            block = twiddle_derivative(member.family, s, bundle, policy)

            def d1(h, _m=member, _s=s, _b=bundle):
                return (_t_of(_m, _s + h, _b, policy)
                        - _t_of(_m, _s - h, _b, policy)) / (2.0 * h)

            fd = (4.0 * d1(5e-4) - d1(1e-3)) / 3.0
            res = spectral_norm(block - bundle.q @ fd @ bundle.p)
            if res > worst:
                worst, where = res, f"{member.label} s={s:g}"
    return CheckResult("lemma6_dgamma", worst <= 1e-6, worst, 1e-6, where)


def _check_lemma7(fleet, policy, twiddle_fn):
    worst, where, count = 0.0, "", 0
    for member in fleet:
        for i, (s, bundle, pt) in enumerate(_sample_points(member, policy)):
            for x in _random_hermitians(member.family.dim, 5, seed=700 + i):
                count += 1
                lhs = spectral_norm(twiddle_fn(x, pt.h, bundle, policy))
                rhs = np.sqrt(bundle.m) * spectral_norm(x) / bundle.gap
                excess = lhs - rhs
                if excess > worst:
                    worst, where = excess, f"{member.label} s={s:g}"
    return CheckResult("lemma7_norm", worst <= 1e-10, worst, 1e-10,
                       f"{count} instances; worst at {where}")


def _check_lemma8(fleet, policy, twiddle_fn):
    worst, where, count = 0.0, "", 0
    for member in fleet:
        for s, bundle, pt in _sample_points(member, policy, 5):
            chain = lemma8_chain(member.family, member.band, s, policy,
                                 bundle=bundle)
            for name, (lhs, rhs) in chain.items():
                count += 1
                excess = lhs - rhs
                if excess > worst:
                    worst, where = excess, f"{member.label} s={s:g} {name}"
    return CheckResult("lemma8_chain", worst <= 1e-8, worst, 1e-8,
                       f"{count} links; worst at {where}")


def _check_volterra(fleet, policy, twiddle_fn):
    worst, where = 0.0, ""
    for member in fleet:
        _traces(member, policy)
        res = volterra_residual(member.wave, member.family, member.band,
                                policy, bundles=member.bundles)
        if res > worst:
            worst, where = res, member.label
    return CheckResult("volterra_residual", worst <= 1e-5, worst, 1e-5, where)


def _check_expansion(fleet, policy, twiddle_fn):
    worst, where = 0.0, ""
    for member in fleet:
        _traces(member, policy)
        res = expansion_residual(member.family, member.band, member.tau,
                                 member.grid, policy, wave=member.wave)
        if res > worst:
            worst, where = res, member.label
    return CheckResult("expansion_residual", worst <= 1e-4, worst, 1e-4, where)


def _check_bound_validity(fleet, policy, twiddle_fn):
    worst, where = 0.0, ""
    for member in fleet:
        _traces(member, policy)
        transition, proj = adiabatic_diagnostics(member.real, member.band,
                                                 member.family, policy,
                                                 bundles=member.bundles)
        a_tight, a_coarse, _ = theorem3_profile(
            member.family, member.band, member.tau, member.grid.s_values,
            policy, bundles=member.bundles)
        slack = max(float(np.max(proj - a_tight)),
                    float(np.max(transition - a_tight ** 2)),
                    float(np.max(a_tight - a_coarse)))
        if slack > worst:
            worst, where = slack, member.label
    return CheckResult("bound_validity", worst <= 1e-6, worst, 1e-6, where)


_CHECKS = (
    ("lemma1_intertwining", _check_lemma1),
    ("lemma2_offdiag", _check_lemma2_offdiag),
    ("lemma2_commutator", _check_lemma2_commutator),
    ("lemma5_twiddle_oracle", _check_lemma5_oracle),
    ("lemma5_g_operator", _check_lemma5_g),
    ("lemma6_pdot", _check_lemma6_pdot),
    ("lemma6_tdot", _check_lemma6_tdot),
    ("lemma6_dgamma", _check_lemma6_dgamma),
    ("lemma7_norm", _check_lemma7),
    ("lemma8_chain", _check_lemma8),
    ("volterra_residual", _check_volterra),
    ("expansion_residual", _check_expansion),
    ("bound_validity", _check_bound_validity),
)


def check_names() -> tuple:
    return tuple(name for name, _ in _CHECKS)


def verify_suite(name_filter: str | None = None, twiddle_fn=None,
                 policy: NumericalPolicy = DEFAULT_POLICY) -> VerifyReport:
    """Run all checks whose name contains ``name_filter`` (all by default)."""
    twiddle_fn = twiddle_fn if twiddle_fn is not None else spectral.twiddle
    selected = [(n, fn) for n, fn in _CHECKS
                if not name_filter or name_filter in n]
    fleet = _fleet(policy)
    results = [fn(fleet, policy, twiddle_fn) for _, fn in selected]
    return VerifyReport(results=tuple(results))
