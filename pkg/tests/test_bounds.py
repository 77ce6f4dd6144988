"""Error-bound evaluators: ingredients, two bound families, chain estimates.

Frozen values for the n = 2 search path at tau = 100 were produced by an
independent pipeline (cyclic Jacobi eigensolver + Richardson differences +
501-point trapezoid); closed forms are noted where they exist.  For that
path g^2 = 1/4 + 3(s - 1/2)^2 gives int g^-3 = 4 exactly, so the coarse
integrand 7 m^(3/2) |H'|^2 / g^3 integrates to exactly 21.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adiaband import (BandSelector, DEFAULT_POLICY, TimeGrid,
                      expansion_residual, fit_theorem4_constant,
                      grover_family, ingredient_profile, lemma8_chain,
                      random_smooth_family, theorem3_bound, theorem3_profile,
                      theorem4_bound, theorem4_profile, traditional_criterion)
from adiaband.errors import QuadratureNotConverged

POL = DEFAULT_POLICY
BAND = BandSelector("lowest", 1)


def test_theorem3_bound_frozen():
    fam, _ = grover_family(2)
    a_tight, a_coarse, ing = theorem3_bound(fam, BAND, 100.0,
                                            quadrature_points=257, policy=POL)
    assert abs(a_tight - 0.12285011889624718) < 1e-4 * 0.123
    assert abs(a_coarse - 0.22732035057604313) < 1e-5 * 0.227
    # boundary pieces in closed form: |P'| = sqrt(3)/4 and g = 1 at both ends
    assert abs(ing["tight_boundary"] - np.sqrt(3.0) / 2.0) < 1e-12
    assert abs(ing["pdot_norm_0"] - np.sqrt(3.0) / 4.0) < 1e-12
    assert abs(ing["coarse_boundary"] - np.sqrt(3.0)) < 1e-12
    assert abs(ing["coarse_integral"] - 21.0) < 1e-7


def test_theorem4_bound_frozen_and_linear_in_c():
    fam, _ = grover_family(2)
    a1 = theorem4_bound(fam, BAND, 100.0, c_const=1.0,
                        quadrature_points=257, policy=POL)
    assert abs(a1 - 0.019080314451972568) < 1e-5 * 0.019
    a2 = theorem4_bound(fam, BAND, 100.0, c_const=2.0,
                        quadrature_points=257, policy=POL)
    first_order = np.sqrt(3.0) / 100.0  # m h (1/g(0)^2 + 1/g(1)^2) / tau
    assert abs((a2 - a1) - (a1 - first_order)) < 1e-14


def test_theorem3_profile_consistent_with_bound():
    fam, _ = grover_family(2)
    ss = np.linspace(0.0, 1.0, 257)
    a_tight, a_coarse, _ = theorem3_profile(fam, BAND, 100.0, ss, POL)
    assert np.all(np.diff(a_tight) >= -1e-15)
    assert np.all(np.diff(a_coarse) >= -1e-15)
    ref_t, ref_c, _ = theorem3_bound(fam, BAND, 100.0,
                                     quadrature_points=257, policy=POL)
    assert abs(a_tight[-1] - ref_t) < 1e-4 * ref_t
    assert abs(a_coarse[-1] - ref_c) < 1e-6 * ref_c


def test_theorem4_profile_consistent_with_bound():
    fam, _ = grover_family(2)
    ss = np.linspace(0.0, 1.0, 257)
    a4, first, bracket = theorem4_profile(fam, BAND, 100.0, ss, policy=POL)
    ref = theorem4_bound(fam, BAND, 100.0, quadrature_points=257, policy=POL)
    assert abs(a4[-1] - ref) < 1e-8 * ref
    assert abs(first[-1] - np.sqrt(3.0) / 100.0) < 1e-13
    assert np.all(bracket[1:] > 0.0)


@given(st.integers(0, 40))
@settings(max_examples=15)
def test_tight_bound_never_exceeds_coarse(seed):
    fam = random_smooth_family(4, seed=seed, num_harmonics=2)
    ss = np.linspace(0.0, 1.0, 65)
    a_tight, a_coarse, _ = theorem3_profile(fam, BAND, 50.0, ss, POL)
    assert np.all(a_tight <= a_coarse + 1e-12)


def test_ingredient_profile_fields():
    fam, _ = grover_family(2)
    prof = ingredient_profile(fam, BAND, np.linspace(0.0, 1.0, 17), POL)
    assert np.all(prof.gap > 0.0)
    assert np.all(prof.m == 1.0)
    assert np.abs(prof.dh_norm - np.sqrt(3.0) / 2.0).max() < 1e-12
    assert np.abs(prof.d2h_norm).max() < 1e-12  # straight-line path
    # pointwise max of the three derivative norms
    assert np.array_equal(prof.h_max,
                          np.maximum(prof.dh_norm,
                                     np.maximum(prof.d2h_norm, prof.d3h_norm)))


def test_quadrature_guard_fires_on_coarse_grids():
    fam, _ = grover_family(2)
    with pytest.raises(QuadratureNotConverged):
        theorem3_bound(fam, BAND, 100.0, quadrature_points=65, policy=POL)


def test_fit_constant_recovers_synthetic_coefficient():
    fam, _ = grover_family(2)
    ss = np.linspace(0.0, 1.0, 129)
    _, first, bracket = theorem4_profile(fam, BAND, 100.0, ss, policy=POL)
    measured = first + 3.0 * bracket / 100.0 ** 2
    assert abs(fit_theorem4_constant(measured, first, bracket, 100.0) - 3.0) < 1e-10
    # measurements below the first-order term clamp to zero
    assert fit_theorem4_constant(first * 0.5, first, bracket, 100.0) == 0.0


def test_traditional_criterion_closed_form():
    fam, _ = grover_family(3)
    got = traditional_criterion(fam, BAND, POL)
    assert abs(got - np.sqrt(1.0 - 2.0 ** -3) * 2.0 ** 3) < 1e-10


@given(st.integers(0, 60), st.sampled_from([0.1, 0.3, 0.5, 0.7, 0.9]))
@settings(max_examples=40)
def test_chain_estimates_hold(seed, s):
    fam = random_smooth_family(4, seed=seed, num_harmonics=2)
    links = lemma8_chain(fam, BAND, s, POL)
    assert len(links) == 7
    for name, (lhs, rhs) in links.items():
        assert lhs <= rhs + 1e-8, f"{name}: {lhs} > {rhs}"


def test_chain_saturates_on_search_path():
    # at the avoided crossing the first link is an equality
    red, _ = grover_family(2, representation="reduced")
    links = lemma8_chain(red, BAND, 0.5, POL)
    lhs, rhs = links["pdot"]
    assert abs(rhs - np.sqrt(3.0)) < 1e-12
    assert abs(lhs - rhs) < 1e-9


def test_expansion_residual_second_order():
    red, _ = grover_family(2, representation="reduced")
    pol = DEFAULT_POLICY.replace(step_tol=1e-8)
    res = expansion_residual(red, BAND, 8.0, grid=TimeGrid.uniform(257),
                             policy=pol)
    assert res < 1e-4
