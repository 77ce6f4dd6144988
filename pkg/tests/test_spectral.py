"""Band selection, X~ calculus, resolvents, tracking, derivative identities.

Frozen numbers in this file were produced by the contour, SVD, and
finite-difference oracles in oracles.py; see the matching test names there.
"""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles as oc
from conftest import random_hermitian
from adiaband import (BandSelector, ContourSpec, DEFAULT_POLICY,
                      band_projector, bundles_along, callable_family,
                      contour_projector, g_operator, g_operator_identity_rhs,
                      grover_family, pdot_twiddle_derivative,
                      projector_derivative, projector_second_derivative,
                      projector_second_derivative_fd, reduced_resolvent,
                      spectral_decompose, track_band, twiddle,
                      twiddle_contour_oracle, twiddle_derivative)
from adiaband.errors import (ContourTooClose, EmptyBand, GapCollapse,
                             SingularReducedOperator)

POL = DEFAULT_POLICY


def lowest_bundle(h, count=1):
    return band_projector(spectral_decompose(h, policy=POL),
                          BandSelector("lowest", count), POL)


# ---------------------------------------------------------------- selectors

def test_band_projector_lowest_two(fixture_f6):
    bun = lowest_bundle(fixture_f6["h"], 2)
    assert bun.m == 2
    assert abs(bun.gap - 1.7) < 1e-12
    assert abs(np.trace(bun.p).real - 2.0) < 1e-12
    assert np.abs(bun.p + bun.q - np.eye(6)).max() < 1e-12
    assert np.abs(bun.p @ bun.p - bun.p).max() < 1e-12


def test_window_selector(fixture_f6):
    spec = spectral_decompose(fixture_f6["h"], policy=POL)
    bun = band_projector(spec, BandSelector("window", window=(-0.1, 0.4)), POL)
    assert bun.m == 2 and abs(bun.gap - 1.7) < 1e-12


def test_window_selector_empty():
    spec = spectral_decompose(np.diag([0.0, 1.0, 2.0]), policy=POL)
    with pytest.raises(EmptyBand):
        band_projector(spec, BandSelector("window", window=(5.0, 6.0)), POL)


def test_window_endpoint_on_eigenvalue():
    spec = spectral_decompose(np.diag([0.0, 1.0]), policy=POL)
    with pytest.raises(ContourTooClose):
        band_projector(spec, BandSelector("window", window=(0.0, 0.5)), POL)


def test_indices_selector_picks_whole_clusters():
    spec = spectral_decompose(np.diag([0.0, 0.0, 1.0, 2.0]), policy=POL)
    bun = band_projector(spec, BandSelector("indices", indices=(0,)), POL)
    assert bun.m == 1  # one degenerate cluster
    assert abs(np.trace(bun.p).real - 2.0) < 1e-12
    assert abs(bun.gap - 1.0) < 1e-12


def test_whole_spectrum_band_has_infinite_gap():
    spec = spectral_decompose(np.diag([0.0, 0.0, 1.0, 2.0]), policy=POL)
    bun = band_projector(spec, BandSelector("lowest", 3), POL)
    assert bun.gap == np.inf


def test_gap_at_floor_rejected():
    spec = spectral_decompose(np.diag([0.0, 5e-13, 1.0]), cluster_tol=1e-14,
                              policy=POL)
    with pytest.raises(GapCollapse):
        band_projector(spec, BandSelector("lowest", 1), POL)


def test_contour_spec_minimum_nodes():
    with pytest.raises(ContourTooClose):
        ContourSpec(8)


# ------------------------------------------------------------- X~ calculus

def test_twiddle_two_level_analytic():
    # band {0} of diag(0, 1): denominators are -1 and +1, so X~ = -sigma_x
    h = np.diag([0.0, 1.0])
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    tw = twiddle(sx, h, lowest_bundle(h), POL)
    assert np.abs(tw - (-sx)).max() < 1e-14


def test_twiddle_frozen_values(fixture_f6):
    bun = lowest_bundle(fixture_f6["h"], 2)
    tw = twiddle(fixture_f6["x"], fixture_f6["h"], bun, POL)
    # frozen via 1024-node contour oracle
    assert abs(tw[0, 0] - 0.04923556862351445) < 1e-10
    assert abs(tw[2, 4] - (-0.11977187023822122 + 0.1157449003815349j)) < 1e-10
    assert abs(np.linalg.norm(tw, 2) - 0.5579192923740173) < 1e-10


def test_twiddle_matches_contour_oracle(fixture_f6):
    bun = lowest_bundle(fixture_f6["h"], 2)
    tw = twiddle(fixture_f6["x"], fixture_f6["h"], bun, POL)
    ref = oc.contour_twiddle(fixture_f6["x"], fixture_f6["h"],
                             center=(0.0 - 0.85 + 0.3 + 0.85) / 2.0,
                             radius=(0.3 + 1.7) / 2.0, nodes=1024)
    assert np.abs(tw - ref).max() < 1e-12
    two = twiddle_contour_oracle(fixture_f6["x"], fixture_f6["h"], bun,
                                 ContourSpec(512), POL)
    assert np.abs(tw - two).max() < 1e-12


@given(st.integers(0, 10 ** 6))
def test_twiddle_block_structure_and_commutator(fixture_f6, seed):
    h = fixture_f6["h"]
    bun = lowest_bundle(h, 2)
    x = random_hermitian(6, seed)
    tw = twiddle(x, h, bun, POL)
    p, q = bun.p, bun.q
    assert np.abs(p @ tw @ p).max() < 1e-12
    assert np.abs(q @ tw @ q).max() < 1e-12
    comm = h @ tw - tw @ h
    assert np.abs(comm - (p @ x - x @ p)).max() < 1e-11


def test_contour_projector_matches_band(fixture_f6):
    bun = lowest_bundle(fixture_f6["h"], 2)
    p = contour_projector(fixture_f6["h"], bun, ContourSpec(256), POL)
    assert np.abs(p - bun.p).max() < 1e-11


@given(st.integers(0, 10 ** 6))
def test_g_operator_identity(fixture_f6, seed):
    h = fixture_f6["h"]
    bun = lowest_bundle(h, 2)
    a = random_hermitian(6, seed)
    b = random_hermitian(6, seed + 1)
    lhs = g_operator(a, b, h, bun, ContourSpec(256), POL)
    rhs = g_operator_identity_rhs(a, b, h, bun, POL)
    assert np.abs(lhs - rhs).max() < 1e-10


# ---------------------------------------------------------------- resolvent

def test_reduced_resolvent_frozen_and_oracle(fixture_f6):
    bun = lowest_bundle(fixture_f6["h"], 2)
    rr = reduced_resolvent(fixture_f6["h"], bun, 1.15 + 0.0j, POL)
    ref = oc.svd_reduced_resolvent(fixture_f6["h"], bun.p, 1.15 + 0.0j)
    assert np.abs(rr - ref).max() < 1e-12
    # nearest complementary eigenvalue is 2.0, so the norm is 1/0.85
    assert abs(np.linalg.norm(rr, 2) - 1.0 / 0.85) < 1e-12


def test_reduced_resolvent_norm_bound_on_band(fixture_f6):
    bun = lowest_bundle(fixture_f6["h"], 2)
    for lam in (0.0, 0.3):
        rr = reduced_resolvent(fixture_f6["h"], bun, lam + 0.0j, POL)
        assert np.linalg.norm(rr, 2) <= 1.0 / bun.gap + 1e-12


def test_reduced_resolvent_rejects_spectrum_point(fixture_f6):
    bun = lowest_bundle(fixture_f6["h"], 2)
    with pytest.raises(SingularReducedOperator):
        reduced_resolvent(fixture_f6["h"], bun, 2.0 + 0.0j, POL)


# ----------------------------------------------------------------- tracking

def test_track_band_follows_rotation():
    sz = np.diag([1.0, -1.0]).astype(complex)
    sy = np.array([[0.0, -1j], [1j, 0.0]])

    def h_of(s):
        u = oc.taylor_expm(-0.5j * (0.9 * s) * sy)
        return u @ sz @ u.conj().T

    fam = callable_family(h_of, 2)
    s_values = np.linspace(0.0, 1.0, 65)
    bundles = bundles_along(fam, s_values, BandSelector("lowest", 1), POL)
    for s, bun in zip(s_values, bundles):
        u = oc.taylor_expm(-0.5j * (0.9 * s) * sy)
        want = u @ np.diag([0.0, 1.0]).astype(complex) @ u.conj().T
        assert np.abs(bun.p - want).max() < 1e-10
        assert abs(bun.gap - 2.0) < 1e-10


def test_track_band_detects_crossing():
    fam = callable_family(lambda s: np.diag([s, 0.5]).astype(complex), 2)
    with pytest.raises(GapCollapse):
        bundles_along(fam, np.linspace(0.0, 1.0, 65), BandSelector("lowest", 1), POL)


def test_track_band_requires_overlap(fixture_f6):
    # a tracked step onto an unrelated operator has no overlapping cluster
    bun = lowest_bundle(fixture_f6["h"], 2)
    far = spectral_decompose(np.diag([0.0, 10.0, 20.0, 30.0, 40.0, 50.0]),
                             policy=POL)
    with pytest.raises(GapCollapse):
        track_band(far, bun, POL)


# ------------------------------------------------- parameter derivatives

def test_projector_derivative_matches_fd():
    fam, _ = grover_family(3)
    sel = BandSelector("lowest", 1)

    def p_at(s):
        spec = spectral_decompose(fam.at(s).h, policy=POL)
        return band_projector(spec, sel, POL).p

    bun = band_projector(spectral_decompose(fam.at(0.4).h, policy=POL), sel, POL)
    pd = projector_derivative(fam, 0.4, bun, POL)
    assert np.abs(pd - oc.richardson_d1(p_at, 0.4, 1e-4)).max() < 1e-9


def test_projector_second_derivative_matches_fd():
    fam, _ = grover_family(3)
    sel = BandSelector("lowest", 1)

    def p_at(s):
        spec = spectral_decompose(fam.at(s).h, policy=POL)
        return band_projector(spec, sel, POL).p

    bun = band_projector(spectral_decompose(fam.at(0.4).h, policy=POL), sel, POL)
    pdd = projector_second_derivative(fam, 0.4, bun, POL)
    assert np.abs(pdd - oc.richardson_d2(p_at, 0.4, 1e-3)).max() < 1e-6
    pdd_fd = projector_second_derivative_fd(fam, 0.4, bun, POL)
    assert np.abs(pdd - pdd_fd).max() < 1e-6


def test_pdot_twiddle_derivative_matches_fd():
    fam, _ = grover_family(3)
    sel = BandSelector("lowest", 1)

    def t_at(s):
        spec = spectral_decompose(fam.at(s).h, policy=POL)
        bu = band_projector(spec, sel, POL)
        return twiddle(projector_derivative(fam, s, bu, POL), fam.at(s).h, bu, POL)

    bun = band_projector(spectral_decompose(fam.at(0.4).h, policy=POL), sel, POL)
    dt = pdot_twiddle_derivative(fam, 0.4, bun, POL)
    dt_fd = oc.richardson_d1(t_at, 0.4, 1e-4)
    assert np.abs(dt - dt_fd).max() < 1e-8
    # twiddle_derivative exposes the Q--P block of the same derivative
    td = twiddle_derivative(fam, 0.4, bun, POL)
    assert np.abs(td - bun.q @ dt_fd @ bun.p).max() < 1e-8
