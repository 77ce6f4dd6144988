"""Hamiltonian path constructors: search problem, random instances, wrappers."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles as oc
from adiaband import (callable_family, grover_family, grover_gap_function,
                      interpolating_family, linear_schedule, operator_norm,
                      random_smooth_family, reparametrized_family,
                      smooth_switching, three_term_family)
from adiaband.errors import (ConfigError, DimensionMismatch,
                             DimensionTooLarge, EndpointViolation,
                             NonHermitianInput)
from adiaband.schedules import polynomial_schedule


# ------------------------------------------------------------------ search

def test_grover_endpoint_distance():
    fam, _ = grover_family(2)
    assert fam.dim == 4
    # || H1 - H0 || = sqrt(1 - 2^-n), constant along the path
    for s in (0.0, 0.5, 1.0):
        assert abs(operator_norm(fam.at(s).dh) - np.sqrt(3.0) / 2.0) < 1e-12


def test_grover_gap_function_closed_form():
    g = grover_gap_function(3)
    eps = 2.0 ** -3
    for x in (0.0, 0.25, 0.5, 0.9):
        want = np.sqrt(eps + 4.0 * (1.0 - eps) * (x - 0.5) ** 2)
        assert abs(g(x) - want) < 1e-14
    assert abs(g(0.5) - 2.0 ** -1.5) < 1e-15


def test_grover_gap_matches_spectrum():
    fam, gap = grover_family(3)
    for s in np.linspace(0.0, 1.0, 9):
        w, _ = oc.jacobi_eigh(fam.at(s).h)
        assert abs((w[1] - w[0]) - gap(s)) < 1e-10


def test_grover_reduced_matches_full():
    full, _ = grover_family(3)
    red, _ = grover_family(3, representation="reduced")
    assert red.dim == 2
    for s in (0.1, 0.37, 0.5, 0.81):
        wf, _ = oc.jacobi_eigh(full.at(s).h)
        wr, _ = oc.jacobi_eigh(red.at(s).h)
        assert abs((wf[1] - wf[0]) - (wr[1] - wr[0])) < 1e-12
        assert abs(operator_norm(full.at(s).dh) - operator_norm(red.at(s).dh)) < 1e-12


def test_grover_reduced_midpoint_spectrum():
    red, _ = grover_family(2, representation="reduced")
    w, _ = oc.jacobi_eigh(red.at(0.5).h)
    # levels (1 -+ g)/2 with g = 1/2
    assert np.abs(w - np.array([0.25, 0.75])).max() < 1e-13


def test_grover_marked_string_symmetry():
    base, _ = grover_family(2)
    other, _ = grover_family(2, marked="10")
    for s in (0.3, 0.7):
        w0, _ = oc.jacobi_eigh(base.at(s).h)
        w1, _ = oc.jacobi_eigh(other.at(s).h)
        assert np.abs(w0 - w1).max() < 1e-12


def test_grover_validation():
    with pytest.raises(ConfigError):
        grover_family(0)
    with pytest.raises(ConfigError):
        grover_family(2, marked="2x")
    with pytest.raises(DimensionTooLarge):
        grover_family(13)
    with pytest.raises(DimensionTooLarge):
        grover_family(41, representation="reduced")
    grover_family(13, representation="reduced")  # fine: 2x2 path


# ------------------------------------------------------------------ random

def test_random_family_deterministic():
    a = random_smooth_family(4, seed=3, num_harmonics=2)
    b = random_smooth_family(4, seed=3, num_harmonics=2)
    for s in (0.0, 0.37, 1.0):
        assert np.array_equal(a.at(s).h, b.at(s).h)
    c = random_smooth_family(4, seed=4, num_harmonics=2)
    assert np.abs(a.at(0.37).h - c.at(0.37).h).max() > 1e-3


@given(st.integers(0, 50), st.sampled_from([3, 4, 6]))
def test_random_family_well_gapped_and_bounded(seed, dim):
    fam = random_smooth_family(dim, seed=seed, num_harmonics=2)
    for s in np.linspace(0.0, 1.0, 17):
        h = fam.at(s).h
        assert np.abs(h - h.conj().T).max() < 1e-14
        w, _ = oc.jacobi_eigh(h)
        assert w[-1] - w[0] <= 1.0 + 1e-10
        assert np.diff(w).min() > 0.05


@given(st.integers(0, 50))
def test_random_family_derivative_consistency(seed):
    fam = random_smooth_family(4, seed=seed, num_harmonics=3)
    pt = fam.at(0.43)
    h_at = lambda s: fam.at(s).h
    d2h_at = lambda s: fam.at(s).d2h
    assert np.abs(pt.dh - oc.richardson_d1(h_at, 0.43, 1e-4)).max() < 1e-9
    assert np.abs(pt.d2h - oc.richardson_d2(h_at, 0.43, 1e-3)).max() < 1e-7
    assert np.abs(pt.d3h - oc.richardson_d1(d2h_at, 0.43, 1e-4)).max() < 1e-8


def test_h_many_matches_pointwise():
    fam = random_smooth_family(4, seed=1, num_harmonics=2)
    ss = np.array([0.1, 0.43, 0.9])
    stack = fam.h_many(ss)
    for k, s in enumerate(ss):
        assert np.array_equal(stack[k], fam.at(s).h)


# ---------------------------------------------------------------- wrappers

def test_interpolating_family_form():
    h0 = np.diag([0.0, 1.0])
    h1 = np.array([[0.5, 0.25], [0.25, 0.5]])
    b2 = smooth_switching(2)
    fam = interpolating_family(h0, h1, b2)
    s = 0.3
    f, df, d2f, _ = b2(s)
    assert np.abs(fam.at(s).h - ((1 - f) * h0 + f * h1)).max() < 1e-14
    assert np.abs(fam.at(s).dh - df * (h1 - h0)).max() < 1e-14
    assert np.abs(fam.at(s).d2h - d2f * (h1 - h0)).max() < 1e-14


def test_interpolating_family_validation():
    with pytest.raises(NonHermitianInput):
        interpolating_family(np.array([[0.0, 1.0], [0.0, 0.0]]), np.eye(2),
                             linear_schedule())
    with pytest.raises(DimensionMismatch):
        interpolating_family(np.eye(3), np.eye(2), linear_schedule())


def test_three_term_family_form():
    h0 = np.diag([0.0, 1.0])
    h1 = np.diag([1.0, 0.0])
    h2 = np.array([[0.0, 1.0], [1.0, 0.0]])
    k = polynomial_schedule([0.0, 1.0, -1.0])  # s(1-s), vanishes at ends
    fam = three_term_family(h0, h1, h2, smooth_switching(2), k)
    s = 0.3
    f = smooth_switching(2)(s)[0]
    want = h0 + f * (h1 - h0) + 0.21 * h2
    assert np.abs(fam.at(s).h - want).max() < 1e-14
    fd = oc.richardson_d1(lambda x: fam.at(x).h, s, 1e-4)
    assert np.abs(fam.at(s).dh - fd).max() < 1e-10


def test_three_term_weight_must_vanish():
    h = np.eye(2)
    with pytest.raises(EndpointViolation):
        three_term_family(h, h, h, smooth_switching(2), linear_schedule())


def test_callable_family_fd_derivatives():
    sz = np.diag([1.0, -1.0]).astype(complex)
    sx = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    fam = callable_family(lambda s: np.cos(s) * sz + np.sin(s) * sx, 2)
    pt = fam.at(0.6)
    want_dh = -np.sin(0.6) * sz + np.cos(0.6) * sx
    assert np.abs(pt.dh - want_dh).max() < 1e-10
    assert np.abs(pt.d2h - (-(np.cos(0.6) * sz + np.sin(0.6) * sx))).max() < 1e-6
    assert np.abs(pt.d3h - (-want_dh)).max() < 5e-3


def test_reparametrized_family_equals_direct_schedule():
    b2 = smooth_switching(2)
    rep = reparametrized_family(grover_family(2)[0], b2)
    direct, _ = grover_family(2, schedule=b2)
    for s in (0.0, 0.21, 0.5, 0.77, 1.0):
        a, b = rep.at(s), direct.at(s)
        assert np.abs(a.h - b.h).max() < 1e-14
        assert np.abs(a.dh - b.dh).max() < 1e-14
        assert np.abs(a.d2h - b.d2h).max() < 1e-14
        assert np.abs(a.d3h - b.d3h).max() < 1e-14


def test_reparametrized_family_chain_rule_vs_fd():
    base = random_smooth_family(4, seed=7, num_harmonics=2)
    fam = reparametrized_family(base, smooth_switching(3))
    s = 0.37
    h_at = lambda x: fam.at(x).h
    d2h_at = lambda x: fam.at(x).d2h
    assert np.abs(fam.at(s).dh - oc.richardson_d1(h_at, s, 1e-4)).max() < 1e-8
    assert np.abs(fam.at(s).d2h - oc.richardson_d2(h_at, s, 1e-3)).max() < 1e-6
    assert np.abs(fam.at(s).d3h - oc.richardson_d1(d2h_at, s, 1e-4)).max() < 1e-6


def test_reparametrized_linear_is_identity():
    base = random_smooth_family(4, seed=7, num_harmonics=2)
    assert reparametrized_family(base, linear_schedule()) is base
