"""Switching profiles: polynomial, bump, and gap-adapted parametrizations."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles as oc
from adiaband import (adaptive_schedule, bump_schedule, grover_gap_function,
                      linear_schedule, schedule_from_name,
                      schedule_invariant_report, smooth_switching)
from adiaband.errors import AdiabandError, ConfigError

GAP4 = grover_gap_function(4)


def test_linear_schedule_values():
    lin = linear_schedule()
    f, df, d2f, d3f = lin(0.37)
    assert (f, df, d2f, d3f) == (0.37, 1.0, 0.0, 0.0)
    assert lin.kind == "linear"


def test_smooth_switching_k2_closed_form():
    b2 = smooth_switching(2)
    s = 0.3
    f, df, d2f, d3f = b2(s)
    assert abs(f - (3 * s ** 2 - 2 * s ** 3)) < 1e-15
    assert abs(df - (6 * s - 6 * s ** 2)) < 1e-15
    assert abs(d2f - (6 - 12 * s)) < 1e-13
    assert abs(d3f - (-12.0)) < 1e-12


def test_smooth_switching_k3_frozen_value():
    # 30 * (s^3/3 - s^4/2 + s^5/5) at s = 0.3 is exactly 0.16308
    assert abs(smooth_switching(3)(0.3)[0] - 0.16308) < 1e-14


def test_smooth_switching_flat_endpoints():
    for k in (2, 3, 4):
        b = smooth_switching(k)
        for s in (0.0, 1.0):
            out = b(s)
            # derivatives 1..k-1 vanish at the endpoints
            for order in range(1, k):
                assert abs(out[order]) < 1e-12


def test_smooth_switching_order_validation():
    with pytest.raises(ConfigError):
        smooth_switching(1)


@given(st.integers(2, 6))
def test_smooth_switching_invariants(k):
    b = smooth_switching(k)
    rep = schedule_invariant_report(b)
    assert rep["endpoints_ok"] and rep["monotone_ok"]
    assert abs(b(0.5)[0] - 0.5) < 1e-13  # odd symmetry about the midpoint
    x = np.linspace(0.0, 1.0, 513)
    assert abs(oc.dense_trapezoid(lambda t: b(np.asarray(t))[1], 0, 1, 20001) - 1.0) < 1e-8


def test_bump_frozen_value_and_symmetry():
    b = bump_schedule()
    # frozen via 4e6-point trapezoid of exp(-1/(s(1-s)))
    assert abs(b(0.3)[0] - 0.07906490649818051) < 1e-10
    assert abs(b(0.5)[0] - 0.5) < 1e-12
    assert abs(b(0.7)[0] - (1.0 - 0.07906490649818051)) < 1e-10


def test_bump_flat_to_all_orders_at_ends():
    b = bump_schedule()
    for s in (0.0, 1.0):
        _, df, d2f, d3f = b(s)
        assert abs(df) < 1e-14 and abs(d2f) < 1e-14 and abs(d3f) < 1e-14


def test_bump_derivative_consistency():
    b = bump_schedule()
    ss = np.linspace(0.05, 0.95, 7)
    _, df, d2f, _ = b(ss)
    eps = 1e-5
    fd = (b(ss + eps)[1] - b(ss - eps)[1]) / (2 * eps)
    assert np.abs(fd - d2f).max() < 1e-6
    fd1 = (b(ss + eps)[0] - b(ss - eps)[0]) / (2 * eps)
    assert np.abs(fd1 - df).max() < 1e-6


def test_adaptive_frozen_normalization():
    ad = adaptive_schedule(GAP4, 1.5)
    # slope at 0 equals the normalizing constant int_0^1 g(f)^(-3/2) df,
    # frozen via 4e6-point trapezoid
    assert abs(ad(0.0)[1] - 3.3372488823522417) < 1e-8
    assert abs(ad(0.5)[0] - 0.5) < 1e-9
    assert abs(ad(0.0)[0]) < 1e-12 and abs(ad(1.0)[0] - 1.0) < 1e-9


def test_adaptive_slope_proportional_to_gap_power():
    ad = adaptive_schedule(GAP4, 1.5)
    ss = np.linspace(0.05, 0.95, 9)
    f, df, d2f, _ = ad(ss)
    ratio = df / np.array([GAP4(x) for x in f]) ** 1.5
    assert ratio.max() / ratio.min() - 1.0 < 1e-9
    eps = 1e-5
    fd = (ad(ss + eps)[1] - ad(ss - eps)[1]) / (2 * eps)
    assert np.abs(fd - d2f).max() < 1e-6


def test_adaptive_monotone_report():
    rep = schedule_invariant_report(adaptive_schedule(GAP4, 1.8))
    assert rep["endpoints_ok"] and rep["monotone_ok"]
    assert rep["min_increment"] > 0.0


def test_adaptive_grid_validation():
    with pytest.raises(ConfigError):
        adaptive_schedule(GAP4, 1.5, grid_points=5)


def test_adaptive_exponent_range():
    with pytest.raises(ConfigError):
        adaptive_schedule(GAP4, 2.5)


def test_adaptive_rejects_wild_gap():
    with pytest.raises(AdiabandError):
        adaptive_schedule(lambda x: 1.0 if x < 0.8 else 1e-3, 1.9)


def test_schedule_from_name():
    assert schedule_from_name("linear").kind == "linear"
    assert schedule_from_name("bump").kind == "bump"
    assert schedule_from_name("beta:k=2").kind == "beta:k=2"
    ad = schedule_from_name("adaptive:p=1.5", gapfn=GAP4)
    assert ad.kind == "adaptive:p=1.5"


def test_schedule_from_name_rejects_malformed():
    for bad in ("quadratic", "beta:k=x", "beta", "adaptive:p="):
        with pytest.raises(ConfigError):
            schedule_from_name(bad)
    with pytest.raises(ConfigError):
        schedule_from_name("adaptive:p=1.5")  # needs a gap function
