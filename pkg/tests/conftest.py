"""Shared fixtures: deterministic operator fixtures reused across test files."""

import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "suite", deadline=None, max_examples=25, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("suite")


def random_hermitian(dim, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (a + a.conj().T) / 2.0


@pytest.fixture(scope="session")
def fixture_f6():
    """6-dim operator with eigenvalues {0, 0.3, 2, 2.5, 3, 3.5}.

    The lowest two levels form a band separated by a 1.7 gap.  Also carries
    a fixed real symmetric observable for X~ checks.
    """
    rng = np.random.default_rng(0)
    g = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    v = np.linalg.qr(g)[0]
    lam = np.array([0.0, 0.3, 2.0, 2.5, 3.0, 3.5])
    h = (v * lam) @ v.conj().T
    rngx = np.random.default_rng(1)
    x = rngx.standard_normal((6, 6))
    return {"h": h, "x": (x + x.T) / 2.0, "lam": lam, "v": v}
