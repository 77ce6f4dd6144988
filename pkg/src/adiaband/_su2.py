"""Compiled product kernel for two-dimensional step unitaries.

Each step factor is exp(-i theta n.sigma) = cos(theta) I - i sin(theta)
n.sigma; the caller supplies cos(theta) and sin(theta) * n componentwise,
already evaluated on the substep midpoints.  Scalar multiples of the
identity in the generator are accumulated separately as a global phase, so
they never enter the per-step loop.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def su2_chain(ct, snx, sny, snz, u00, u01, u10, u11):
    for i in range(ct.shape[0]):
        e00 = ct[i] - 1j * snz[i]
        e01 = -sny[i] - 1j * snx[i]
        e10 = sny[i] - 1j * snx[i]
        e11 = ct[i] + 1j * snz[i]
        v00 = e00 * u00 + e01 * u10
        v01 = e00 * u01 + e01 * u11
        v10 = e10 * u00 + e11 * u10
        v11 = e10 * u01 + e11 * u11
        u00, u01, u10, u11 = v00, v01, v10, v11
    return u00, u01, u10, u11
