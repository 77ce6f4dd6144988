"""Central numerical policy.

All tolerances, floors, and resolution defaults live in one frozen record that
is passed explicitly to every routine that needs one.  Nothing in the package
reads a module-level mutable tolerance.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class NumericalPolicy:
    """Tolerances and resolution knobs shared across the package.

    Attributes
    ----------
    hermiticity_tol:
        Max-entry deviation of ``A - A^dag`` allowed for Hermitian input,
        scaled by ``max(1, max|A|)``.
    unitarity_tol:
        Operator-norm deviation of ``U^dag U`` from the identity allowed for
        any stored propagator value.
    cluster_tol_rel:
        Eigenvalues closer than ``cluster_tol_rel * max(1, ||A||)`` are merged
        into one degenerate cluster.
    projector_tol:
        Tolerance for projector algebra checks (idempotency, completeness).
    gap_floor:
        Smallest spectral gap treated as nonzero; below this the band is
        considered collapsed.
    contour_nodes:
        Default trapezoid node count for contour quadrature.
    fd_step:
        Step for first-order central finite differences.
    fd_second_step:
        Step for second-difference stencils of projector paths.
    step_tol:
        Propagator self-convergence target: halving the substep must change
        the final unitary by at most this much in operator norm.
    step_limit:
        Cap on total propagator substeps during refinement.
    grid_points:
        Default number of time-grid points.
    ode_steps:
        Fixed step count for schedule ODE integration.
    quadrature_rel_tol:
        Relative change allowed when a bound quadrature doubles its nodes.
    normalization_tol:
        Allowed miss of f(1) = 1 for integrated schedules before rescaling is
        refused.
    """

    hermiticity_tol: float = 1e-12
    unitarity_tol: float = 1e-10
    cluster_tol_rel: float = 1e-8
    projector_tol: float = 1e-10
    gap_floor: float = 1e-12
    contour_nodes: int = 128
    fd_step: float = 1e-5
    fd_second_step: float = 1e-3
    step_tol: float = 1e-6
    step_limit: int = 2 ** 20
    grid_points: int = 1024
    ode_steps: int = 10_000
    quadrature_rel_tol: float = 1e-6
    normalization_tol: float = 1e-6

    def replace(self, **changes) -> "NumericalPolicy":
        return dataclasses.replace(self, **changes)


DEFAULT_POLICY = NumericalPolicy()
