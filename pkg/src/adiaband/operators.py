"""Dense operator types and the spectral primitives everything else builds on.

The wrapper classes are thin: they validate their defining property once at
construction and otherwise behave like the underlying numpy array (they
support ``np.asarray``).  Hot loops elsewhere in the package work on raw
arrays and only wrap at API boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConvergenceFailure, DimensionMismatch, NonHermitianInput
from .numerics import spectral_norm
from .policy import DEFAULT_POLICY, NumericalPolicy


def _as_matrix(x) -> np.ndarray:
    m = np.asarray(getattr(x, "matrix", x), dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DimensionMismatch("matrix contains non-finite entries")
    return m


@dataclass(frozen=True)
class Operator:
    """A finite-dimensional linear operator stored as a dense complex matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _as_matrix(self.matrix))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is not None:
            return self.matrix.astype(dtype)
        return self.matrix

    def dagger(self) -> "Operator":
        return Operator(self.matrix.conj().T)


@dataclass(frozen=True)
class HermitianOperator(Operator):
    """Operator validated to be Hermitian within the policy tolerance."""

    policy: NumericalPolicy = field(default=DEFAULT_POLICY, compare=False)

    def __post_init__(self):
        super().__post_init__()
        m = self.matrix
        scale = max(1.0, float(np.abs(m).max()) if m.size else 1.0)
        defect = float(np.abs(m - m.conj().T).max()) if m.size else 0.0
        if defect > self.policy.hermiticity_tol * scale:
            raise NonHermitianInput(
                f"max |A - A^dag| = {defect:.3e} exceeds tolerance "
                f"{self.policy.hermiticity_tol * scale:.3e}")
        # store the symmetrized matrix so downstream eigensolves are exact
        object.__setattr__(self, "matrix", (m + m.conj().T) / 2.0)


@dataclass(frozen=True)
class UnitaryOperator(Operator):
    """Operator validated to be unitary within the policy tolerance."""

    policy: NumericalPolicy = field(default=DEFAULT_POLICY, compare=False)

    def __post_init__(self):
        super().__post_init__()
        m = self.matrix
        defect = spectral_norm(m.conj().T @ m - np.eye(m.shape[0]))
        if defect > self.policy.unitarity_tol:
            raise NonHermitianInput(
                f"||U^dag U - 1|| = {defect:.3e} exceeds tolerance "
                f"{self.policy.unitarity_tol:.3e}")


@dataclass(frozen=True)
class SpectralData:
    """Eigendecomposition with eigenvalues grouped into degenerate clusters.

    Attributes
    ----------
    eigenvalues:
        Ascending real eigenvalues, one entry per dimension.
    eigenvectors:
        Orthonormal columns matching ``eigenvalues``.
    clusters:
        Partition of eigenvalue indices into maximal groups whose internal
        spacing never exceeds the clustering tolerance.
    cluster_projectors:
        Orthogonal projector onto each cluster's eigenspace.
    cluster_means:
        Mean eigenvalue of each cluster, used as the cluster's nominal value.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    clusters: tuple
    cluster_projectors: tuple
    cluster_means: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]


def operator_norm(a) -> float:
    """Operator (spectral) norm: the largest singular value.

    Computed as the square root of the top eigenvalue of ``A^dag A``.
    """
    return spectral_norm(_as_matrix(a))


def commutator(a, b) -> Operator:
    """Commutator ``[A, B] = AB - BA``."""
    ma, mb = _as_matrix(a), _as_matrix(b)
    if ma.shape != mb.shape:
        raise DimensionMismatch(f"operand shapes differ: {ma.shape} vs {mb.shape}")
    return Operator(ma @ mb - mb @ ma)


def unitary_exp(a, t: float, policy: NumericalPolicy = DEFAULT_POLICY) -> UnitaryOperator:
    """``exp(-i t A)`` for Hermitian ``A``, exactly unitary by construction."""
    h = HermitianOperator(_as_matrix(a), policy=policy)
    w, v = _eigh(h.matrix)
    u = (v * np.exp(-1j * t * w)) @ v.conj().T
    return UnitaryOperator(u, policy=policy)


def _eigh(m: np.ndarray):
    try:
        return np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - rare LAPACK failure
        raise ConvergenceFailure(f"eigensolver failed: {exc}") from exc


def cluster_indices(eigenvalues: np.ndarray, tol: float) -> list[np.ndarray]:
    """Split ascending eigenvalues into maximal clusters with spacing <= tol."""
    n = eigenvalues.shape[0]
    if n == 0:
        return []
    breaks = np.nonzero(np.diff(eigenvalues) > tol)[0]
    starts = np.concatenate([[0], breaks + 1])
    stops = np.concatenate([breaks + 1, [n]])
    return [np.arange(a, b) for a, b in zip(starts, stops)]


def spectral_decompose(a, cluster_tol: float | None = None,
                       policy: NumericalPolicy = DEFAULT_POLICY) -> SpectralData:
    """Eigendecomposition of a Hermitian operator with degeneracy clustering.

    Parameters
    ----------
    a:
        Hermitian matrix (validated).
    cluster_tol:
        Absolute clustering threshold.  Defaults to
        ``policy.cluster_tol_rel * max(1, ||A||)``.

    Returns
    -------
    SpectralData
        Ascending eigenvalues, orthonormal eigenvectors, and the cluster
        partition with per-cluster projectors.
    """
    h = HermitianOperator(_as_matrix(a), policy=policy)
    w, v = _eigh(h.matrix)
    if cluster_tol is None:
        cluster_tol = policy.cluster_tol_rel * max(1.0, spectral_norm(h.matrix))
    groups = cluster_indices(w, cluster_tol)
    projectors = tuple(v[:, g] @ v[:, g].conj().T for g in groups)
    means = np.array([w[g].mean() for g in groups])
    return SpectralData(eigenvalues=w, eigenvectors=v, clusters=tuple(groups),
                        cluster_projectors=projectors, cluster_means=means)


def reconstruct(spec: SpectralData) -> np.ndarray:
    """Rebuild the operator from its spectral data (diagnostic helper)."""
    v, w = spec.eigenvectors, spec.eigenvalues
    return (v * w) @ v.conj().T
