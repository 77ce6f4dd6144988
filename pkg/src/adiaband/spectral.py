"""Band projectors, reduced resolvents, and the off-diagonal map X~.

The central object is the :class:`ProjectorBundle` for a selected band of
eigenvalue clusters: the band projector P, its complement Q, the per-cluster
projectors, multiplicity, and the gap separating the band from the rest of
the spectrum.

On top of the bundle this module implements the map

    X~ = -(sum over band clusters j) [ P_j X Rhat(lam_j) + Rhat(lam_j) X P_j ]

where ``Rhat(z)`` is the resolvent reduced to the complement of the band.
X~ is block off-diagonal (P X~ P = Q X~ Q = 0) and satisfies
``[H, X~] = P X - X P``; it is the workhorse of every derivative identity and
error bound in the package.  An independent contour-quadrature evaluation of
the same map is provided as an oracle for testing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (ContourTooClose, DimensionMismatch, EmptyBand, GapCollapse,
                     SingularReducedOperator)
from .numerics import spectral_norm
from .operators import SpectralData, _as_matrix, spectral_decompose
from .policy import DEFAULT_POLICY, NumericalPolicy


@dataclass(frozen=True)
class BandSelector:
    """How to pick the band of eigenvalue clusters at the initial time.

    Three modes:

    - ``lowest``: the ``count`` lowest clusters;
    - ``indices``: explicit cluster indices into the sorted cluster list;
    - ``window``: every cluster whose eigenvalues lie inside ``(lo, hi)``.
    """

    mode: str
    count: int = 1
    indices: tuple = ()
    window: tuple = (0.0, 0.0)

    @classmethod
    def lowest(cls, count: int = 1) -> "BandSelector":
        return cls(mode="lowest", count=count)

    @classmethod
    def by_indices(cls, indices: Sequence[int]) -> "BandSelector":
        return cls(mode="indices", indices=tuple(int(i) for i in indices))

    @classmethod
    def by_window(cls, lo: float, hi: float) -> "BandSelector":
        return cls(mode="window", window=(float(lo), float(hi)))


@dataclass(frozen=True)
class ProjectorBundle:
    """Band projector data at one parameter value.

    Attributes
    ----------
    p, q:
        Band projector and its complement, ``p + q = 1``.
    clusters:
        Tuple of ``(lambda_j, P_j)`` pairs for the clusters inside the band.
    m:
        Number of clusters in the band (count of distinct band eigenvalues).
    gap:
        Distance from the band eigenvalues to the rest of the spectrum.
    spectral:
        Full spectral data of the generating operator; kept so resolvent and
        X~ evaluations reuse one eigendecomposition.
    band_cluster_ids:
        Indices into ``spectral.clusters`` that form the band.
    """

    p: np.ndarray
    q: np.ndarray
    clusters: tuple
    m: int
    gap: float
    spectral: SpectralData = field(repr=False)
    band_cluster_ids: tuple = ()

    @property
    def rank(self) -> int:
        return int(round(np.trace(self.p).real))

    def eigen_band_mask(self) -> np.ndarray:
        mask = np.zeros(self.spectral.dim, dtype=bool)
        for cid in self.band_cluster_ids:
            mask[self.spectral.clusters[cid]] = True
        return mask

    def band_lambda_per_index(self) -> np.ndarray:
        """Cluster nominal value for each in-band eigenvalue index."""
        lam = np.zeros(self.spectral.dim)
        for cid in self.band_cluster_ids:
            lam[self.spectral.clusters[cid]] = self.spectral.cluster_means[cid]
        return lam


@dataclass(frozen=True)
class ContourSpec:
    """Circle contour around the band for quadrature-based evaluations.

    The circle is centered at the midpoint of the band's eigenvalue range and
    its radius reaches halfway into the gap on each side.
    """

    nodes: int = 128
    shape: str = "circle"

    def __post_init__(self):
        if self.nodes < 16:
            raise ContourTooClose("contour quadrature needs at least 16 nodes")
        if self.shape != "circle":
            raise ContourTooClose(f"unsupported contour shape: {self.shape!r}")


def _select_cluster_ids(spec: SpectralData, band: BandSelector,
                        policy: NumericalPolicy) -> tuple:
    n_clusters = len(spec.clusters)
    if band.mode == "lowest":
        if band.count < 1 or band.count > n_clusters:
            raise EmptyBand(f"cannot take {band.count} lowest of {n_clusters} clusters")
        return tuple(range(band.count))
    if band.mode == "indices":
        ids = tuple(sorted(set(band.indices)))
        if not ids:
            raise EmptyBand("empty cluster index selection")
        if ids[0] < 0 or ids[-1] >= n_clusters:
            raise EmptyBand(f"cluster index out of range 0..{n_clusters - 1}: {ids}")
        return ids
    if band.mode == "window":
        lo, hi = band.window
        if not np.all((np.abs(spec.eigenvalues - lo) > policy.gap_floor)
                      & (np.abs(spec.eigenvalues - hi) > policy.gap_floor)):
            raise ContourTooClose("window endpoint touches an eigenvalue")
        ids = []
        for cid, idx in enumerate(spec.clusters):
            vals = spec.eigenvalues[idx]
            inside = (vals > lo) & (vals < hi)
            if inside.all():
                ids.append(cid)
            elif inside.any():
                raise EmptyBand("window splits a degenerate cluster")
        if not ids:
            raise EmptyBand(f"no eigenvalue cluster inside window ({lo}, {hi})")
        return tuple(ids)
    raise EmptyBand(f"unknown band selector mode: {band.mode!r}")


def band_projector(spec: SpectralData, band: BandSelector,
                   policy: NumericalPolicy = DEFAULT_POLICY) -> ProjectorBundle:
    """Build the projector bundle for the selected band.

    Raises
    ------
    EmptyBand
        If the selection matches nothing or splits a cluster.
    GapCollapse
        If the distance from the band to the remaining spectrum is at or
        below the policy gap floor.
    """
    ids = _select_cluster_ids(spec, band, policy)
    return _bundle_from_ids(spec, ids, policy)


def _bundle_from_ids(spec: SpectralData, ids: tuple,
                     policy: NumericalPolicy) -> ProjectorBundle:
    in_band = np.zeros(len(spec.clusters), dtype=bool)
    in_band[list(ids)] = True
    band_vals = spec.cluster_means[in_band]
    rest_mask = np.ones(spec.dim, dtype=bool)
    for cid in ids:
        rest_mask[spec.clusters[cid]] = False
    rest = spec.eigenvalues[rest_mask]
    if rest.size == 0:
        gap = np.inf
    else:
        gap = float(np.min(np.abs(rest[None, :] - band_vals[:, None])))
    if gap <= policy.gap_floor:
        raise GapCollapse(f"band gap {gap:.3e} at or below floor {policy.gap_floor:.3e}")
    p = np.zeros((spec.dim, spec.dim), dtype=complex)
    for cid in ids:
        p = p + spec.cluster_projectors[cid]
    q = np.eye(spec.dim) - p
    clusters = tuple((float(spec.cluster_means[cid]), spec.cluster_projectors[cid])
                     for cid in ids)
    return ProjectorBundle(p=p, q=q, clusters=clusters, m=len(ids), gap=gap,
                           spectral=spec, band_cluster_ids=tuple(ids))


def track_band(spec: SpectralData, previous: ProjectorBundle,
               policy: NumericalPolicy = DEFAULT_POLICY) -> ProjectorBundle:
    """Continue a band to new spectral data by projector overlap.

    A cluster of the new decomposition joins the band when more than half of
    its weight overlaps the previous band projector.  The successor is
    accepted only when the total overlap trace stays within 1/4 of the band
    rank, which bounds the projector motion between samples.
    """
    rank_prev = previous.rank
    ids = []
    for cid, pj in enumerate(spec.cluster_projectors):
        size = spec.clusters[cid].shape[0]
        overlap = float(np.einsum("ij,ji->", pj, previous.p).real)
        if overlap > 0.5 * size:
            ids.append(cid)
    if not ids:
        raise GapCollapse("band lost during tracking: no overlapping cluster")
    bundle = _bundle_from_ids(spec, tuple(ids), policy)
    total = float(np.einsum("ij,ji->", bundle.p, previous.p).real)
    if bundle.rank != rank_prev or total < rank_prev - 0.25:
        raise GapCollapse(
            f"band continuity violated: overlap {total:.6f} of rank {rank_prev}")
    return bundle


def reduced_resolvent(h, bundle: ProjectorBundle, z: complex,
                      policy: NumericalPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Resolvent of H restricted to the band complement, ``Q [(H - z)|_Q]^-1 Q``.

    ``z`` must stay at least the gap floor away from the complementary
    spectrum.  On the band's own eigenvalues this is the standard reduced
    resolvent with norm at most ``1/gap``.
    """
    spec = bundle.spectral
    mask = bundle.eigen_band_mask()
    w = spec.eigenvalues[~mask]
    if np.any(np.abs(w - z) <= policy.gap_floor):
        raise SingularReducedOperator(
            f"z = {z} within gap floor of the complementary spectrum")
    v = spec.eigenvectors[:, ~mask]
    return (v / (w - z)) @ v.conj().T


def twiddle(x, h, bundle: ProjectorBundle,
            policy: NumericalPolicy = DEFAULT_POLICY) -> np.ndarray:
    """The block off-diagonal map X~ for the bundle's band.

    Evaluates ``-(sum_j) [P_j X Rhat(lam_j) + Rhat(lam_j) X P_j]`` in the
    eigenbasis carried by the bundle.  The result annihilates both diagonal
    blocks and satisfies ``[H, X~] = PX - XP``.
    """
    xm = _as_matrix(x)
    spec = bundle.spectral
    if xm.shape[0] != spec.dim:
        raise DimensionMismatch(f"operand dim {xm.shape[0]} != bundle dim {spec.dim}")
    v = spec.eigenvectors
    y = v.conj().T @ xm @ v
    mask = bundle.eigen_band_mask()
    band_idx = np.nonzero(mask)[0]
    comp_idx = np.nonzero(~mask)[0]
    out = np.zeros_like(y)
    if band_idx.size and comp_idx.size:
        lam = bundle.band_lambda_per_index()[band_idx]
        den = lam[:, None] - spec.eigenvalues[comp_idx][None, :]
        out[np.ix_(band_idx, comp_idx)] = y[np.ix_(band_idx, comp_idx)] / den
        out[np.ix_(comp_idx, band_idx)] = y[np.ix_(comp_idx, band_idx)] / den.T
    return v @ out @ v.conj().T


def _contour_circle(bundle: ProjectorBundle, policy: NumericalPolicy):
    """Circle center and radius reaching halfway into each bordering gap."""
    spec = bundle.spectral
    mask = bundle.eigen_band_mask()
    band_vals = spec.eigenvalues[mask]
    rest = spec.eigenvalues[~mask]
    lo, hi = float(band_vals.min()), float(band_vals.max())
    below = rest[rest < lo]
    above = rest[rest > hi]
    gap_lo = float(lo - below.max()) if below.size else bundle.gap
    gap_hi = float(above.min() - hi) if above.size else bundle.gap
    center = (lo - gap_lo / 2.0 + hi + gap_hi / 2.0) / 2.0
    radius = (hi - lo + gap_lo / 2.0 + gap_hi / 2.0) / 2.0
    margin = min(np.abs(np.abs(rest - center) - radius).min() if rest.size else radius,
                 radius - np.abs(band_vals - center).max())
    if margin <= policy.gap_floor:
        raise ContourTooClose(
            f"contour margin {margin:.3e} at or below floor {policy.gap_floor:.3e}")
    return center, radius


def twiddle_contour_oracle(x, h, bundle: ProjectorBundle,
                           contour: ContourSpec = ContourSpec(),
                           policy: NumericalPolicy = DEFAULT_POLICY) -> np.ndarray:
    """X~ by trapezoid quadrature of ``(2 pi i)^-1 oint R_z X R_z dz``.

    Uses dense solves for every resolvent factor, independent of the
    eigenbasis evaluation in :func:`twiddle`.  Converges geometrically in the
    node count when the contour keeps a healthy margin from the spectrum.
    """
    xm = _as_matrix(x)
    hm = _as_matrix(h)
    center, radius = _contour_circle(bundle, policy)
    n = contour.nodes
    theta = 2.0 * np.pi * np.arange(n) / n
    acc = np.zeros_like(xm)
    eye = np.eye(hm.shape[0])
    for t in theta:
        z = center + radius * np.exp(1j * t)
        rz = np.linalg.solve(hm - z * eye, eye)
        acc += (rz @ xm @ rz) * np.exp(1j * t)
    return acc * (radius / n)


def contour_projector(h, bundle: ProjectorBundle,
                      contour: ContourSpec = ContourSpec(),
                      policy: NumericalPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Band projector by contour quadrature, ``-(2 pi i)^-1 oint R_z dz``."""
    hm = _as_matrix(h)
    center, radius = _contour_circle(bundle, policy)
    n = contour.nodes
    theta = 2.0 * np.pi * np.arange(n) / n
    acc = np.zeros_like(hm)
    eye = np.eye(hm.shape[0])
    for t in theta:
        z = center + radius * np.exp(1j * t)
        acc += np.linalg.solve(hm - z * eye, eye) * np.exp(1j * t)
    return -acc * (radius / n)


def g_operator(a, b, h, bundle: ProjectorBundle,
               contour: ContourSpec = ContourSpec(),
               policy: NumericalPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Quadrature of the triple-resolvent integral
    ``(2 pi i)^-1 oint R_z A R_z B R_z dz``.

    Equals ``(P - Q)(A~ B~ + (A B~)~ - (A~ B)~)``; see
    :func:`g_operator_identity_rhs` for that combination.
    """
    am, bm, hm = _as_matrix(a), _as_matrix(b), _as_matrix(h)
    center, radius = _contour_circle(bundle, policy)
    n = contour.nodes
    theta = 2.0 * np.pi * np.arange(n) / n
    acc = np.zeros_like(am)
    eye = np.eye(hm.shape[0])
    for t in theta:
        z = center + radius * np.exp(1j * t)
        rz = np.linalg.solve(hm - z * eye, eye)
        acc += (rz @ am @ rz @ bm @ rz) * np.exp(1j * t)
    return acc * (radius / n)


def g_operator_identity_rhs(a, b, h, bundle: ProjectorBundle,
                            policy: NumericalPolicy = DEFAULT_POLICY) -> np.ndarray:
    """The twiddle combination ``(P - Q)(A~ B~ + (A B~)~ - (A~ B)~)``."""
    am, bm = _as_matrix(a), _as_matrix(b)
    ta = twiddle(am, h, bundle, policy)
    tb = twiddle(bm, h, bundle, policy)
    inner = ta @ tb + twiddle(am @ tb, h, bundle, policy) \
        - twiddle(ta @ bm, h, bundle, policy)
    return (bundle.p - bundle.q) @ inner


# ---------------------------------------------------------------------------
# projector derivatives along a family
# ---------------------------------------------------------------------------

def projector_derivative(family, s: float, bundle: ProjectorBundle,
                         policy: NumericalPolicy = DEFAULT_POLICY) -> np.ndarray:
    """dP/ds for the tracked band: the twiddle of dH/ds at s."""
    pt = family.at(s)
    return twiddle(pt.dh, pt.h, bundle, policy)


def projector_second_derivative(family, s: float, bundle: ProjectorBundle,
                                policy: NumericalPolicy = DEFAULT_POLICY) -> np.ndarray:
    """d^2P/ds^2 assembled from twiddles of dH/ds and d^2H/ds^2.

    Uses the derivative identity for X~ specialized to X = dH/ds:
    ``P'' = (H'')~ + (Q - P)(2 P'^2 + 2 ([H', P'])~)``.
    """
    pt = family.at(s)
    pdot = twiddle(pt.dh, pt.h, bundle, policy)
    comm = pt.dh @ pdot - pdot @ pt.dh
    return twiddle(pt.d2h, pt.h, bundle, policy) \
        + (bundle.q - bundle.p) @ (2.0 * pdot @ pdot + 2.0 * twiddle(comm, pt.h, bundle, policy))


def projector_second_derivative_fd(family, s: float, bundle: ProjectorBundle,
                                   policy: NumericalPolicy = DEFAULT_POLICY) -> np.ndarray:
    """d^2P/ds^2 by Richardson-extrapolated central differences.

    Independent of the twiddle-based assembly; used as a cross check.  The
    band at displaced parameters is recovered by overlap tracking from the
    supplied bundle.
    """
    def p_at(x):
        spec = spectral_decompose(family.at(float(x)).h, policy=policy)
        return track_band(spec, bundle, policy).p

    def second(step):
        return (p_at(s + step) - 2.0 * bundle.p + p_at(s - step)) / step ** 2

    h = policy.fd_second_step
    return (4.0 * second(h / 2.0) - second(h)) / 3.0


def pdot_twiddle_derivative(family, s: float, bundle: ProjectorBundle,
                            policy: NumericalPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Full time derivative of T = (P')~ along the family.

    ``T' = (P'')~ + (Q - P)(P' T + T P' + ([H', T])~)``; the commutator of P'
    with itself drops out.
    """
    pt = family.at(s)
    pdot = twiddle(pt.dh, pt.h, bundle, policy)
    t = twiddle(pdot, pt.h, bundle, policy)
    pddot = projector_second_derivative(family, s, bundle, policy)
    comm = pt.dh @ t - t @ pt.dh
    return twiddle(pddot, pt.h, bundle, policy) \
        + (bundle.q - bundle.p) @ (pdot @ t + t @ pdot + twiddle(comm, pt.h, bundle, policy))


def twiddle_derivative(family, s: float, bundle: ProjectorBundle,
                       policy: NumericalPolicy = DEFAULT_POLICY) -> np.ndarray:
    """The Q-P block of d/ds[(P')~]: ``Q [(P'')~ + (H'(P')~)~ - ((P')~H')~] P``."""
    pt = family.at(s)
    pdot = twiddle(pt.dh, pt.h, bundle, policy)
    t = twiddle(pdot, pt.h, bundle, policy)
    pddot = projector_second_derivative(family, s, bundle, policy)
    inner = twiddle(pddot, pt.h, bundle, policy) \
        + twiddle(pt.dh @ t, pt.h, bundle, policy) \
        - twiddle(t @ pt.dh, pt.h, bundle, policy)
    return bundle.q @ inner @ bundle.p


def bundles_along(family, s_values: np.ndarray, band: BandSelector,
                  policy: NumericalPolicy = DEFAULT_POLICY,
                  cluster_tol: float | None = None) -> list:
    """Track the selected band across a sequence of parameter values."""
    out = []
    prev = None
    for s in np.asarray(s_values, dtype=float):
        spec = spectral_decompose(family.at(float(s)).h, cluster_tol=cluster_tol,
                                  policy=policy)
        if prev is None:
            prev = band_projector(spec, band, policy)
        else:
            prev = track_band(spec, prev, policy)
        out.append(prev)
    return out
