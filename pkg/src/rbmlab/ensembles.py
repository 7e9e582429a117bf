"""Hermitian random band-matrix ensembles with prescribed variance profiles.

A profile assigns each matrix entry a variance ``J[i, j]`` supported on a band
``|i - j| <= b`` around the diagonal, with every row of ``J`` summing to one.
Three families are provided:

``simple``
    Flat variance ``1/(2W)`` on ``|i - j| <= W``.  Rows near the edge lose
    band mass, so by default the profile is rescaled symmetrically
    (``D J D`` with diagonal ``D``, fixed point of a Sinkhorn iteration) to
    restore unit row sums while keeping ``J`` symmetric.
``smooth``
    ``J = (1 - W^2 \\Delta)^{-1}`` for the Neumann-like second difference on
    the chain, giving exponentially decaying variances with range ``W``.
    Rows sum to one exactly because the constant vector is harmonic.
``block``
    ``N = n W`` sites grouped into blocks of width ``W``; diagonal blocks are
    GUE-like with entry variance ``(1 - 2*alpha)/W`` (edge blocks
    ``(1 - alpha)/W``), adjacent blocks are coupled by Ginibre-like blocks of
    entry variance ``alpha/W``.

Matrices are stored band-by-band: ``bands[d, i]`` holds ``H[i, i + d]`` for
``0 <= d <= b``, with the ``d = 0`` row real.  Sampling is counter-based (see
``counter_rng``), so ``sample(spec, k)`` is a pure function of the seed and
the sample index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solveh_banded

from .counter_rng import normal_pair

KINDS = ("simple", "smooth", "block")

# Variances below this are dropped when truncating smooth profiles to a
# finite band; the discarded mass per row stays at the 1e-12 level.
DEFAULT_TAU_CUT = 1e-12


@dataclass(frozen=True)
class VarianceProfile:
    """Banded symmetric variance matrix with unit row sums.

    Attributes
    ----------
    kind : str
        One of ``simple``, ``smooth``, ``block``.
    size : int
        Matrix dimension N.
    bandwidth : float
        Band-width parameter W of the family.
    half_bandwidth : int
        Largest stored diagonal offset b.
    bands : ndarray, shape (b + 1, N)
        ``bands[d, i] = J[i, i + d]``; entries with ``i + d >= N`` are zero.
    alpha : float or None
        Block-coupling weight (block profiles only).
    """

    kind: str
    size: int
    bandwidth: float
    half_bandwidth: int
    bands: np.ndarray
    alpha: float | None = None

    def row_sums(self):
        return _band_row_sums(self.bands, self.size)

    def to_dense(self):
        return _band_to_dense(self.bands, self.size, hermitian=False)


@dataclass(frozen=True)
class EnsembleSpec:
    """A variance profile plus the seed that fixes the whole ensemble."""

    profile: VarianceProfile
    seed: int


@dataclass(frozen=True)
class HermitianBandMatrix:
    """One sampled Hermitian matrix in band storage.

    ``bands[d, i] = H[i, i + d]`` for ``0 <= d <= half_bandwidth``; the lower
    triangle is implied by conjugate symmetry and ``bands[0]`` has zero
    imaginary part.
    """

    size: int
    half_bandwidth: int
    bands: np.ndarray

    def to_dense(self):
        return _band_to_dense(self.bands, self.size, hermitian=True)


def _band_row_sums(bands, n):
    """Row sums of the symmetric matrix described by the upper bands."""
    rs = bands[0, :n].astype(np.float64).copy()
    for d in range(1, bands.shape[0]):
        m = n - d
        if m <= 0:
            break
        rs[:m] += bands[d, :m]
        rs[d:] += bands[d, :m]
    return rs


def _band_to_dense(bands, n, hermitian):
    a = np.zeros((n, n), dtype=bands.dtype)
    for d in range(bands.shape[0]):
        m = n - d
        if m <= 0:
            break
        idx = np.arange(m)
        a[idx, idx + d] = bands[d, :m]
        if d > 0:
            a[idx + d, idx] = np.conj(bands[d, :m]) if hermitian else bands[d, :m]
    return a


def _band_matvec(bands, v):
    """y = J v for the symmetric banded matrix J (real bands)."""
    n = v.shape[0]
    y = bands[0, :n] * v
    for d in range(1, bands.shape[0]):
        m = n - d
        if m <= 0:
            break
        y[:m] += bands[d, :m] * v[d:]
        y[d:] += bands[d, :m] * v[:m]
    return y


def _simple_bands(n, w, edge_renorm):
    reach = min(int(w), n - 1)
    bands = np.zeros((reach + 1, n))
    base = 1.0 / (2.0 * w)
    for d in range(reach + 1):
        bands[d, : n - d] = base
    if not edge_renorm:
        return bands
    # Symmetric Sinkhorn scaling: find diagonal D with row sums of D J D
    # equal to one.  Scaling is symmetric, so the result stays symmetric,
    # unlike a naive per-row normalization.
    scale = np.ones(n)
    for _ in range(1000):
        rs = scale * _band_matvec(bands, scale)
        err = np.max(np.abs(rs - 1.0))
        if err < 1e-14:
            break
        scale /= np.sqrt(rs)
    else:
        raise RuntimeError("row-sum scaling did not converge")
    for d in range(reach + 1):
        m = n - d
        bands[d, :m] *= scale[:m] * scale[d:]
    return bands


def _smooth_bands(n, w, tau_cut):
    # J = (1 + W^2 L)^{-1} with L the second-difference operator whose
    # boundary rows are (+1, -1): L @ ones == 0, hence J @ ones == ones and
    # the unit-row-sum invariant is exact before truncation.
    w2 = float(w) ** 2
    ab = np.empty((2, n))
    ab[0, :] = -w2  # superdiagonal (ab[0, 0] unused by solveh_banded)
    ab[1, :] = 1.0 + 2.0 * w2
    ab[1, 0] = 1.0 + w2
    ab[1, -1] = 1.0 + w2
    reach = min(n - 1, int(math.ceil(w * math.log(1.0 / tau_cut))))
    bands = np.zeros((reach + 1, n))
    block = 256
    for j0 in range(0, n, block):
        j1 = min(j0 + block, n)
        rhs = np.zeros((n, j1 - j0))
        rhs[np.arange(j0, j1), np.arange(j1 - j0)] = 1.0
        x = solveh_banded(ab, rhs)
        cols = np.arange(j0, j1)
        for d in range(reach + 1):
            ok = cols - d >= 0
            if not ok.any():
                continue
            bands[d, cols[ok] - d] = x[cols[ok] - d, np.nonzero(ok)[0]]
    bands[bands < tau_cut] = 0.0
    return bands


def _block_bands(n, w, alpha):
    if alpha is None:
        raise ValueError("block profiles need alpha")
    if not 0.0 < alpha < 0.25:
        raise ValueError("alpha must lie in (0, 1/4)")
    w = int(w)
    if w < 1 or n % w != 0:
        raise ValueError("block profiles need integer W dividing N")
    nblocks = n // w
    if nblocks < 2:
        raise ValueError("block profiles need at least two blocks")
    reach = min(2 * w - 1, n - 1)
    bands = np.zeros((reach + 1, n))
    inner = (1.0 - 2.0 * alpha) / w
    edge = (1.0 - alpha) / w
    hop = alpha / w
    for d in range(reach + 1):
        i = np.arange(n - d)
        s1 = i // w
        s2 = (i + d) // w
        var = np.zeros(n - d)
        same = s1 == s2
        var[same] = np.where((s1[same] == 0) | (s1[same] == nblocks - 1), edge, inner)
        var[s2 == s1 + 1] = hop
        bands[d, : n - d] = var
    return bands


def build_variance_profile(kind, size, bandwidth, alpha=None, *,
                           edge_renorm=True, tau_cut=DEFAULT_TAU_CUT):
    """Construct a banded variance profile with unit row sums.

    Parameters
    ----------
    kind : {'simple', 'smooth', 'block'}
    size : int
        Matrix dimension N (>= 2).
    bandwidth : float
        Band-width parameter W (> 0; integer for 'simple' reach and 'block').
    alpha : float, optional
        Coupling weight for 'block' profiles, in (0, 1/4).
    edge_renorm : bool
        For 'simple' only: rescale symmetrically so edge rows also sum to
        one.  ``False`` keeps the literal flat profile.
    tau_cut : float
        For 'smooth' only: variances below this are dropped, which also sets
        the stored band width ``ceil(W * ln(1/tau_cut))``.
    """
    n = int(size)
    if n < 2:
        raise ValueError("size must be at least 2")
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    if kind == "simple":
        bands = _simple_bands(n, bandwidth, edge_renorm)
    elif kind == "smooth":
        bands = _smooth_bands(n, bandwidth, tau_cut)
    elif kind == "block":
        bands = _block_bands(n, bandwidth, alpha)
    else:
        raise ValueError(f"unknown profile kind {kind!r} (expected one of {KINDS})")
    return VarianceProfile(kind=kind, size=n, bandwidth=float(bandwidth),
                           half_bandwidth=bands.shape[0] - 1, bands=bands,
                           alpha=alpha)


def sample(spec, index):
    """Draw matrix number ``index`` of the ensemble.

    Entry ``(i, j)`` with ``i < j`` is complex Gaussian with
    ``E|H_ij|^2 = J_ij`` (real and imaginary parts independent with variance
    ``J_ij / 2``); diagonal entries are real with variance ``J_ii``.  The
    draw depends only on ``(spec.seed, index)`` and the entry position, so
    results are independent of evaluation order and worker count.
    """
    prof = spec.profile
    n = prof.size
    b = prof.half_bandwidth
    # canonical entry counter for (i, j) = (i, i + d) is i * N + j, one
    # rectangle for all diagonals at once; the unused corner (i + d >= n)
    # is generated too but lands on zero-variance profile entries, and each
    # kept entry depends only on its own counter, so the draw is identical
    # to a diagonal-by-diagonal evaluation
    idx = (np.arange(n, dtype=np.uint64) * np.uint64(n + 1)
           + np.arange(b + 1, dtype=np.uint64)[:, None])
    g0, g1 = normal_pair(spec.seed, index, idx)
    out = (g0 + 1j * g1) * np.sqrt(prof.bands / 2.0)
    out[0] = g0[0] * np.sqrt(prof.bands[0])
    return HermitianBandMatrix(size=n, half_bandwidth=b, bands=out)
