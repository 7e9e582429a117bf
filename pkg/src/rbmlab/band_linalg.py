"""Linear algebra on Hermitian band matrices.

Two operations drive every Monte Carlo estimator in this package:

``shifted_logdet(h, z)``
    ``log |det(H - z)|`` and the unit-modulus phase of the determinant,
    via an LU sweep that never leaves the band.  No pivoting is performed:
    for the shifted Hermitian matrices sampled here an exactly singular
    pivot has probability zero, and skipping the search keeps the sweep at
    O(N b^2) with O(N b) memory.  A vanishing pivot raises
    ``SingularPivotError`` so the caller can resample.

``eigenvalues(h)``
    All eigenvalues, ascending, through LAPACK's band solver (reduction of
    the band to tridiagonal form by Householder/Givens eliminations followed
    by the implicit-shift tridiagonal algorithm).

Both come with deliberately independent dense oracles -- a textbook
partial-pivot LU and a cyclic Jacobi eigensolver -- used by the test suite
to cross-validate the banded fast paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.linalg import eig_banded

# Pivots below this magnitude are treated as exact breakdowns of the
# pivot-free sweep (the caller is expected to resample the matrix).
PIVOT_FLOOR = 1e-300


class SingularPivotError(ArithmeticError):
    """Pivot-free LU hit a (numerically) zero pivot."""

    def __init__(self, index):
        super().__init__(f"zero pivot at elimination step {index}")
        self.index = index


@dataclass(frozen=True)
class LogDet:
    """Determinant in polar form: ``det = exp(log_abs) * phase``."""

    log_abs: float
    phase: complex

    @property
    def value(self):
        return math.exp(self.log_abs) * self.phase


def _skewed_shifted(h, z):
    """Band matrix H - z in skewed dense storage s[i, j - i + b] = A[i, j]."""
    n, b = h.size, h.half_bandwidth
    s = np.zeros((n, 2 * b + 1), dtype=np.complex128)
    for d in range(b + 1):
        m = n - d
        if m <= 0:
            break
        vals = h.bands[d, :m]
        s[:m, b + d] = vals
        if d > 0:
            s[d:, b - d] = np.conj(vals)
    s[:, b] -= z
    return s


@njit(cache=True)
def _lu_logdet_kernel(s, b):
    """In-place pivot-free banded LU; returns (log_abs, phase, fail_index)."""
    n = s.shape[0]
    log_abs = 0.0
    phase = 1.0 + 0.0j
    for k in range(n):
        piv = s[k, b]
        apiv = abs(piv)
        if apiv < PIVOT_FLOOR or not np.isfinite(apiv):
            return 0.0, 0.0j, k
        log_abs += np.log(apiv)
        phase *= piv / apiv
        imax = min(k + b, n - 1)
        for i in range(k + 1, imax + 1):
            mult = s[i, k - i + b] / piv
            if mult != 0:
                ioff = b - i
                koff = b - k
                for j in range(k + 1, imax + 1):
                    s[i, j + ioff] -= mult * s[k, j + koff]
    return log_abs, phase, -1


def _lu_logdet_fallback(s, b):
    """Pure-numpy twin of the jit kernel (same sweep, row-at-a-time)."""
    n = s.shape[0]
    log_abs = 0.0
    phase = 1.0 + 0.0j
    for k in range(n):
        piv = s[k, b]
        apiv = abs(piv)
        if apiv < PIVOT_FLOOR or not np.isfinite(apiv):
            return 0.0, 0.0j, k
        log_abs += np.log(apiv)
        phase *= piv / apiv
        m = min(b, n - 1 - k)
        if m > 0:
            rowk = s[k, b + 1 : b + m + 1]
            for i in range(k + 1, k + m + 1):
                mult = s[i, k - i + b] / piv
                if mult != 0:
                    s[i, k + 1 - i + b : k + m + 1 - i + b] -= mult * rowk
    return log_abs, phase, -1


def shifted_logdet(h, z, *, use_jit=True):
    """log|det(H - z)| and determinant phase for a Hermitian band matrix.

    Parameters
    ----------
    h : HermitianBandMatrix
    z : complex
        Spectral shift; ``det(H - z * I)`` is evaluated.
    use_jit : bool
        Route through the compiled kernel (default) or the numpy fallback.

    Raises
    ------
    SingularPivotError
        If the pivot-free elimination breaks down; resample and retry.
    """
    s = _skewed_shifted(h, complex(z))
    kernel = _lu_logdet_kernel if use_jit else _lu_logdet_fallback
    log_abs, phase, fail = kernel(s, h.half_bandwidth)
    if fail >= 0:
        raise SingularPivotError(fail)
    return LogDet(log_abs=float(log_abs), phase=complex(phase))


def eigenvalues(h):
    """All eigenvalues of the Hermitian band matrix, ascending."""
    n, b = h.size, h.half_bandwidth
    band = np.zeros((b + 1, n), dtype=np.complex128)
    for d in range(b + 1):
        m = n - d
        if m <= 0:
            break
        band[b - d, d:] = h.bands[d, :m]
    return eig_banded(band, lower=False, eigvals_only=True, check_finite=False)


# ---------------------------------------------------------------------------
# dense oracles (independent reference implementations for the test suite)
# ---------------------------------------------------------------------------

def dense_oracle_logdet(dense, z):
    """Textbook O(N^3) dense LU with partial pivoting, in polar form.

    Written from the classical algorithm on purpose -- it shares no code
    with the banded fast path it is used to check.
    """
    a = np.array(dense, dtype=np.complex128)
    n = a.shape[0]
    a[np.diag_indices(n)] -= z
    log_abs = 0.0
    phase = 1.0 + 0.0j
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[p, k]) == 0.0:
            raise SingularPivotError(k)
        if p != k:
            a[[k, p]] = a[[p, k]]
            phase = -phase
        piv = a[k, k]
        log_abs += math.log(abs(piv))
        phase *= piv / abs(piv)
        if k + 1 < n:
            mult = a[k + 1 :, k] / piv
            a[k + 1 :, k + 1 :] -= np.outer(mult, a[k, k + 1 :])
    return LogDet(log_abs=log_abs, phase=phase)


def dense_oracle_eigs(dense, tol=1e-13, max_sweeps=60):
    """Cyclic Jacobi eigenvalues of a dense Hermitian matrix, ascending.

    Classical two-sided rotations: each sweep zeroes every off-diagonal
    pair (p, q) with a unitary Givens-type rotation, and the off-diagonal
    Frobenius mass decreases until the diagonal holds the spectrum.
    """
    a = np.array(dense, dtype=np.complex128)
    n = a.shape[0]
    if n == 1:
        return np.array([a[0, 0].real])
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n)
    for _ in range(max_sweeps):
        # off-diagonal mass summed directly: the norm-difference form
        # sqrt(|A|^2 - |diag|^2) bottoms out in cancellation noise around
        # sqrt(eps)*scale and would never pass a 1e-13 test
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r <= tol * scale / n:
                    continue
                # inner rotation (|theta| <= pi/4) for the 2x2 Hermitian
                # block: the smaller root of t^2 + 2 tau t - 1 = 0.  Taking
                # the outer angle instead merely swaps the diagonal pair and
                # cyclic sweeps can then reshuffle forever.
                tau = (a[q, q] - a[p, p]).real / (2.0 * r)
                if tau == 0.0:
                    t = 1.0
                else:
                    t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.hypot(1.0, t)
                s = (t * c) * (apq / r)
                # A <- G^H A G with G embedding [[c, s], [-conj(s), c]]
                colp = c * a[:, p] - np.conj(s) * a[:, q]
                colq = s * a[:, p] + c * a[:, q]
                a[:, p], a[:, q] = colp, colq
                rowp = c * a[p, :] - s * a[q, :]
                rowq = np.conj(s) * a[p, :] + c * a[q, :]
                a[p, :], a[q, :] = rowp, rowq
    else:
        raise RuntimeError("Jacobi sweep limit reached without convergence")
    return np.sort(np.real(np.diag(a)))
