"""Transfer-operator route to the localization/delocalization crossover.

An n-site chain observable equals a quadratic form of the (n-1)-th power of
an integral operator; its spectrum near 1 controls which side of the
crossover a given (n, W) sits on.  This module builds that operator on the
unit-coset coordinate x = |U_12|^2 in [0, 1], where the Haar average over
the relative phase has already been done analytically (a Bessel I0 factor):

    K(x1, x2) = W^2 t* exp(-t* W^2 (x1 + x2 - 2 x1 x2))
                * I0(2 t* W^2 sqrt(x1 x2 (1-x1)(1-x2)))

Discretization is Nystrom on Gauss-Legendre nodes; powers are taken by
binary exponentiation of the symmetrized matrix (never by diagonalizing --
the xi-twisted operator is complex symmetric, not normal).  Constants are
collected in ``DerivedConstants``; t* W^2 is the single large parameter and
everything is evaluated in exponentially-scaled form so it never overflows.

A second, independent spectral object lives here too: the Gaussian
(Mehler-type) kernel on the real line whose geometric spectrum sets the
O(1/W) gap behind the one-point limit.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import expm
from scipy.special import i0e

from .limits import g_plus, rho_sc


class ConvergenceError(RuntimeError):
    """Discretization refinement stalled above the requested tolerance."""

    def __init__(self, message, last=None, previous=None):
        super().__init__(message)
        self.last = last
        self.previous = previous


class BoundaryTruncationWarning(UserWarning):
    """Finite domain is clipping the operator's leading eigenfunction."""


@dataclass(frozen=True)
class DerivedConstants:
    """Spectral-parameter bundle at bulk energy E.

    ``a_plus`` is the real stationary-point amplitude sqrt(1 - E^2/4)
    (= pi rho(E)); ``t_star = 4 a_plus^2`` scales the transfer kernel;
    ``c_plus = 1 + a_plus^{-2}`` is the Gaussian-kernel confinement;
    ``g_plus`` the complex one-point limit slope.
    """

    energy: float
    rho: float
    a_plus: float
    t_star: float
    c_plus: float
    g_plus: complex

    def alpha_plus(self, w):
        """Gaussian-kernel decay rate sqrt(c+/2) (1 + c+/(2W^2))^(1/2)."""
        return _alpha_plus(self.c_plus, w)


def _alpha_plus(c, w):
    return math.sqrt(c / 2.0) * math.sqrt(1.0 + c / (2.0 * w * w))


def constants(energy):
    """Derived constants at bulk energy E, |E| < 2."""
    if not abs(energy) < 2.0:
        raise ValueError("bulk energy needs |E| < 2")
    a = math.sqrt(1.0 - energy * energy / 4.0)
    return DerivedConstants(
        energy=float(energy),
        rho=rho_sc(energy),
        a_plus=a,
        t_star=4.0 * a * a,
        c_plus=1.0 + 1.0 / (a * a),
        g_plus=g_plus(energy),
    )


# ---------------------------------------------------------------------------
# coset kernel and its Nystrom spectrum
# ---------------------------------------------------------------------------

@lru_cache(maxsize=32)
def _gauss01(n):
    """Gauss-Legendre nodes/weights mapped to [0, 1]."""
    t, w = leggauss(n)
    return (t + 1.0) / 2.0, w / 2.0


def reduced_kernel(t_star, w):
    """The phase-averaged kernel K(x1, x2) on [0, 1]^2 as a callable.

    Evaluated as beta * exp(b - a) * i0e(b) with beta = t* W^2,
    a = beta (x1 + x2 - 2 x1 x2), b = 2 beta sqrt(x1 x2 (1-x1)(1-x2));
    a >= b always (AM-GM), so the exponent never overflows even for
    beta ~ 1e6.
    """
    beta = float(t_star) * float(w) ** 2

    def kernel(x1, x2):
        x1 = np.clip(np.asarray(x1, dtype=float), 0.0, 1.0)
        x2 = np.clip(np.asarray(x2, dtype=float), 0.0, 1.0)
        # grouped so every intermediate is symmetric under x1 <-> x2, making
        # K(x1, x2) == K(x2, x1) hold to the last bit
        cross = x1 * x2
        mirror = (1.0 - x1) * (1.0 - x2)
        a = beta * ((x1 + x2) - 2.0 * cross)
        b = 2.0 * beta * np.sqrt(cross * mirror)
        return beta * np.exp(b - a) * i0e(b)

    return kernel


@lru_cache(maxsize=32)
def _sym_kernel_matrix(t_star, w, nodes):
    """Symmetrized Nystrom matrix sqrt(w_i) K(x_i, x_j) sqrt(w_j)."""
    x, wt = _gauss01(nodes)
    k = reduced_kernel(t_star, w)(x[:, None], x[None, :])
    root = np.sqrt(wt)
    return (root[:, None] * root[None, :]) * k


def k0_spectrum(t_star, w, nodes=128, *, quad_tol=1e-10, max_nodes=1024):
    """Eigenvalues of the untwisted transfer operator, descending.

    Convergence is certified by doubling the quadrature until the leading
    eigenvalues move less than ``quad_tol``; the refined values are returned.
    """
    prev = None
    j = int(nodes)
    while True:
        m = _sym_kernel_matrix(float(t_star), float(w), j)
        eigs = np.linalg.eigvalsh(m)[::-1]
        if prev is not None:
            k = min(len(prev), len(eigs), 32)
            delta = float(np.max(np.abs(prev[:k] - eigs[:k])))
            if delta <= quad_tol:
                return eigs
        if 2 * j > max_nodes:
            raise ConvergenceError(
                f"spectrum not converged at {j} nodes (max {max_nodes})",
                last=eigs, previous=prev)
        prev = eigs
        j *= 2


def legendre_projection_spectrum(t_star, w, basis=24, quad=256):
    """Same spectrum by projecting the kernel onto shifted Legendre polynomials.

    Independent route used to cross-check the Nystrom eigenvalues: the
    matrix elements are double Gauss-Legendre integrals against the
    orthonormal basis e_j(x) = sqrt(2j + 1) P_j(1 - 2x).
    """
    x, wt = _gauss01(quad)
    k = reduced_kernel(t_star, w)(x[:, None], x[None, :])
    u = 1.0 - 2.0 * x
    p = np.empty((basis, len(x)))
    p[0] = 1.0
    if basis > 1:
        p[1] = u
    for j in range(1, basis - 1):
        p[j + 1] = ((2 * j + 1) * u * p[j] - j * p[j - 1]) / (j + 1)
    e = p * np.sqrt(2.0 * np.arange(basis) + 1.0)[:, None]
    proj = (e * wt) @ k @ (e * wt).T
    proj = (proj + proj.T) / 2.0
    return np.linalg.eigvalsh(proj)[::-1]


# ---------------------------------------------------------------------------
# crossover ratio
# ---------------------------------------------------------------------------

def _sym_square(m):
    """M @ M for complex symmetric M via rank-k update (half the flops)."""
    try:
        from scipy.linalg.blas import zsyrk
    except ImportError:  # pragma: no cover - blas always ships zsyrk
        return m @ m
    tri = zsyrk(1.0, m)
    return tri + tri.T - np.diag(np.diag(tri))


def _quad_form_power(m, v, p):
    """(v, M^p v) with running rescaling; returns (mantissa, log_scale)."""
    if p == 0:
        return complex(v @ v), 0.0
    r = v.astype(np.complex128)
    lr = 0.0
    b = m
    lb = 0.0
    while True:
        if p & 1:
            r = b @ r
            lr += lb
            s = float(np.max(np.abs(r)))
            if s == 0.0:
                return 0.0j, -math.inf
            r = r / s
            lr += math.log(s)
        p >>= 1
        if not p:
            break
        b = _sym_square(b)
        lb *= 2.0
        s = float(np.max(np.abs(b)))
        b = b / s
        lb += math.log(s)
    return complex(np.dot(v, r)), lr


@dataclass(frozen=True)
class TransferRatio:
    """Crossover ratio plus its quadrature-refinement diagnostics."""

    value: complex
    nodes: int
    quad_delta: float


def _ratio_at_nodes(n, w, xi, t_star, nodes):
    x, wt = _gauss01(nodes)
    m0 = _sym_kernel_matrix(t_star, w, nodes)
    v = np.sqrt(wt)
    qd, ld = _quad_form_power(m0, v, n - 1)
    if xi == 0:
        return 1.0 + 0.0j
    ang = math.pi * xi * (1.0 - 2.0 * x) / n
    # twist as exp of the summed half-angles: the angle sum is exactly
    # symmetric in (i, j), so the twisted matrix equals its plain transpose
    # to the last bit (a product of the two phases would not)
    mx = m0 * np.exp(-1j * (ang[:, None] + ang[None, :]))
    # Each kernel factor carries half of each neighbouring site's twist
    # phase, so after n-1 factors the two chain ends are still owed half a
    # site each.  Folding one more half-phase into each boundary weight
    # makes every site carry exactly exp(-2i pi xi nu_j / n).
    qn, ln = _quad_form_power(mx, np.exp(-1j * ang) * v, n - 1)
    return (qn / qd) * math.exp(ln - ld)


def transfer_ratio(n, w, energy, xi, nodes=128, *, quad_tol=1e-6,
                   max_nodes=1024, full_output=False):
    """Crossover ratio of twisted to untwisted chain quadratic forms.

    The xi-twist enters as the exact diagonal phase
    diag(exp(-i pi xi (1 - 2 x_i)/n)) sandwiching the untwisted matrix;
    the boundary vector carries one extra half-phase per end so that all n
    chain sites accumulate the same full per-site twist.  Powers via binary
    exponentiation; quadrature refined by doubling until the value moves
    less than ``quad_tol`` (ConvergenceError past ``max_nodes``).

    Returns the complex ratio, or a ``TransferRatio`` when ``full_output``.
    """
    n = int(n)
    if n < 2:
        raise ValueError("chain length n must be >= 2")
    t_star = constants(energy).t_star
    j = int(nodes)
    prev = None
    while True:
        val = _ratio_at_nodes(n, float(w), float(xi), t_star, j)
        if prev is not None:
            delta = abs(val - prev)
            if delta <= quad_tol * max(1.0, abs(val)):
                result = TransferRatio(value=val, nodes=j, quad_delta=delta)
                return result if full_output else result.value
        if 2 * j > max_nodes:
            raise ConvergenceError(
                f"ratio not quadrature-converged at {j} nodes "
                f"(last delta {abs(val - prev):.3e})" if prev is not None else
                f"need more than {max_nodes} nodes", last=val, previous=prev)
        prev = val
        j *= 2


def transfer_ratio_first_order(n, w, energy, xi, nodes=128):
    """Same ratio with the twist linearized: K_0 - (2 pi i xi / n) * sym(nu K_0).

    First-order check of the exact phase factorization; agreement with
    ``transfer_ratio`` is O(1/n).
    """
    n = int(n)
    t_star = constants(energy).t_star
    x, wt = _gauss01(nodes)
    m0 = _sym_kernel_matrix(t_star, float(w), nodes)
    v = np.sqrt(wt)
    nu = 1.0 - 2.0 * x
    coupling = nu[:, None] * m0 + m0 * nu[None, :]
    mx = m0 - (1j * math.pi * xi / n) * coupling
    qn, ln = _quad_form_power(mx, v, n - 1)
    qd, ld = _quad_form_power(m0, v, n - 1)
    return (qn / qd) * math.exp(ln - ld)


# ---------------------------------------------------------------------------
# intermediate-regime semigroup
# ---------------------------------------------------------------------------

def nu_matrix(basis):
    """Multiplication by 1 - 2x in the orthonormal shifted-Legendre basis.

    Exactly tridiagonal with zero diagonal; entry (j, j+1) equals
    (j + 1)/sqrt((2j + 1)(2j + 3)).
    """
    j = np.arange(basis - 1)
    off = (j + 1) / np.sqrt((2 * j + 1) * (2 * j + 3))
    m = np.zeros((basis, basis))
    m[j, j + 1] = off
    m[j + 1, j] = off
    return m


def intermediate_limit(c, xi, basis=64, *, tol=1e-10, max_basis=1024):
    """(0,0) entry of exp(-C Lap - 2 pi i xi nu) in the Legendre basis.

    ``Lap`` is diagonal j(j+1); the matrix exponential is evaluated by
    scaling-and-squaring (Pade order 13) and the basis doubled until the
    value is stable to ``tol``.
    """
    if c < 0:
        raise ValueError("the diffusion time C must be >= 0")
    j = int(basis)
    prev = None
    while True:
        lap = np.diag(np.arange(j) * (np.arange(j) + 1.0)).astype(complex)
        gen = -c * lap - 2j * math.pi * xi * nu_matrix(j)
        val = complex(expm(gen)[0, 0])
        if prev is not None and abs(val - prev) <= tol * max(1.0, abs(val)):
            return val
        if 2 * j > max_basis:
            raise ConvergenceError(
                f"semigroup value not basis-converged at {j}",
                last=val, previous=prev)
        prev = val
        j *= 2


# ---------------------------------------------------------------------------
# Gaussian (Mehler) kernel spectrum
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MehlerSpectrum:
    eigenvalues: np.ndarray
    half_width: float
    nodes: int
    alpha_plus: float
    predicted_ratio: float
    boundary_mass: float


def mehler_spectrum(w, c, length=None, nodes=400, *, full_output=False):
    """Nystrom spectrum of (W/sqrt(2 pi)) exp(-W^2 (x-y)^2/2 - c (x^2+y^2)/2).

    The spectrum is exactly geometric: successive ratios all equal
    (1 + 2 alpha/W + c/W^2)^{-1} with alpha = sqrt(c/2) (1 + c/(2W^2))^{1/2}.
    Returns descending eigenvalues (or a ``MehlerSpectrum`` with
    diagnostics).  Warns when the truncated domain [-L, L] carries visible
    leading-eigenfunction mass at its boundary.
    """
    w = float(w)
    c = float(c)
    if w <= 0 or c <= 0:
        raise ValueError("need positive W and c")
    if length is None:
        length = 12.0 / math.sqrt(w) * max(1.0, 1.0 / math.sqrt(c))
    t, quad_w = leggauss(int(nodes))
    x = length * t
    qw = length * quad_w
    diff = x[:, None] - x[None, :]
    conf = x[:, None] ** 2 + x[None, :] ** 2
    kern = w / math.sqrt(2.0 * math.pi) * np.exp(-0.5 * w * w * diff**2 - 0.5 * c * conf)
    root = np.sqrt(qw)
    sym = root[:, None] * kern * root[None, :]
    vals, vecs = np.linalg.eigh(sym)
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    top = vecs[:, order[0]]
    boundary = float((abs(top[0]) ** 2 + abs(top[-1]) ** 2) / np.sum(np.abs(top) ** 2))
    if boundary > 1e-12:
        warnings.warn(
            f"leading eigenfunction has relative boundary mass {boundary:.2e}; "
            f"increase the domain half-width (currently {length:g})",
            BoundaryTruncationWarning, stacklevel=2)
    alpha = _alpha_plus(c, w)
    ratio = 1.0 / (1.0 + 2.0 * alpha / w + c / (w * w))
    result = MehlerSpectrum(eigenvalues=vals, half_width=float(length),
                            nodes=int(nodes), alpha_plus=alpha,
                            predicted_ratio=ratio, boundary_mass=boundary)
    return result if full_output else vals
