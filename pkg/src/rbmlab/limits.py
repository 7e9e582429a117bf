"""Closed-form limit laws and the sigma-model assembly of the GUE pair correlation.

Everything here is an exact formula evaluation -- no sampling, no operators.
The Monte Carlo estimators and the transfer-operator route are both checked
against these limits, which is the point of having two independent pipelines.

The two-point assembly combines the four ratio-of-determinant correlators
(the ``++``, ``+-``, ``-+``, ``--`` sectors) into the rescaled pair
correlation.  The ``-+``/``--`` sectors follow from ``+-``/``++`` by complex
conjugation (Hermitian matrices: det(H - conj z) = conj det(H - z)), the
mixed second derivative in the primed offsets is taken by Richardson-refined
central differences, and the remaining regularization ``eps`` is removed by
Richardson extrapolation along a descending ladder.

One coupling constant, ``c0``, enters the ``+-`` limit without a printed
value; ``calibrate_c0`` pins it by matching the assembled curve to the GUE
answer at probe separations and records every candidate it had to choose
from.  See the function docstring for the discrete family the matching
condition actually has.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

# Validity domains of the limit formulas implemented here.  Runs outside
# them are legitimate experiments, so violations warn, never raise.
SIGMA_ENERGY_BOUND = math.sqrt(2.0)
R1_ENERGY_BOUND = 4.0 * math.sqrt(2.0) / 3.0

DEFAULT_EPS_LADDER = (0.02, 0.01, 0.005)


class RegimeWarning(UserWarning):
    """Parameters are outside the proven validity domain of a limit law."""


def warn_outside_sigma_regime(energy):
    """Warn (and return True) when |E| is outside the two-point limit domain."""
    if abs(energy) >= SIGMA_ENERGY_BOUND:
        warnings.warn(
            f"|E| = {abs(energy):g} is outside the proven two-point regime "
            f"|E| < {SIGMA_ENERGY_BOUND:.6f}; results are extrapolations",
            RegimeWarning, stacklevel=2)
        return True
    return False


def warn_outside_r1_regime(energy):
    """Warn (and return True) when |E| is outside the one-point limit domain."""
    if abs(energy) > R1_ENERGY_BOUND:
        warnings.warn(
            f"|E| = {abs(energy):g} is outside the proven one-point regime "
            f"|E| <= {R1_ENERGY_BOUND:.6f}; results are extrapolations",
            RegimeWarning, stacklevel=2)
        return True
    return False


# ---------------------------------------------------------------------------
# semicircle and scalar constants
# ---------------------------------------------------------------------------

def rho_sc(energy):
    """Semicircle density (2 pi)^{-1} sqrt(4 - E^2), zero off [-2, 2]."""
    e = np.asarray(energy, dtype=float)
    out = np.zeros_like(e)
    inside = np.abs(e) < 2.0
    out[inside] = np.sqrt(4.0 - e[inside] ** 2) / (2.0 * np.pi)
    if np.ndim(energy) == 0:
        return float(out)
    return out


def semicircle_cdf(x):
    """Integrated semicircle density, exact."""
    x = np.asarray(x, dtype=float)
    xc = np.clip(x, -2.0, 2.0)
    val = (xc * np.sqrt(4.0 - xc**2) / 2.0 + 2.0 * np.arcsin(xc / 2.0) + np.pi) / (2.0 * np.pi)
    if np.ndim(x) == 0:
        return float(val)
    return val


def g_plus(energy):
    """g(E) = (-E + i sqrt(4 - E^2)) / 2; unit modulus on [-2, 2]."""
    if abs(energy) > 2.0:
        raise ValueError("g_plus needs |E| <= 2")
    return complex(-energy / 2.0, math.sqrt(4.0 - energy * energy) / 2.0)


def a_plus_complex(energy):
    """a(E) = (iE + sqrt(4 - E^2)) / 2 = -i * g_plus(E); unit modulus."""
    if abs(energy) > 2.0:
        raise ValueError("a_plus_complex needs |E| <= 2")
    return complex(math.sqrt(4.0 - energy * energy) / 2.0, energy / 2.0)


def sine_kernel_ratio(xi):
    """sin(2 pi xi) / (2 pi xi), the fully delocalized crossover limit."""
    return float(np.sinc(2.0 * np.asarray(xi, dtype=float)))


def gue_r2(r):
    """GUE two-point correlation 1 - sin^2(pi r)/(pi r)^2 (0 at r = 0)."""
    s = np.sinc(np.asarray(r, dtype=float))
    out = 1.0 - s * s
    if np.ndim(r) == 0:
        return float(out)
    return out


# ---------------------------------------------------------------------------
# sigma-model limits of the generalized correlators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SigmaArgs:
    """Arguments of the two-point generalized correlators.

    Offsets are measured from the bulk energy E: the spectral arguments are
    E + xi/(N rho(E)) + i eps/N and primed counterparts.  Only the four
    offsets and eps enter the limit formulas.
    """

    energy: float
    eps: float
    xi1: complex
    xi2: complex
    xi1p: complex
    xi2p: complex

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if abs(self.energy) >= 2.0:
            raise ValueError("bulk energy needs |E| < 2")
        bound = self.eps * rho_sc(self.energy) / 2.0 + 1e-12
        for name in ("xi1", "xi2", "xi1p", "xi2p"):
            if abs(complex(getattr(self, name)).imag) > bound:
                raise ValueError(
                    f"Im {name} exceeds eps*rho/2; the limit formulas do not apply")

    @property
    def _scale(self):
        return 1.0 / (2.0 * rho_sc(self.energy))

    @property
    def alpha1(self):
        return self.eps - 1j * (self.xi1 - self.xi2) * self._scale

    @property
    def alpha2(self):
        return self.eps - 1j * (self.xi1p - self.xi2p) * self._scale

    @property
    def delta1(self):
        return 1j * (self.xi1p - self.xi1) * self._scale

    @property
    def delta2(self):
        return 1j * (self.xi2 - self.xi2p) * self._scale

    def conjugate_reflected(self):
        """Arguments of the conjugated correlator (z -> conj z sector swap)."""
        return SigmaArgs(self.energy, self.eps,
                         xi1=np.conj(self.xi1), xi2=np.conj(self.xi2),
                         xi1p=np.conj(self.xi1p), xi2p=np.conj(self.xi2p))


def C_star_E(args):
    """Prefactor exp(-g(E) (xi1 + xi1' - xi2 - xi2') / rho(E))."""
    total = args.xi1 + args.xi1p - args.xi2 - args.xi2p
    return cmath.exp(-g_plus(args.energy) * total / rho_sc(args.energy))


def _expm1_over(z):
    """(exp(z) - 1)/z, stable near z = 0."""
    z = complex(z)
    if abs(z) < 0.1:
        # series up to z^7 term: relative error below 3e-11 at |z| = 0.1
        acc = 1.0
        term = 1.0
        for k in range(2, 9):
            term *= z / k
            acc += term
        return acc
    return (cmath.exp(z) - 1.0) / z


def sigma_rpm(args, c0):
    """Limit of the +- generalized correlator (ratio-det sector).

    C*_E ( d1 d2 (e^{2 c0 a1} - 1)/(a1 a2) - (d1 + d2) e^{2 c0 a1}/a2
           + e^{2 c0 a1} a1/a2 )
    with a1, a2, d1, d2 the shifted offset combinations of ``SigmaArgs``;
    the a1 -> 0 limit of the first term is taken analytically.
    """
    if c0 <= 0:
        raise ValueError("c0 must be positive")
    a1, a2 = args.alpha1, args.alpha2
    d1, d2 = args.delta1, args.delta2
    if a2 == 0:
        raise ValueError("degenerate arguments: alpha2 = 0")
    grow = cmath.exp(2.0 * c0 * a1)
    term1 = d1 * d2 * (2.0 * c0) * _expm1_over(2.0 * c0 * a1) / a2
    return C_star_E(args) * (term1 - (d1 + d2) * grow / a2 + grow * a1 / a2)


def sigma_rpp(args):
    """Limit of the ++ correlator: exp(i a(E) (xi1'+xi2'-xi1-xi2)/rho(E))."""
    a = a_plus_complex(args.energy)
    total = args.xi1p + args.xi2p - args.xi1 - args.xi2
    return cmath.exp(1j * a * total / rho_sc(args.energy))


def sigma_rpp_mixed_derivative(args):
    """d^2/dxi1' dxi2' of sigma_rpp: -a(E)^2/rho(E)^2 times the value."""
    a = a_plus_complex(args.energy)
    rho = rho_sc(args.energy)
    return -(a * a) / (rho * rho) * sigma_rpp(args)


# ---------------------------------------------------------------------------
# assembled pair correlation
# ---------------------------------------------------------------------------

def _mixed_prime_derivative(func, args, h):
    """d^2 f / dxi1' dxi2' at args, central differences + one Richardson step."""

    def second(hh):
        def at(s1, s2):
            shifted = SigmaArgs(args.energy, args.eps, args.xi1, args.xi2,
                                args.xi1p + s1 * hh, args.xi2p + s2 * hh)
            return func(shifted)

        return (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * hh * hh)

    coarse = second(h)
    fine = second(h / 2.0)
    return (4.0 * fine - coarse) / 3.0


@dataclass(frozen=True)
class R2Limit:
    """Assembled pair-correlation value with its extrapolation diagnostics."""

    value: float
    eps_error: float
    ladder: tuple
    normalization: float
    regime_warning: bool = False


def _r2_single_eps(energy, eps, xi1, xi2, c0, h):
    """Unnormalized assembly at one eps (no extrapolation)."""
    base = SigmaArgs(energy, eps, xi1, xi2, xi1, xi2)
    d_pm = _mixed_prime_derivative(lambda a: sigma_rpm(a, c0), base, h)
    d_pp = sigma_rpp_mixed_derivative(base)
    # -+ and -- are the conjugates of +- and ++ at real offsets, so the
    # four-sector combination reduces to 2 Re of the difference; the overall
    # (2 pi)^{-2} is absorbed into the r -> infinity normalization below
    return (d_pm.real - d_pp.real) / (2.0 * math.pi**2)


def _extrapolate(values, ladder):
    """Richardson table for a geometric eps ladder (ratio 2), with error est."""
    if len(values) == 1:
        return values[0], math.inf
    rows = [list(values)]
    for k in range(1, len(values)):
        fac = 2.0**k
        prev = rows[-1]
        rows.append([(fac * prev[i + 1] - prev[i]) / (fac - 1.0)
                     for i in range(len(prev) - 1)])
    best = rows[-1][0]
    err = abs(best - rows[-2][-1])
    return best, err


def r2_from_generalized(energy, eps, xi1, xi2, c0, h=1e-3, *,
                        normalize=True, r_ref=5.0):
    """Rescaled two-point correlation from the sigma-model correlators.

    Parameters
    ----------
    energy : float
        Bulk energy E.
    eps : float or descending sequence of floats
        Regularization; a sequence is treated as a Richardson ladder (each
        entry half the previous) and extrapolated to eps -> 0.
    xi1, xi2 : float
        Rescaled level positions; only the separation xi1 - xi2 matters.
    c0 : float
        Sigma-model coupling (see ``calibrate_c0``).
    h : float
        Step of the mixed finite-difference derivative.
    normalize : bool
        Divide by the same-pipeline value at separation ``r_ref`` so the
        large-separation limit is exactly 1 (normalization convention; the
        absolute prefactor chain is not fixed by the limit formulas alone).

    Returns
    -------
    R2Limit
    """
    ladder = tuple(np.atleast_1d(np.asarray(eps, dtype=float)))
    if any(e <= 0 for e in ladder):
        raise ValueError("eps values must be positive")
    if len(ladder) > 1:
        steps = np.diff(ladder)
        if np.any(steps >= 0):
            raise ValueError("eps ladder must be strictly descending")
    warned = warn_outside_sigma_regime(energy)

    def assembled(x1, x2):
        vals = [_r2_single_eps(energy, e, x1, x2, c0, h) for e in ladder]
        return _extrapolate(vals, ladder)

    raw, err = assembled(xi1, xi2)
    norm = 1.0
    if normalize:
        center = (complex(xi1) + complex(xi2)).real / 2.0
        ref, _ = assembled(center + r_ref / 2.0, center - r_ref / 2.0)
        if ref == 0:
            raise ZeroDivisionError("normalization reference vanished")
        norm = ref
    return R2Limit(value=raw / norm, eps_error=abs(err / norm), ladder=ladder,
                   normalization=norm, regime_warning=warned)


@dataclass(frozen=True)
class Calibration:
    """Outcome of the c0 scan: the chosen value and everything it beat."""

    c0: float
    probe_residual: float
    validation_residual: float
    candidates: tuple
    candidate_residuals: tuple
    probes: tuple
    validation_point: float


def _probe_residual(energy, c0, rs, eps_ladder, h):
    worst = 0.0
    for r in rs:
        got = r2_from_generalized(energy, eps_ladder, r / 2.0, -r / 2.0, c0, h).value
        worst = max(worst, abs(got - gue_r2(r)))
    return worst


def calibrate_c0(energy=0.0, probes=(0.5, 1.5), validation_point=0.25, *,
                 eps_ladder=DEFAULT_EPS_LADDER, h=1e-3, tol=1e-3,
                 c0_min=0.25, c0_max=10.0, scan_step=0.05):
    """Fix the unprinted sigma-model coupling c0 by matching the GUE curve.

    The matching condition at half-integer probe separations is satisfied by
    a discrete family of couplings (the assembled curve agrees with the GUE
    one exactly when (2 + c0) r lands on even integers), so the probe scan
    typically finds several candidates.  A quarter-integer validation
    separation disambiguates; the smallest candidate that also matches there
    wins.  All candidates and residuals are reported for the run metadata.
    """
    from scipy.optimize import minimize_scalar

    grid = np.arange(c0_min, c0_max + scan_step / 2.0, scan_step)
    res = np.array([_probe_residual(energy, c, probes, eps_ladder, h) for c in grid])
    candidates = []
    cand_res = []
    for i in range(1, len(grid) - 1):
        if res[i] <= res[i - 1] and res[i] <= res[i + 1] and res[i] < 50 * tol:
            bracket = (grid[i - 1], grid[i + 1])
            refined = minimize_scalar(
                lambda c: _probe_residual(energy, c, probes, eps_ladder, h),
                bounds=bracket, method="bounded",
                options={"xatol": 1e-10})
            if refined.fun < tol:
                candidates.append(float(refined.x))
                cand_res.append(float(refined.fun))
    if not candidates:
        raise RuntimeError(
            "no c0 in the scan range matches the GUE curve at the probes")
    chosen = None
    chosen_val = None
    for c, pr in zip(candidates, cand_res):
        vres = _probe_residual(energy, c, (validation_point,), eps_ladder, h)
        if vres < tol:
            chosen, chosen_res, chosen_val = c, pr, vres
            break
    if chosen is None:
        raise RuntimeError(
            f"candidates {candidates} match the probes but none matches the "
            f"validation separation {validation_point}")
    return Calibration(c0=chosen, probe_residual=chosen_res,
                       validation_residual=chosen_val,
                       candidates=tuple(candidates),
                       candidate_residuals=tuple(cand_res),
                       probes=tuple(probes), validation_point=validation_point)
