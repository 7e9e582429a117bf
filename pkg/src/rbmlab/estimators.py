"""Monte Carlo estimators: spectral density, determinant ratios, pair statistics.

This is the sampling route to the same observables the transfer-operator and
closed-form modules compute independently.  Estimates come from three kinds
of per-sample work: banded eigensolves (density, pair correlation), coupled
log-determinant pairs (the characteristic-polynomial correlator), and
regularized determinant ratios (the one-point generalized correlator).

Determinism contract: every estimator is a pure function of
(spec.seed, samples).  Matrix entries come from the per-entry counter RNG,
samples are processed in fixed-size index blocks, and block results are
merged in index order -- so any worker count, including a fresh process
pool, reproduces the result bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial
from multiprocessing import get_context

import numpy as np

from .band_linalg import SingularPivotError, eigenvalues, shifted_logdet
from .ensembles import EnsembleSpec, sample
from .limits import (
    rho_sc,
    semicircle_cdf,
    warn_outside_r1_regime,
    warn_outside_sigma_regime,
)

# samples per work block; block boundaries depend only on the sample count,
# never on the worker count, so merge order (and rounding) is fixed
_BLOCK = 64

# replacement attempts when a real-shift factorization hits an exact zero
# pivot; each attempt moves to a fresh, deterministic sample index
_MAX_RESAMPLE = 64


@dataclass(frozen=True)
class SpectralArgs:
    """Bulk energy and rescaled offsets shared by the ratio estimators.

    The microscopic shifts are derived per matrix size: the coupled
    correlator uses the real pair E +- xi/(N rho(E)), the regularized
    one-point ratio uses offsets of size 1/N with +i eps/N damping.
    """

    energy: float
    xi: float = 0.0
    eps: float = 1.0

    def __post_init__(self):
        if not abs(self.energy) < 2.0:
            raise ValueError("bulk energy needs |E| < 2")
        if not self.eps > 0:
            raise ValueError("eps must be positive")

    def level_pair(self, size):
        """Real shift pair E +- xi/(N rho(E))."""
        step = self.xi / (size * rho_sc(self.energy))
        return self.energy + step, self.energy - step

    def ratio_shifts(self, size, placement="shared"):
        """(numerator, denominator) shifts for the one-point ratio.

        ``shared`` gives both arguments the same +i eps/N damping (the
        numerator adds its real xi/N offset on top); ``split`` keeps the
        numerator shift purely real.  The choice is observable at finite
        eps, so callers must record it next to their results.
        """
        den = complex(self.energy, self.eps / size)
        if placement == "shared":
            return den + self.xi / size, den
        if placement == "split":
            return complex(self.energy + self.xi / size, 0.0), den
        raise ValueError("placement must be 'shared' or 'split'")


@dataclass(frozen=True)
class MCEstimate:
    """Sample mean with its error bar and the shared log-scale it sits on."""

    mean: complex
    stderr: float
    count: int
    exponent_offset: float = 0.0


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    density: np.ndarray
    stderr: np.ndarray
    samples: int
    skipped: int = 0

    def centers(self):
        return 0.5 * (self.edges[:-1] + self.edges[1:])


# ---------------------------------------------------------------------------
# worker plumbing
# ---------------------------------------------------------------------------

def _blocks(samples):
    return [(s, min(s + _BLOCK, samples)) for s in range(0, samples, _BLOCK)]


def _map_blocks(fn, samples, workers):
    """Run ``fn`` over fixed index blocks, results in block order."""
    blocks = _blocks(samples)
    if workers is None or workers <= 1 or len(blocks) <= 1:
        return [fn(b) for b in blocks]
    ctx = get_context("fork")
    with ctx.Pool(processes=min(workers, len(blocks))) as pool:
        return pool.map(fn, blocks)


# ---------------------------------------------------------------------------
# density of states
# ---------------------------------------------------------------------------

def _dos_block(block, spec, edges):
    lo, hi = block
    nbin = len(edges) - 1
    counts = np.zeros(nbin, dtype=np.int64)
    sum_d = np.zeros(nbin)
    sum_d2 = np.zeros(nbin)
    skipped = 0
    per_sample_norm = spec.profile.size
    for idx in range(lo, hi):
        h = sample(spec, idx)
        try:
            ev = eigenvalues(h)
        except np.linalg.LinAlgError:
            skipped += 1
            continue
        c, _ = np.histogram(ev, bins=edges)
        counts += c
        d = c / per_sample_norm
        sum_d += d
        sum_d2 += d * d
    return counts, sum_d, sum_d2, skipped


def dos_histogram(spec, bins, samples, *, workers=1):
    """Pooled eigenvalue histogram, normalized per matrix.

    ``bins`` is either a bin count (spread over [-2.5, 2.5]) or an explicit
    edge array.  ``density`` is mass per unit length so the semicircle is the
    directly comparable curve; per-bin standard errors come from the spread
    across samples.  Samples whose eigensolve fails are skipped and counted.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    if np.ndim(bins) == 0:
        edges = np.linspace(-2.5, 2.5, int(bins) + 1)
    else:
        edges = np.asarray(bins, dtype=float)
    widths = np.diff(edges)
    if np.any(widths <= 0):
        raise ValueError("bin edges must increase")

    parts = _map_blocks(partial(_dos_block, spec=spec, edges=edges), samples, workers)
    counts = np.zeros(len(edges) - 1, dtype=np.int64)
    sum_d = np.zeros(len(edges) - 1)
    sum_d2 = np.zeros(len(edges) - 1)
    skipped = 0
    for c, s1, s2, sk in parts:
        counts += c
        sum_d += s1
        sum_d2 += s2
        skipped += sk
    used = samples - skipped
    if used == 0:
        raise RuntimeError("every sample failed to diagonalize")
    density = counts / (used * spec.profile.size * widths)
    mean_d = sum_d / used
    var_d = np.maximum(sum_d2 / used - mean_d**2, 0.0)
    stderr = np.sqrt(var_d / max(used - 1, 1)) / widths
    return Histogram(edges=edges, counts=counts, density=density,
                     stderr=stderr, samples=used, skipped=skipped)


# ---------------------------------------------------------------------------
# coupled characteristic-polynomial correlator
# ---------------------------------------------------------------------------

def _logdet_resampled(spec, idx, samples, shifts):
    """Log-determinants at several real shifts of one sampled matrix.

    An exact zero pivot (possible for real shifts) discards the draw and
    moves to index + samples, + 2*samples, ... -- a deterministic
    replacement stream disjoint from every other sample's, so the result
    does not depend on which worker hits the failure.
    """
    for attempt in range(_MAX_RESAMPLE):
        h = sample(spec, idx + attempt * samples)
        try:
            return [shifted_logdet(h, z) for z in shifts], attempt
        except SingularPivotError:
            continue
    raise RuntimeError(f"sample {idx}: {_MAX_RESAMPLE} singular draws in a row")


def _charpoly_block(block, spec, samples, lam1, lam2, center):
    lo, hi = block
    rows = np.empty((hi - lo, 4))
    resampled = 0
    for k, idx in enumerate(range(lo, hi)):
        (ld1, ld2, ld0), extra = _logdet_resampled(
            spec, idx, samples, (lam1, lam2, center))
        resampled += extra
        phase = ld1.phase * ld2.phase
        rows[k] = (ld1.log_abs + ld2.log_abs, phase.real,
                   2.0 * ld0.log_abs, phase.imag)
    return rows, resampled


def charpoly_ratio(spec, args, samples, *, workers=1):
    """Ratio of the two-determinant correlator to its coincident value.

    Numerator det(H - lam1) det(H - lam2) and denominator det(H - E)^2 are
    evaluated on the SAME draw of H, in log space, and averaged after
    subtracting one shared offset (the largest log magnitude seen), so the
    ratio of means is exact while neither mean alone ever overflows.  The
    error bar propagates the coupled fluctuations of numerator and
    denominator (delta method).
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    lam1, lam2 = args.level_pair(spec.profile.size)
    if args.xi == 0.0:
        # numerator equals denominator draw by draw
        return MCEstimate(mean=1.0 + 0.0j, stderr=0.0, count=samples,
                          exponent_offset=0.0)
    parts = _map_blocks(
        partial(_charpoly_block, spec=spec, samples=samples,
                lam1=complex(lam1), lam2=complex(lam2),
                center=complex(args.energy)),
        samples, workers)
    rows = np.concatenate([p[0] for p in parts], axis=0)
    log_num, ph_re, log_den, ph_im = rows.T
    offset = float(max(log_num.max(), log_den.max()))
    x = (ph_re + 1j * ph_im) * np.exp(log_num - offset)
    y = np.exp(log_den - offset)
    mx = complex(np.mean(x))
    my = float(np.mean(y))
    ratio = mx / my
    vx = float(np.mean(np.abs(x - mx) ** 2))
    vy = float(np.mean((y - my) ** 2))
    cxy = complex(np.mean((x - mx) * (y - my)))
    var_ratio = (vx / my**2 + (abs(mx) ** 2) * vy / my**4
                 - 2.0 * (np.conj(mx) * cxy).real / my**3) / samples
    return MCEstimate(mean=ratio, stderr=math.sqrt(max(var_ratio, 0.0)),
                      count=samples, exponent_offset=offset)


def charpoly_typical_ratio(spec, args, samples, *, workers=1):
    """Typical (geometric-mean) modulus of the coupled determinant ratio.

    Averages log |det(H - lam1) det(H - lam2) / det(H - E)^2| over draws and
    exponentiates.  Deep in the narrow-band regime the arithmetic mean that
    charpoly_ratio estimates is carried by draws many standard deviations up
    the log tail: the importance weights collapse onto the single largest
    draw, the returned value is that one draw's ratio, and the delta-method
    error bar is meaningless.  (Observed at size 1024, bandwidth 8: the log
    denominator has standard deviation ~18, the top weight holds ~100% of
    the total, and repeat runs return 0.07 and 18 for the same quantity.)
    The typical modulus stays measurable with an honest error bar there and
    tends to the same collapse limit of 1; phases are discarded, so this is
    a magnitude statistic only.  Error bar: delta-method transfer of the
    log-mean's standard error.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    lam1, lam2 = args.level_pair(spec.profile.size)
    if args.xi == 0.0:
        return MCEstimate(mean=1.0 + 0.0j, stderr=0.0, count=samples,
                          exponent_offset=0.0)
    parts = _map_blocks(
        partial(_charpoly_block, spec=spec, samples=samples,
                lam1=complex(lam1), lam2=complex(lam2),
                center=complex(args.energy)),
        samples, workers)
    rows = np.concatenate([p[0] for p in parts], axis=0)
    log_ratio = rows[:, 0] - rows[:, 2]
    mean_log = float(np.mean(log_ratio))
    se_log = (float(np.std(log_ratio, ddof=1)) / math.sqrt(samples)
              if samples > 1 else 0.0)
    est = math.exp(mean_log)
    return MCEstimate(mean=complex(est), stderr=est * se_log,
                      count=samples, exponent_offset=0.0)


# ---------------------------------------------------------------------------
# regularized one-point ratio
# ---------------------------------------------------------------------------

def _r1_block(block, spec, z_num, z_den):
    lo, hi = block
    vals = np.empty(hi - lo, dtype=np.complex128)
    for k, idx in enumerate(range(lo, hi)):
        h = sample(spec, idx)
        num = shifted_logdet(h, z_num)
        den = shifted_logdet(h, z_den)
        vals[k] = (num.phase / den.phase) * math.exp(num.log_abs - den.log_abs)
    return vals


def _median_of_means(values, groups):
    """Coordinatewise median of group means with a robust spread estimate."""
    chunks = np.array_split(values, groups)
    means = np.array([np.mean(c) for c in chunks])
    med = complex(np.median(means.real), np.median(means.imag))
    mad = math.hypot(float(np.median(np.abs(means.real - med.real))),
                     float(np.median(np.abs(means.imag - med.imag))))
    # 1.4826 MAD -> std of a group mean; 1.2533/sqrt(G) -> std of the median
    spread = 1.2533 * 1.4826 * mad / math.sqrt(len(means))
    return med, spread


def r1_ratio(spec, args, samples, *, workers=1, placement="shared", groups=16):
    """Median-of-means estimate of the regularized determinant ratio.

    Per draw: det(H - z_num)/det(H - z_den) with shifts from
    ``SpectralArgs.ratio_shifts`` (the +i eps/N damping keeps the
    denominator away from the spectrum; ``placement`` picks whether the
    numerator carries the same damping).  The per-sample ratio is heavy
    tailed, so ``samples`` draws are split into ``groups`` index blocks and
    the group means are combined by a coordinatewise median with a
    MAD-based error bar.
    """
    if samples < groups:
        raise ValueError("need at least one sample per group")
    warn_outside_r1_regime(args.energy)
    z_num, z_den = args.ratio_shifts(spec.profile.size, placement)
    parts = _map_blocks(
        partial(_r1_block, spec=spec, z_num=z_num, z_den=z_den),
        samples, workers)
    vals = np.concatenate(parts)
    med, spread = _median_of_means(vals, groups)
    return MCEstimate(mean=med, stderr=spread, count=samples,
                      exponent_offset=0.0)


# ---------------------------------------------------------------------------
# unfolded pair correlation
# ---------------------------------------------------------------------------

def pair_histogram(windows, halfwidth, bins, r_max):
    """Histogram of pairwise distances from per-sample unfolded positions.

    ``windows`` is an iterable of 1d arrays, each holding one sample's
    level positions in units of the mean spacing, already centered so the
    window is [-halfwidth, halfwidth].  Normalization divides by the
    Poisson pair count (T - r) dr per sample, so independent levels at unit
    density give a flat histogram at 1.  Windows with fewer than two levels
    cannot form a pair and are skipped (counted).
    """
    edges = np.linspace(0.0, r_max, bins + 1)
    width = edges[1] - edges[0]
    span = 2.0 * halfwidth
    counts = np.zeros(bins, dtype=np.int64)
    sum_d = np.zeros(bins)
    sum_d2 = np.zeros(bins)
    used = 0
    skipped = 0
    # expected ordered-pair count in a bin for one unit-density window
    baseline = (span - edges[:-1] - 0.5 * width) * width
    for u in windows:
        u = np.asarray(u, dtype=float)
        if u.size < 2:
            skipped += 1
            continue
        used += 1
        diffs = np.abs(u[:, None] - u[None, :])[np.triu_indices(u.size, 1)]
        c, _ = np.histogram(diffs, bins=edges)
        counts += c
        d = c / baseline
        sum_d += d
        sum_d2 += d * d
    if used == 0:
        raise RuntimeError("no window contained a level pair")
    density = counts / (used * baseline)
    mean_d = sum_d / used
    var_d = np.maximum(sum_d2 / used - mean_d**2, 0.0)
    stderr = np.sqrt(var_d / max(used - 1, 1))
    return Histogram(edges=edges, counts=counts, density=density,
                     stderr=stderr, samples=used, skipped=skipped)


def _paircorr_block(block, spec, energy, halfwidth):
    lo, hi = block
    n = spec.profile.size
    out = []
    for idx in range(lo, hi):
        h = sample(spec, idx)
        ev = eigenvalues(h)
        u = n * (semicircle_cdf(ev) - semicircle_cdf(energy))
        out.append(u[np.abs(u) <= halfwidth])
    return out


def pair_correlation(spec, energy, halfwidth, bins, samples, *,
                     workers=1, r_max=None):
    """Unfolded two-point correlation around one bulk energy.

    Eigenvalues are unfolded through the integrated semicircle (analytic,
    not the empirical staircase), levels within ``halfwidth`` mean spacings
    of E are kept, and all pairwise distances are histogrammed with the
    Poisson baseline normalized to 1.
    """
    if not abs(energy) < 1.8:
        raise ValueError("window must stay inside the bulk, |E| < 1.8")
    if samples < 1:
        raise ValueError("need at least one sample")
    warn_outside_sigma_regime(energy)
    if r_max is None:
        r_max = min(4.0, halfwidth)
    parts = _map_blocks(
        partial(_paircorr_block, spec=spec, energy=energy, halfwidth=halfwidth),
        samples, workers)
    windows = [u for p in parts for u in p]
    return pair_histogram(windows, halfwidth, bins, r_max)
