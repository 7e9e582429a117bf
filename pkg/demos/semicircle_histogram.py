"""Sampled eigenvalue density of a banded ensemble vs the semicircle.

Unit row sums in the variance profile pin the limiting density to the
semicircle on [-2, 2] regardless of bandwidth; the bandwidth only controls
how fast the bulk converges and what the eigenvectors look like.  A few
dozen draws at N=512 already lie on the curve to a couple of percent.
"""

import numpy as np

from rbmlab import EnsembleSpec, build_variance_profile, dos_histogram, rho_sc

N, W, SAMPLES = 512, 16, 40

profile = build_variance_profile("simple", N, W)
spec = EnsembleSpec(profile=profile, seed=2024)
hist = dos_histogram(spec, 40, SAMPLES)

centers = hist.centers()
target = rho_sc(centers)

print(f"simple band, N={N}, W={W}, {hist.samples} samples")
print(f"{'E':>7}  {'measured':>9}  {'rho_sc':>7}  {'diff':>7}")
for c, d, t in zip(centers[::4], hist.density[::4], target[::4]):
    print(f"{c:7.2f}  {d:9.4f}  {t:7.4f}  {d - t:+7.4f}")

bulk = np.abs(centers) <= 1.5
sup = np.abs(hist.density - target)[bulk].max()
print(f"\nsup deviation over |E| <= 1.5: {sup:.4f}")
print("edge bins deviate more: the semicircle vanishes with infinite slope")
print("at +-2 while any finite-N histogram smears over the bin width.")
