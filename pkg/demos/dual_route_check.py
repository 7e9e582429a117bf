"""Monte Carlo determinant correlator against the transfer-operator route.

The same ratio of characteristic-polynomial correlators is computed two
independent ways: by direct sampling of band matrices and by the spectral
decomposition of the transfer operator.  For the smooth profile the two
are linked by an exact identity, so agreement within error bars checks the
whole pipeline -- sampler, banded determinants, operator quadrature.

Second act: in the narrow-band regime the arithmetic estimator falls apart
(its mean is carried by draws far out in the log tail) while the typical
modulus of the same coupled ratio remains measurable and collapses to 1.
"""

from rbmlab import (
    EnsembleSpec,
    SpectralArgs,
    build_variance_profile,
    charpoly_ratio,
    charpoly_typical_ratio,
    transfer_ratio,
)

# --- act one: delocalized, both routes agree -------------------------------
N = W2 = 100
W = 50
SAMPLES = 2000

profile = build_variance_profile("smooth", N, W)
spec = EnsembleSpec(profile=profile, seed=5)

print(f"smooth band, N={N}, W={W}, {SAMPLES} samples")
print(f"{'xi':>5}  {'sampled':>18}  {'transfer':>9}  {'pull':>5}")
for xi in (0.25, 0.5, 1.0):
    est = charpoly_ratio(spec, SpectralArgs(0.0, xi), SAMPLES)
    want = transfer_ratio(N, W, 0.0, xi)
    pull = abs(est.mean - want) / est.stderr
    print(f"{xi:5.2f}  {est.mean.real:9.4f} +- {est.stderr:6.4f}"
          f"  {want.real:9.4f}  {pull:5.2f}")

# --- act two: narrow band, the estimators part ways ------------------------
N2, W2, SAMPLES2 = 1024, 8, 2000
spec2 = EnsembleSpec(profile=build_variance_profile("simple", N2, W2), seed=5)
args = SpectralArgs(0.0, 1.0)

arith = charpoly_ratio(spec2, args, SAMPLES2)
typical = charpoly_typical_ratio(spec2, args, SAMPLES2)

print(f"\nsimple band, N={N2}, W={W2}, xi=1, {SAMPLES2} samples")
print(f"  arithmetic ratio : {arith.mean.real:10.4f} +- {arith.stderr:.4f}"
      "   <- tail-degenerate, do not trust")
print(f"  typical modulus  : {typical.mean.real:10.4f} +- {typical.stderr:.4f}"
      "   <- the measurable collapse statistic")
print("\nthe arithmetic mean of a wildly lognormal ratio sits many standard")
print("deviations above every draw you will ever see; the geometric mean is")
print("what a finite experiment can certify, and it lands on the localized")
print("limit of 1.")
