"""Unfolded eigenvalue pair correlation in the two regimes.

Wide band: neighboring eigenvalues repel and the pair density climbs from
0 at coincidence to 1 by a little past one mean spacing -- the GUE shape.
Narrow band at the same matrix size: localized eigenvectors do not talk to
each other, repulsion disappears, and the pair density is flat at 1
(Poisson).  Same code, same unfolding, only the bandwidth moves.
"""

from rbmlab import (
    EnsembleSpec,
    build_variance_profile,
    gue_r2,
    pair_correlation,
)

SAMPLES = 60


def run(kind, n, w, label):
    spec = EnsembleSpec(profile=build_variance_profile(kind, n, w), seed=12)
    hist = pair_correlation(spec, 0.0, 20.0, 8, SAMPLES, r_max=3.2)
    print(f"\n{label}: {kind} band, N={n}, W={w}, {hist.samples} samples")
    print(f"{'r':>5}  {'density':>8}  {'gue_r2':>7}")
    for c, d in zip(hist.centers(), hist.density):
        print(f"{c:5.2f}  {d:8.3f}  {gue_r2(c):7.3f}")


run("simple", 512, 256, "wide band (delocalized)")
run("simple", 1024, 4, "narrow band (localized)")

print("\nwide tracks the repulsion curve.  narrow is already flat-ish at one")
print("mean spacing and beyond: the deep dip below r=1 is gone, save for a")
print("residue at the shortest distances from levels that share a")
print("localization region.  the plateau sits a few percent under 1 at this")
print("modest size; push N up at fixed W and it settles onto 1.")
