"""Spectra of the two integral operators behind the transfer route.

The bulk operator's eigenvalues follow 1 - j(j+1)/beta with beta = t* W^2,
so the spectral gap closes quadratically in the bandwidth: that is the
analytic origin of the n ~ W^2 crossover scale.  The half-line variant
(Mehler kernel) has geometrically spaced eigenvalues whose common ratio is
a closed-form function of the same constants.
"""

from rbmlab import constants, k0_spectrum, mehler_spectrum

W = 16
t_star = constants(0.0).t_star
beta = t_star * W * W

lam = k0_spectrum(t_star, W)
print(f"bulk operator, W={W}, beta = t* W^2 = {beta:.0f}")
print(f"{'j':>3}  {'eigenvalue':>12}  {'1 - j(j+1)/beta':>16}")
for j in range(6):
    series = 1.0 - j * (j + 1) / beta
    print(f"{j:3d}  {lam[j]:12.8f}  {series:16.8f}")

spec = mehler_spectrum(W, 2.0, full_output=True)
print(f"\nhalf-line kernel, W={W}, c=2")
print(f"predicted geometric ratio: {spec.predicted_ratio:.8f}")
print(f"{'j':>3}  {'eigenvalue':>12}  {'ratio to previous':>18}")
eig = spec.eigenvalues
for j in range(6):
    ratio = f"{eig[j] / eig[j - 1]:18.8f}" if j else " " * 18
    print(f"{j:3d}  {eig[j]:12.6e}  {ratio}")
print("\nboundary mass of the top eigenfunction:", f"{spec.boundary_mass:.2e}")
print("(tiny: the half-line spectrum is insensitive to the far boundary)")
