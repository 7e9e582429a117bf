"""rbmlab: numerical laboratory for 1d random band matrices.

Two independent routes to the localization/delocalization crossover --
Monte Carlo over sampled band matrices and spectral analysis of transfer
operators -- plus the closed-form limit laws both must reproduce.
"""

from .band_linalg import LogDet, SingularPivotError, eigenvalues, shifted_logdet
from .ensembles import (
    EnsembleSpec,
    HermitianBandMatrix,
    VarianceProfile,
    build_variance_profile,
    sample,
)
from .estimators import (
    Histogram,
    MCEstimate,
    SpectralArgs,
    charpoly_ratio,
    charpoly_typical_ratio,
    dos_histogram,
    pair_correlation,
    r1_ratio,
)
from .limits import (
    Calibration,
    R2Limit,
    RegimeWarning,
    calibrate_c0,
    gue_r2,
    r2_from_generalized,
    rho_sc,
    semicircle_cdf,
    sine_kernel_ratio,
)
from .transfer_spectra import (
    ConvergenceError,
    constants,
    MehlerSpectrum,
    TransferRatio,
    intermediate_limit,
    k0_spectrum,
    mehler_spectrum,
    reduced_kernel,
    transfer_ratio,
)

__version__ = "0.1.0"

__all__ = [
    "Calibration",
    "ConvergenceError",
    "EnsembleSpec",
    "HermitianBandMatrix",
    "Histogram",
    "LogDet",
    "MCEstimate",
    "MehlerSpectrum",
    "R2Limit",
    "RegimeWarning",
    "SingularPivotError",
    "SpectralArgs",
    "TransferRatio",
    "VarianceProfile",
    "build_variance_profile",
    "calibrate_c0",
    "charpoly_ratio",
    "charpoly_typical_ratio",
    "constants",
    "dos_histogram",
    "eigenvalues",
    "gue_r2",
    "intermediate_limit",
    "k0_spectrum",
    "mehler_spectrum",
    "pair_correlation",
    "r1_ratio",
    "r2_from_generalized",
    "reduced_kernel",
    "rho_sc",
    "sample",
    "semicircle_cdf",
    "shifted_logdet",
    "sine_kernel_ratio",
    "transfer_ratio",
]
