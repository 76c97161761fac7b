"""gabfock: Gabor frame bounds for the Gaussian window on square
lattices near critical density, via Fock-space sampling.

The package computes two-sided frame-bound estimates A(a), B(a) for
time-frequency shifts of the Gaussian along a Z^2, certifies the upper
branch through Wiener-amalgam (Walnut) sums, produces lower-bound
witnesses from canonical dual windows, and builds the extremal entire
functions whose lattice-to-norm ratio pins the A(a) = O(1 - a^2) decay
rate.  See the README for the command-line entry points.
"""

from .errors import (AreaMismatchError, ConfigError, ConvergenceError,
                     DivergenceError, EnvelopeMissingError,
                     ExtentTooSmallError, GabfockError,
                     NoIntegerInRangeError, NumericError, OutOfRegimeError,
                     RadiusTooSmallError, RegimeError, RimNotNegligibleError,
                     TailNotCertifiedError)
from .phase_space import (GAUSSIAN, GaussianWindow, LineQuadrature,
                          PhasePoint, SechWindow, SquareLattice,
                          amalgam_norm, gabor_coefficient,
                          gaussian_l2_norm_sq, hermite_eval, hermite_matrix,
                          hermite_series, line_quadrature_for, tf_shift)
from .bargmann import (DEFAULT_C0, FockFunction, MonomialExpansion,
                       PlanarQuadrature, ZeroBased, bargmann_transform,
                       fock_norm_sq, fock_shift, integrate_plane, monomial,
                       phi_test, reproducing_eval, sampling_sum)
from .frame_bounds import (BoundsReport, DualWindow, GramMatrix,
                           SpectralExtremes, b_lower_probe, build_gram,
                           canonical_dual, default_rho,
                           estimate_frame_bounds, lambda_extremes, theta_sum,
                           walnut_upper_bound)
from .sigma import (SigmaEvaluator, default_rho_sigma, growth_check,
                    sigma_logabs)
from .extremal import (ExtremalFunction, ExtremalReport, RadiusSelection,
                       SectorPartition, build_extremal, defect_sup,
                       extremal_report, inner_zeros, logabs_Fa,
                       norms_and_ratio, partition_annulus, select_radius,
                       truncated_sigma_identity, u_R_eval)

__version__ = "0.1.0"

__all__ = [
    "AreaMismatchError", "ConfigError", "ConvergenceError",
    "DivergenceError", "EnvelopeMissingError", "ExtentTooSmallError",
    "GabfockError", "NoIntegerInRangeError", "NumericError",
    "OutOfRegimeError", "RadiusTooSmallError", "RegimeError",
    "RimNotNegligibleError", "TailNotCertifiedError",
    "GAUSSIAN", "GaussianWindow", "LineQuadrature", "PhasePoint",
    "SechWindow", "SquareLattice", "amalgam_norm", "gabor_coefficient",
    "gaussian_l2_norm_sq", "hermite_eval", "hermite_matrix",
    "hermite_series", "line_quadrature_for", "tf_shift",
    "DEFAULT_C0", "FockFunction", "MonomialExpansion", "PlanarQuadrature",
    "ZeroBased", "bargmann_transform", "fock_norm_sq", "fock_shift",
    "integrate_plane", "monomial", "phi_test", "reproducing_eval",
    "sampling_sum",
    "BoundsReport", "DualWindow", "GramMatrix", "SpectralExtremes",
    "b_lower_probe", "build_gram", "canonical_dual", "default_rho",
    "estimate_frame_bounds", "lambda_extremes", "theta_sum",
    "walnut_upper_bound",
    "SigmaEvaluator", "default_rho_sigma", "growth_check", "sigma_logabs",
    "ExtremalFunction", "ExtremalReport", "RadiusSelection",
    "SectorPartition", "build_extremal", "defect_sup", "extremal_report",
    "inner_zeros", "logabs_Fa", "norms_and_ratio", "partition_annulus",
    "select_radius", "truncated_sigma_identity", "u_R_eval",
    "__version__",
]
