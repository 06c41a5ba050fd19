"""Series expansions of the Brownian bridge and Levy-area approximations.

The package covers: shifted Legendre polynomials; the sine-square moment /
Bernoulli / even-zeta machinery; deterministic counter-based Gaussian
streams with exact-in-law samplers for the expansion coefficients; truncated
bridge evaluation with the exact residual covariances and their limits; the
three Levy-area truncations with closed-form mean-squared errors plus the
covariance-matched cheap sampler and its subinterval stitching; and a
deterministic parallel Monte Carlo harness with log-log rate fitting.
"""

__version__ = "0.1.0"

from .bridge_expansions import (
    CovGrid,
    TruncatedBridgePath,
    bridge_cov,
    bridge_integral_cov,
    default_grid,
    fluctuation_scale,
    fourier_residual_cov,
    fourier_residual_cov_tail,
    kl_residual_cov,
    kl_residual_cov_tail,
    limit_fluctuation_cov,
    poly_residual_cov,
    residual_cov_grid,
    scaled_residual_cov,
    truncated_bridge_path,
    truncated_bridge_value,
)
from .gaussian_core import (
    KIND_FOURIER,
    KIND_KL,
    KIND_POLY,
    KINDS,
    CoefficientBatch,
    CoefficientSet,
    RngStream,
    sample_coefficients,
    sample_coefficients_batch,
    standard_normals,
)
from .legendre import (
    antiderivative_cross_integral,
    shifted_legendre,
    shifted_legendre_antiderivative,
)
from .levy_area import (
    METHOD_FOURIER,
    METHOD_KPW,
    METHOD_POLY,
    METHODS,
    VARIANT_DAVIE,
    VARIANT_FOSTER,
    VARIANTS,
    AntisymMatrix,
    asymptotic_constant,
    cheap_levy_area,
    exact_mse,
    gaussian_budget,
    level_for_budget,
    levy_area,
    levy_area_fourier,
    levy_area_kpw,
    levy_area_poly,
    stitched_levy_area,
)
from .mc_harness import (
    MCEstimate,
    RateFit,
    coupled_mse_exact,
    estimate_fluct_cov,
    estimate_mse,
    fit_rate,
)
from .zeta_moments import (
    BernoulliTable,
    MomentTable,
    bernoulli_numbers,
    inverse_square_tail,
    moment_identity_residual,
    sine_square_moment,
    sine_square_moment_closed,
    sine_square_moment_table,
    zeta_even,
)
