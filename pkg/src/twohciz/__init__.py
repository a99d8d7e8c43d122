"""Two-HCIZ dressed Gaussian matrix model for non-intersecting Brownian bridges.

Exact finite-n evaluation of the HCIZ integral and of the bridge partition
function, samplers for the eigenvalue law and for the matrix model, and
residual checks of the exact identities the model satisfies.
"""
from .boundary import BoundaryData, as_boundary, cluster_points
from .config import ChainConfig, ConfigError, RunConfig, load_config, parse_config
from .ensemble import (
    MatrixDraws,
    MomentSet,
    StatisticsError,
    batch_means,
    closed_form_moments,
    conditional_mean,
    eigenvector_overlap_stats,
    sample_external_field_matrix,
    sample_two_hciz_matrix,
    spectral_moment_estimate,
)
from .hciz import (
    ConfluenceError,
    h_poly,
    hciz,
    hciz_confluent_log,
    hciz_exponent,
    hciz_log,
    hciz_log_gradients,
    hciz_mc_estimate,
    sample_weighted_unitary,
)
from .identities import (
    MiwaTimes,
    VerificationReport,
    andreief_consistency_check,
    cross_term_exact,
    euler_log_partition,
    flow_and_duality_check,
    flow_rate,
    hirota_toda_check,
    log_confluent_tau,
    log_partition_collapsed,
    log_partition_gradients,
    miwa_times,
    mop_construct_and_verify,
    ward_dilation_check,
    ward_l_minus1_check,
)
from .km import (
    DegeneracyError,
    TimeParameter,
    exact_linear_statistic,
    heat_kernel,
    km_log_density,
    km_log_density_batch,
    km_normalization_log,
    km_normalization_quadrature,
    sample_km_mcmc,
)
from .linalg import SignedLogValue, make_rng, sample_gue, sample_haar_unitary, signed_log_det

__version__ = "0.1.0"
