"""Phase estimation under coarse-grained homodyne detection.

Thin Python surface over the C++ core: binned Gaussian quadrature
statistics, Fisher-information ratios, bin optimization, method-of-moments
weights and calibration, and seeded Monte Carlo estimation campaigns.
"""

from cghd._core import (  # noqa: F401
    DEFAULT_MASTER_SEED,
    BinScheme,
    Binning,
    CoarseFisher,
    FitResult,
    InterferometerConfig,
    MomentEstimator,
    OptimizedBins,
    OuterMode,
    PhaseScan,
    SaturationError,
    ScalingRow,
    SimCampaignConfig,
    TrialReport,
    __version__,
    bin_prob_derivative,
    bin_probabilities,
    calibration_curve,
    classical_ideal_dphi,
    coarse_fisher,
    covariance,
    default_range,
    deg_to_rad,
    empirical_bin_frequencies,
    enhancement_db,
    equal_bins,
    estimator_variance,
    fisher_ratio,
    fisher_ratio_of_scheme,
    fit_probability_model,
    ideal_fisher,
    make_scheme,
    moments,
    optimal_weight,
    optimal_weight_from_covariance,
    optimize_bins,
    pdf,
    phase_range_scan,
    pseudoinverse_closed_form,
    pseudoinverse_svd,
    qfi,
    quantum_advantage_crossing,
    r_to_squeezing_db,
    rad_to_deg,
    reference_limits,
    run_campaign,
    run_classical_ideal,
    sample_quadratures,
    scaled_boundaries,
    scaling_sweep,
    squeezing_db_to_r,
)
