#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cghd/estimator.hpp"
#include "cghd/rng.hpp"

namespace cghd {

/// Documented default master seed for every stochastic entry point.
inline constexpr std::uint64_t kDefaultMasterSeed = 123456789ULL;

struct PhaseScan {
  double lo;  // radians
  double hi;
  int count;
};

/// Full simulated-experiment configuration. Defaults follow the reference
/// experiment: phi0 = -0.02 deg, nu = 25, 40 repeats, 1000 samples at each of
/// 150 scan phases in [-20 deg, 20 deg], 40 bootstrap resamples.
struct SimCampaignConfig {
  InterferometerConfig cfg;
  BinScheme scheme;
  double phi0 = -0.02 * kPi / 180.0;
  double phi_true = -0.02 * kPi / 180.0;
  int nu = 25;
  int repeats = 40;
  int samples_per_phase = 1000;
  PhaseScan phase_scan{-20.0 * kPi / 180.0, 20.0 * kPi / 180.0, 150};
  int bootstrap_resamples = 40;
  std::uint64_t master_seed = kDefaultMasterSeed;
  bool empirical_covariance = false;

  void validate() const;
};

/// Least-squares fit of (alpha, r) to a scanned set of bin probabilities.
struct FitResult {
  double alpha_hat = 0.0;
  double r_hat = 0.0;
  double residual = 0.0;  // sum of squared probability residuals
};

/// One simulated estimation campaign at a fixed true phase.
struct TrialReport {
  double phi_true = 0.0;
  std::vector<double> estimates;       // one per repeat (radians)
  double dphi_std = 0.0;               // sample std over repeats
  double dphi_bootstrap_err = 0.0;     // bootstrap SE of dphi_std
  double dphi2_bootstrap_err = 0.0;    // bootstrap SE of dphi_std^2
  double crb_predicted = 0.0;          // sqrt(1/(nu F_M(phi_true))), radians
  double dphi_predicted = 0.0;         // frozen-weight delta-method error at
                                       // phi_true; equals crb_predicted at
                                       // phi0 (and everywhere for M = 2)
  int saturated_repeats = 0;           // clamped to the calibration-range end
  std::vector<int> excluded_bins;      // probability-floor exclusions at phi_true
  bool degenerate_statistics = false;  // repeats == 1
};

/// n i.i.d. Gaussian quadrature draws; bitwise reproducible for a fixed seed.
std::vector<double> sample_quadratures(const InterferometerConfig& cfg,
                                       double phi, int n, std::uint64_t seed);

struct BinFrequencies {
  std::vector<double> freqs;  // over assigned samples
  long assigned = 0;
  long out_of_range = 0;  // only populated in Finite outer mode
};

/// Histogram of samples over a scheme. Infinite outer mode assigns
/// out-of-range samples to the edge bins; Finite mode drops and counts them.
BinFrequencies empirical_bin_frequencies(std::span<const double> samples,
                                         const BinScheme& scheme);

/// One scanned phase: the phase and the measured bin frequencies.
struct PhasePoint {
  double phi;
  std::vector<double> freqs;
};

FitResult fit_probability_model(std::span<const PhasePoint> scan,
                                const BinScheme& scheme);

/// Scan + fit + weight + calibration, built once at phi0 and reusable across
/// true phases (the campaign's calibrated half).
struct CalibratedPipeline {
  FitResult fit;
  MomentEstimator estimator;
  std::vector<PhasePoint> scan;
};

CalibratedPipeline calibrate_pipeline(const SimCampaignConfig& config);

/// Estimation trials against an already-calibrated pipeline.
TrialReport run_trials(const CalibratedPipeline& pipeline,
                       const SimCampaignConfig& config, double phi_true);

/// Full pipeline: scan, fit, weights, calibration, nu-repetition trials,
/// bootstrap error bars and the predicted Cramer-Rao bound.
TrialReport run_campaign(const SimCampaignConfig& config);

/// Per-phase campaign with weights and calibration fixed at phi0.
std::vector<TrialReport> phase_range_scan(const SimCampaignConfig& config,
                                          std::span<const double> phi_grid);

/// Classical reference: ideal fine-grained homodyne without squeezing,
/// estimator phi = -2 asin(mean(p)/(2 alpha)).
TrialReport run_classical_ideal(double alpha, double phi_true, int nu,
                                int repeats, int bootstrap_resamples,
                                std::uint64_t master_seed);

/// Analytic error of the classical ideal reference at phase phi.
double classical_ideal_dphi(double alpha, int nu, double phi);

/// Enhancement 10 log10(dphi2_classical / dphi2_quantum) in dB.
double enhancement_db(double dphi2_quantum, double dphi2_classical);

/// First |phi| where the quantum error curve crosses above the classical
/// baseline, from a quadratic fit of the log error ratio; nullopt when no
/// crossing lies inside the scanned interval.
std::optional<double> quantum_advantage_crossing(std::span<const double> phi,
                                                 std::span<const double> quantum_err,
                                                 std::span<const double> classical_err);

}  // namespace cghd
