#include "cghd/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Dense>

#include "cghd/nelder_mead.hpp"

namespace cghd {

namespace {

double sample_std(std::span<const double> v) {
  const size_t n = v.size();
  if (n < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1));
}

int bin_index_clamped(double x, const std::vector<double>& b) {
  // Bin k covers [b_k, b_{k+1}); outside values land on the edge bins.
  const int M = static_cast<int>(b.size()) - 1;
  const auto it = std::upper_bound(b.begin(), b.end(), x);
  int k = static_cast<int>(it - b.begin()) - 1;
  return std::clamp(k, 0, M - 1);
}

bool in_range(double x, const std::vector<double>& b) {
  return x >= b.front() && x <= b.back();
}

}  // namespace

void SimCampaignConfig::validate() const {
  cfg.validate();
  scheme.validate();
  if (nu < 1) throw std::invalid_argument("SimCampaignConfig: nu must be >= 1");
  if (repeats < 1) throw std::invalid_argument("SimCampaignConfig: repeats must be >= 1");
  if (samples_per_phase < 1)
    throw std::invalid_argument("SimCampaignConfig: samples_per_phase must be >= 1");
  if (bootstrap_resamples < 1)
    throw std::invalid_argument("SimCampaignConfig: bootstrap_resamples must be >= 1");
  if (phase_scan.count < 3)
    throw std::invalid_argument("SimCampaignConfig: phase scan needs >= 3 points");
  if (!(phase_scan.hi > phase_scan.lo))
    throw std::invalid_argument("SimCampaignConfig: empty phase scan range");
  if (phi0 < phase_scan.lo || phi0 > phase_scan.hi)
    throw std::invalid_argument("SimCampaignConfig: phase scan must contain phi0");
}

std::vector<double> sample_quadratures(const InterferometerConfig& cfg,
                                       double phi, int n, std::uint64_t seed) {
  cfg.validate();
  if (n < 1) throw std::invalid_argument("sample_quadratures: n must be >= 1");
  const auto [mean, variance] = moments(cfg, phi);
  const double sigma = std::sqrt(variance);
  Rng rng(seed);
  std::vector<double> out(n);
  for (double& x : out) x = rng.normal(mean, sigma);
  return out;
}

BinFrequencies empirical_bin_frequencies(std::span<const double> samples,
                                         const BinScheme& scheme) {
  scheme.validate();
  if (samples.empty())
    throw std::invalid_argument("empirical_bin_frequencies: no samples");
  const bool finite = scheme.outer_mode == OuterMode::Finite;
  const int M = scheme.bins();
  std::vector<long> counts(M, 0);
  BinFrequencies out;
  for (double x : samples) {
    if (finite && !in_range(x, scheme.boundaries)) {
      ++out.out_of_range;
      continue;
    }
    ++counts[bin_index_clamped(x, scheme.boundaries)];
    ++out.assigned;
  }
  if (out.assigned > 0) {
    out.freqs.resize(M);
    for (int k = 0; k < M; ++k)
      out.freqs[k] = static_cast<double>(counts[k]) / out.assigned;
  }
  return out;
}

FitResult fit_probability_model(std::span<const PhasePoint> scan,
                                const BinScheme& scheme) {
  std::vector<const PhasePoint*> usable;
  for (const auto& pt : scan)
    if (!pt.freqs.empty()) usable.push_back(&pt);
  {
    std::vector<double> phis;
    for (const auto* pt : usable) phis.push_back(pt->phi);
    std::sort(phis.begin(), phis.end());
    phis.erase(std::unique(phis.begin(), phis.end()), phis.end());
    if (phis.size() < 3)
      throw std::invalid_argument("fit_probability_model: need >= 3 distinct phases");
  }

  const auto ssr = [&](const std::vector<double>& x) -> double {
    const double alpha = x[0], r = x[1];
    if (!(alpha > 0.0) || !(r >= 0.0) || alpha > 1e6 || r > 10.0) return 1e30;
    const InterferometerConfig trial{alpha, r};
    double total = 0.0;
    for (const auto* pt : usable) {
      const auto model = bin_probabilities(trial, pt->phi, scheme);
      for (size_t k = 0; k < model.size(); ++k) {
        const double d = pt->freqs[k] - model[k];
        total += d * d;
      }
    }
    return total;
  };

  // Coarse log-grid in alpha times linear grid in r seeds the simplex.
  double best_val = 1e300;
  std::vector<double> best_x{1.0, 0.1};
  for (double alpha = 0.5; alpha <= 128.0; alpha *= 2.0) {
    for (double r = 0.0; r <= 1.5; r += 0.25) {
      const double v = ssr({alpha, r});
      if (v < best_val) {
        best_val = v;
        best_x = {alpha, r};
      }
    }
  }

  SimplexOptions opts;
  opts.f_tolerance = 1e-18;
  opts.x_tolerance = 1e-10;
  opts.max_iterations = 4000;
  auto res = nelder_mead(ssr, best_x, opts);
  res = nelder_mead(ssr, res.x, opts);  // fresh simplex to polish the ridge
  if (!std::isfinite(res.value) || res.value >= 1e30)
    throw std::runtime_error("fit_probability_model: fit diverged (best alpha=" +
                             std::to_string(res.x[0]) + ", r=" + std::to_string(res.x[1]) + ")");
  return {res.x[0], std::max(res.x[1], 0.0), res.value};
}

CalibratedPipeline calibrate_pipeline(const SimCampaignConfig& config) {
  config.validate();
  const int n = config.phase_scan.count;
  std::vector<double> phis(n);
  for (int i = 0; i < n; ++i)
    phis[i] = config.phase_scan.lo +
              (config.phase_scan.hi - config.phase_scan.lo) * i / (n - 1);
  // The scan must contain phi0 so the covariance and weights are measured
  // exactly where the estimator is constructed.
  int nearest = 0;
  for (int i = 1; i < n; ++i)
    if (std::fabs(phis[i] - config.phi0) < std::fabs(phis[nearest] - config.phi0))
      nearest = i;
  phis[nearest] = config.phi0;

  std::vector<PhasePoint> scan(n);
  for (int i = 0; i < n; ++i) {
    const auto samples =
        sample_quadratures(config.cfg, phis[i], config.samples_per_phase,
                           derive_seed(config.master_seed, Stage::Scan, i));
    scan[i] = {phis[i], empirical_bin_frequencies(samples, config.scheme).freqs};
  }

  const FitResult fit = fit_probability_model(scan, config.scheme);
  const InterferometerConfig fitted{fit.alpha_hat, fit.r_hat};
  const auto p0 = bin_probabilities(fitted, config.phi0, config.scheme);
  const auto dp0 = bin_prob_derivative(fitted, config.phi0, config.scheme);

  std::vector<double> w;
  if (config.empirical_covariance) {
    // Multinomial sample covariance at the phi0 scan point, SVD route.
    const auto& freqs = scan[nearest].freqs;
    if (freqs.empty())
      throw std::runtime_error("calibrate_pipeline: no samples assigned at phi0");
    auto gamma = covariance(freqs);
    const double bias = static_cast<double>(config.samples_per_phase) /
                        std::max(config.samples_per_phase - 1, 1);
    for (int i = 0; i < gamma.size(); ++i)
      for (int j = 0; j < gamma.size(); ++j) gamma(i, j) *= bias;
    w = optimal_weight_from_covariance(gamma, dp0);
  } else {
    w = optimal_weight(p0, dp0);
  }

  auto estimator =
      calibration_curve(std::move(w), fitted, config.scheme, config.phi0,
                        config.phase_scan.lo, config.phase_scan.hi);
  return {fit, std::move(estimator), std::move(scan)};
}

TrialReport run_trials(const CalibratedPipeline& pipeline,
                       const SimCampaignConfig& config, double phi_true) {
  const auto& est = pipeline.estimator;
  const bool finite = config.scheme.outer_mode == OuterMode::Finite;

  TrialReport report;
  report.phi_true = phi_true;
  const auto fisher = coarse_fisher(config.cfg, phi_true, config.scheme);
  report.excluded_bins = fisher.excluded_bins;
  report.crb_predicted = fisher.value > 0.0
                             ? std::sqrt(1.0 / (config.nu * fisher.value))
                             : std::numeric_limits<double>::infinity();
  try {
    // Delta-method error of the frozen weights at this phase (the per-phase
    // CRB above re-optimizes the weights instead).
    const auto pt = bin_probabilities(config.cfg, phi_true, config.scheme);
    const auto dpt = bin_prob_derivative(config.cfg, phi_true, config.scheme);
    report.dphi_predicted =
        std::sqrt(estimator_variance(est.weights(), pt, dpt, config.nu));
  } catch (const std::exception&) {
    report.dphi_predicted = std::numeric_limits<double>::infinity();
  }

  report.estimates.reserve(config.repeats);
  for (int j = 0; j < config.repeats; ++j) {
    const auto samples =
        sample_quadratures(config.cfg, phi_true, config.nu,
                           derive_seed(config.master_seed, Stage::Trial, j));
    double obar_sum = 0.0;
    long used = 0;
    for (double x : samples) {
      if (finite && !in_range(x, config.scheme.boundaries)) continue;
      obar_sum += est.weights()[bin_index_clamped(x, config.scheme.boundaries)];
      ++used;
    }
    bool forced_edge = false;
    if (used == 0) {
      // Every draw escaped a finite range: fall back to edge assignment so
      // the repeat still produces a (saturation-flagged) estimate.
      for (double x : samples)
        obar_sum += est.weights()[bin_index_clamped(x, config.scheme.boundaries)];
      used = static_cast<long>(samples.size());
      forced_edge = true;
    }
    const double obar = obar_sum / used;
    double estimate;
    try {
      estimate = est.invert(obar);
      if (forced_edge) ++report.saturated_repeats;
    } catch (const SaturationError&) {
      estimate = obar > est.g_max() ? est.phi_at_g_max() : est.phi_at_g_min();
      ++report.saturated_repeats;
    }
    report.estimates.push_back(estimate);
  }

  if (config.repeats == 1) {
    report.degenerate_statistics = true;
    report.dphi_std = 0.0;
    return report;
  }
  report.dphi_std = sample_std(report.estimates);

  std::vector<double> boot_stds(config.bootstrap_resamples);
  std::vector<double> boot_vars(config.bootstrap_resamples);
  std::vector<double> resample(config.repeats);
  for (int b = 0; b < config.bootstrap_resamples; ++b) {
    Rng rng(derive_seed(config.master_seed, Stage::Bootstrap, b));
    for (int j = 0; j < config.repeats; ++j)
      resample[j] = report.estimates[rng.below(config.repeats)];
    boot_stds[b] = sample_std(resample);
    boot_vars[b] = boot_stds[b] * boot_stds[b];
  }
  report.dphi_bootstrap_err = sample_std(boot_stds);
  report.dphi2_bootstrap_err = sample_std(boot_vars);
  return report;
}

TrialReport run_campaign(const SimCampaignConfig& config) {
  const auto pipeline = calibrate_pipeline(config);
  return run_trials(pipeline, config, config.phi_true);
}

std::vector<TrialReport> phase_range_scan(const SimCampaignConfig& config,
                                          std::span<const double> phi_grid) {
  const auto pipeline = calibrate_pipeline(config);
  std::vector<TrialReport> out;
  out.reserve(phi_grid.size());
  for (double phi : phi_grid) out.push_back(run_trials(pipeline, config, phi));
  return out;
}

TrialReport run_classical_ideal(double alpha, double phi_true, int nu,
                                int repeats, int bootstrap_resamples,
                                std::uint64_t master_seed) {
  const InterferometerConfig cfg{alpha, 0.0};
  cfg.validate();
  if (nu < 1 || repeats < 1 || bootstrap_resamples < 1)
    throw std::invalid_argument("run_classical_ideal: counts must be >= 1");

  TrialReport report;
  report.phi_true = phi_true;
  report.crb_predicted = classical_ideal_dphi(alpha, nu, phi_true);
  report.estimates.reserve(repeats);
  for (int j = 0; j < repeats; ++j) {
    const auto samples = sample_quadratures(
        cfg, phi_true, nu, derive_seed(master_seed, Stage::ClassicalTrial, j));
    const double pbar =
        std::accumulate(samples.begin(), samples.end(), 0.0) / samples.size();
    double arg = pbar / (2.0 * alpha);
    if (arg < -1.0 || arg > 1.0) {
      arg = std::clamp(arg, -1.0, 1.0);
      ++report.saturated_repeats;
    }
    report.estimates.push_back(-2.0 * std::asin(arg));
  }
  if (repeats == 1) {
    report.degenerate_statistics = true;
    return report;
  }
  report.dphi_std = sample_std(report.estimates);

  std::vector<double> boot_stds(bootstrap_resamples), boot_vars(bootstrap_resamples);
  std::vector<double> resample(repeats);
  for (int b = 0; b < bootstrap_resamples; ++b) {
    Rng rng(derive_seed(master_seed, Stage::Bootstrap, b));
    for (int j = 0; j < repeats; ++j)
      resample[j] = report.estimates[rng.below(repeats)];
    boot_stds[b] = sample_std(resample);
    boot_vars[b] = boot_stds[b] * boot_stds[b];
  }
  report.dphi_bootstrap_err = sample_std(boot_stds);
  report.dphi2_bootstrap_err = sample_std(boot_vars);
  return report;
}

double classical_ideal_dphi(double alpha, int nu, double phi) {
  // Fisher information of the r = 0 Gaussian is alpha^2 cos^2(phi/2)
  // (unit variance at every phase, only the mean moves).
  return 1.0 / (std::sqrt(static_cast<double>(nu)) * alpha * std::cos(phi / 2.0));
}

double enhancement_db(double dphi2_quantum, double dphi2_classical) {
  if (!(dphi2_quantum > 0.0) || !(dphi2_classical > 0.0))
    throw std::invalid_argument("enhancement_db: variances must be > 0");
  return 10.0 * std::log10(dphi2_classical / dphi2_quantum);
}

std::optional<double> quantum_advantage_crossing(
    std::span<const double> phi, std::span<const double> quantum_err,
    std::span<const double> classical_err) {
  const size_t n = phi.size();
  if (n < 3 || quantum_err.size() != n || classical_err.size() != n)
    throw std::invalid_argument("quantum_advantage_crossing: bad inputs");
  std::vector<double> y(n);
  for (size_t i = 0; i < n; ++i) {
    if (!(quantum_err[i] > 0.0) || !(classical_err[i] > 0.0))
      throw std::invalid_argument("quantum_advantage_crossing: errors must be > 0");
    y[i] = std::log(quantum_err[i] / classical_err[i]);
  }

  // Quadratic least squares y ~ a + b phi + c phi^2 smooths the per-point
  // Monte Carlo noise before root finding.
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd rhs(n);
  for (size_t i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = phi[i];
    design(i, 2) = phi[i] * phi[i];
    rhs(i) = y[i];
  }
  const Eigen::Vector3d coef = design.colPivHouseholderQr().solve(rhs);
  const double a = coef(0), b = coef(1), c = coef(2);

  const double lo = *std::min_element(phi.begin(), phi.end());
  const double hi = *std::max_element(phi.begin(), phi.end());
  std::vector<double> roots;
  if (std::fabs(c) < 1e-300) {
    if (std::fabs(b) > 1e-300) roots.push_back(-a / b);
  } else {
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      // Citardauq-stable form: the near-linear case (tiny c) would otherwise
      // shred the root through cancellation in (-b + sqrt(disc)).
      const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
      roots.push_back(q / c);
      if (q != 0.0) roots.push_back(a / q);
    }
  }
  std::sort(roots.begin(), roots.end());
  for (double root : roots) {
    if (root < lo || root > hi) continue;
    const double slope = b + 2.0 * c * root;
    if (slope > 0.0) return root;  // curve moves from advantage to loss
  }

  // Fallback: first sign change on the raw grid.
  for (size_t i = 1; i < n; ++i) {
    if (y[i - 1] <= 0.0 && y[i] > 0.0) {
      const double t = -y[i - 1] / (y[i] - y[i - 1]);
      return phi[i - 1] + t * (phi[i] - phi[i - 1]);
    }
  }
  return std::nullopt;
}

}  // namespace cghd
