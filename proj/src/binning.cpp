#include "cghd/binning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "cghd/nelder_mead.hpp"
#include "cghd/special.hpp"

namespace cghd {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
// Restart generator seed for the bin optimizer; fixed so results are
// reproducible run to run.
constexpr unsigned long long kOptimizerSeed = 0x9e3779b97f4a7c15ULL;
constexpr int kOptimizerRestarts = 20;

double erf_at(double c, bool infinite_edge) {
  if (infinite_edge) return c < 0.0 ? -1.0 : 1.0;
  return cghd::erf(c);
}

double gauss_at(double c, bool infinite_edge) {
  if (infinite_edge) return 0.0;
  return exp_neg_square(c);
}

}  // namespace

void BinScheme::validate() const {
  if (bins() < 2)
    throw std::invalid_argument("BinScheme: need at least 2 bins, got " +
                                std::to_string(bins()));
  if (!(range > 0.0))
    throw std::invalid_argument("BinScheme: range must be > 0");
  for (size_t k = 1; k < boundaries.size(); ++k)
    if (!(boundaries[k] > boundaries[k - 1]))
      throw std::invalid_argument("BinScheme: boundaries must be strictly increasing");
}

double default_range(const InterferometerConfig& cfg) {
  cfg.validate();
  return 4.0 * std::exp(-cfg.r);
}

BinScheme equal_bins(int M, double R, OuterMode mode) {
  if (M < 2) throw std::invalid_argument("equal_bins: M must be >= 2");
  if (!(R > 0.0)) throw std::invalid_argument("equal_bins: R must be > 0");
  BinScheme scheme;
  scheme.range = R;
  scheme.outer_mode = mode;
  scheme.boundaries.resize(M + 1);
  for (int k = 0; k <= M; ++k)
    scheme.boundaries[k] = R * (2.0 * k - M) / M;
  // Pin exact symmetry against roundoff.
  for (int k = 0; k <= M / 2; ++k)
    scheme.boundaries[M - k] = -scheme.boundaries[k];
  if (M % 2 == 0) scheme.boundaries[M / 2] = 0.0;
  return scheme;
}

std::vector<double> scaled_boundaries(const BinScheme& scheme, double r) {
  scheme.validate();
  const double factor = std::exp(r) / kSqrt2;
  std::vector<double> c(scheme.boundaries.size());
  for (size_t k = 0; k < c.size(); ++k) c[k] = factor * scheme.boundaries[k];
  return c;
}

std::vector<double> bin_probabilities(const InterferometerConfig& cfg,
                                      double phi, const BinScheme& scheme) {
  cfg.validate();
  scheme.validate();
  const auto [mean, variance] = moments(cfg, phi);
  const double denom = kSqrt2 * std::sqrt(variance);
  const int M = scheme.bins();
  const bool inf = scheme.outer_mode == OuterMode::Infinite;

  std::vector<double> e(M + 1);
  for (int k = 0; k <= M; ++k) {
    const bool edge = inf && (k == 0 || k == M);
    const double z = (scheme.boundaries[k] - mean) / denom;
    e[k] = edge ? (k == 0 ? -1.0 : 1.0) : cghd::erf(z);
  }
  std::vector<double> p(M);
  for (int k = 0; k < M; ++k) p[k] = 0.5 * (e[k + 1] - e[k]);
  return p;
}

std::vector<double> bin_prob_derivative(const InterferometerConfig& cfg,
                                        double phi, const BinScheme& scheme) {
  cfg.validate();
  scheme.validate();
  const auto [mean, variance] = moments(cfg, phi);
  const auto [dmean, dvariance] = moments_derivative(cfg, phi);
  const double sigma = std::sqrt(variance);
  const double dsigma = dvariance / (2.0 * sigma);
  const double denom = kSqrt2 * sigma;
  const int M = scheme.bins();
  const bool inf = scheme.outer_mode == OuterMode::Infinite;

  // d/dphi of erf(z_k) with z_k = (b_k - mean)/(sqrt(2) sigma):
  // (2/sqrt(pi)) e^{-z_k^2} (-dmean/(sqrt(2) sigma) - z_k dsigma/sigma).
  constexpr double kTwoOverSqrtPi = 1.12837916709551257390;
  std::vector<double> de(M + 1);
  for (int k = 0; k <= M; ++k) {
    const bool edge = inf && (k == 0 || k == M);
    if (edge) {
      de[k] = 0.0;
      continue;
    }
    const double z = (scheme.boundaries[k] - mean) / denom;
    const double dz = -dmean / denom - z * (dsigma / sigma);
    de[k] = kTwoOverSqrtPi * exp_neg_square(z) * dz;
  }
  std::vector<double> dp(M);
  for (int k = 0; k < M; ++k) dp[k] = 0.5 * (de[k + 1] - de[k]);
  return dp;
}

CoarseFisher coarse_fisher(const InterferometerConfig& cfg, double phi,
                           const BinScheme& scheme) {
  const auto p = bin_probabilities(cfg, phi, scheme);
  const auto dp = bin_prob_derivative(cfg, phi, scheme);
  CoarseFisher out;
  for (int k = 0; k < scheme.bins(); ++k) {
    if (p[k] < kProbabilityFloor) {
      out.excluded_bins.push_back(k);
      continue;
    }
    out.value += dp[k] * dp[k] / p[k];
  }
  return out;
}

double fisher_ratio(std::span<const double> scaled, OuterMode mode) {
  const int M = static_cast<int>(scaled.size()) - 1;
  if (M < 2) throw std::invalid_argument("fisher_ratio: need at least 2 bins");
  for (int k = 1; k <= M; ++k)
    if (!(scaled[k] > scaled[k - 1]))
      throw std::invalid_argument("fisher_ratio: scaled boundaries must be strictly increasing");
  const bool inf = mode == OuterMode::Infinite;
  double sum = 0.0;
  for (int k = 0; k < M; ++k) {
    const bool lo_edge = inf && k == 0;
    const bool hi_edge = inf && k == M - 1;
    const double num = gauss_at(scaled[k + 1], hi_edge) - gauss_at(scaled[k], lo_edge);
    const double den = erf_at(scaled[k + 1], hi_edge) - erf_at(scaled[k], lo_edge);
    if (den < 2.0 * kProbabilityFloor) continue;  // empty bin contributes nothing
    sum += num * num / den;
  }
  return sum / kPi;
}

double fisher_ratio(const BinScheme& scheme) {
  // R = 4 e^{-r} convention; e^r cancels and c = 2 sqrt(2) b / R.
  scheme.validate();
  const double factor = 2.0 * kSqrt2 / scheme.range;
  std::vector<double> c(scheme.boundaries.size());
  for (size_t k = 0; k < c.size(); ++k) c[k] = factor * scheme.boundaries[k];
  return fisher_ratio(c, scheme.outer_mode);
}

double fisher_ratio(const BinScheme& scheme, double r) {
  return fisher_ratio(scaled_boundaries(scheme, r), scheme.outer_mode);
}

namespace {

// Boundaries from the free positive interior values t (sorted ascending).
// M even: {-R, -t_d..-t_1, 0, t_1..t_d, R}; M odd: {-R, -t_d..-t_1, t_1..t_d, R}.
std::vector<double> assemble_boundaries(std::span<const double> t, int M, double R) {
  std::vector<double> b;
  b.reserve(M + 1);
  b.push_back(-R);
  for (auto it = t.rbegin(); it != t.rend(); ++it) b.push_back(-*it);
  if (M % 2 == 0) b.push_back(0.0);
  for (double v : t) b.push_back(v);
  b.push_back(R);
  return b;
}

}  // namespace

OptimizedBins optimize_bins(int M, double R, OuterMode mode) {
  if (M < 2) throw std::invalid_argument("optimize_bins: M must be >= 2");
  if (!(R > 0.0)) throw std::invalid_argument("optimize_bins: R must be > 0");

  OptimizedBins out;
  const int d = (M - 1) / 2;
  if (d == 0) {
    out.scheme = equal_bins(2, R, mode);
    out.ratio = fisher_ratio(out.scheme);
    out.converged = true;
    return out;
  }

  // Penalty wall keeps 0 < t_1 < ... < t_d < R with a small margin.
  const auto objective = [&](const std::vector<double>& t) -> double {
    double prev = 0.0;
    for (double v : t) {
      if (!(v > prev + 1e-9 * R) || !(v < R - 1e-9 * R)) return 1.0;
      prev = v;
    }
    BinScheme s;
    s.boundaries = assemble_boundaries(t, M, R);
    s.range = R;
    s.outer_mode = mode;
    return -fisher_ratio(s);
  };

  std::mt19937_64 restart_rng(kOptimizerSeed + static_cast<unsigned long long>(M));
  std::uniform_real_distribution<double> unif(0.05, 0.95);

  SimplexOptions opts;
  opts.f_tolerance = 1e-12;
  opts.x_tolerance = 1e-9;
  opts.max_iterations = 5000 * d;

  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_t;
  bool best_converged = false;
  for (int restart = 0; restart < kOptimizerRestarts; ++restart) {
    std::vector<double> t0(d);
    if (restart == 0) {
      // Positive interior boundaries of the equal scheme as the first start.
      std::vector<double> pos;
      for (double v : equal_bins(M, R, mode).boundaries)
        if (v > 0.0 && v < R) pos.push_back(v);
      std::sort(pos.begin(), pos.end());
      t0.assign(pos.begin(), pos.begin() + d);
    } else {
      for (int i = 0; i < d; ++i) t0[i] = unif(restart_rng) * R;
      std::sort(t0.begin(), t0.end());
    }
    auto res = nelder_mead(objective, t0, opts);
    if (res.value < best) {
      best = res.value;
      std::sort(res.x.begin(), res.x.end());
      best_t = res.x;
      best_converged = res.converged;
    }
  }

  out.scheme.boundaries = assemble_boundaries(best_t, M, R);
  out.scheme.range = R;
  out.scheme.outer_mode = mode;
  out.ratio = -best;
  out.converged = best_converged;
  return out;
}

BinScheme make_scheme(int M, double R, Binning binning, OuterMode mode) {
  if (binning == Binning::Equal) return equal_bins(M, R, mode);
  // Boundaries always optimized under the finite-range ratio (the published
  // convention); the requested outer mode only tags how they are used.
  BinScheme scheme = optimize_bins(M, R, OuterMode::Finite).scheme;
  scheme.outer_mode = mode;
  return scheme;
}

std::vector<ScalingRow> scaling_sweep(std::span<const double> n_grid, int M,
                                      Binning binning, int nu) {
  if (M < 2) throw std::invalid_argument("scaling_sweep: M must be >= 2");
  if (nu < 1) throw std::invalid_argument("scaling_sweep: nu must be >= 1");
  // f_M is r-invariant under R = 4 e^{-r}, so one scheme serves every row.
  const double f = fisher_ratio(make_scheme(M, 4.0, binning));
  std::vector<ScalingRow> rows;
  rows.reserve(n_grid.size());
  for (double n : n_grid) {
    if (!(n > 0.0)) throw std::invalid_argument("scaling_sweep: n_tot must be > 0");
    // sinh^2 r = alpha^2 = n/2  =>  e^r = sqrt(n/2) + sqrt(n/2 + 1).
    const double half = n / 2.0;
    const double er = std::sqrt(half) + std::sqrt(half + 1.0);
    const double fisher_ideal = half * er * er;
    const double dphi_ideal = 1.0 / std::sqrt(nu * fisher_ideal);
    const auto limits = reference_limits(n);
    rows.push_back({n, dphi_ideal, dphi_ideal / std::sqrt(f), limits.hl, limits.sql});
  }
  return rows;
}

}  // namespace cghd
