#include "cghd/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

namespace cghd {

namespace {

constexpr double kSimplexTolerance = 1e-12;  // |sum P - 1| below this: singular case

void check_probabilities(std::span<const double> p) {
  if (p.size() < 2)
    throw std::invalid_argument("probability vector needs at least 2 bins");
  for (size_t k = 0; k < p.size(); ++k) {
    if (!(p[k] >= 0.0) || !(p[k] <= 1.0))
      throw std::invalid_argument("P_" + std::to_string(k + 1) +
                                  " outside [0, 1]: " + std::to_string(p[k]));
  }
}

void check_above_floor(std::span<const double> p) {
  for (size_t k = 0; k < p.size(); ++k)
    if (p[k] < kProbabilityFloor)
      throw std::domain_error("bin " + std::to_string(k + 1) +
                              " probability below floor: " + std::to_string(p[k]));
}

Eigen::MatrixXd to_eigen(const SquareMatrix& m) {
  const int n = m.size();
  Eigen::MatrixXd out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = m(i, j);
  return out;
}

SquareMatrix from_eigen(const Eigen::MatrixXd& m) {
  SquareMatrix out(static_cast<int>(m.rows()));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

}  // namespace

SquareMatrix covariance(std::span<const double> p) {
  check_probabilities(p);
  const int M = static_cast<int>(p.size());
  SquareMatrix gamma(M);
  for (int k = 0; k < M; ++k) {
    for (int l = 0; l < M; ++l)
      gamma(k, l) = (k == l) ? p[k] * (1.0 - p[k]) : -p[k] * p[l];
  }
  return gamma;
}

SquareMatrix pseudoinverse_closed_form(std::span<const double> p) {
  check_probabilities(p);
  check_above_floor(p);
  const int M = static_cast<int>(p.size());
  double inv_sum = 0.0;
  std::vector<double> inv(M);
  for (int k = 0; k < M; ++k) {
    inv[k] = 1.0 / p[k];
    inv_sum += inv[k];
  }
  SquareMatrix out(M);
  const double mean_of_inv = inv_sum / (M * static_cast<double>(M));
  for (int k = 0; k < M; ++k) {
    for (int l = 0; l < M; ++l) {
      double v = -(inv[k] + inv[l]) / M + mean_of_inv;
      if (k == l) v += inv[k];
      out(k, l) = v;
    }
  }
  return out;
}

SquareMatrix pseudoinverse_svd(const SquareMatrix& m, double cutoff_rel) {
  const Eigen::MatrixXd a = to_eigen(m);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff = cutoff_rel * (sv.size() > 0 ? sv(0) : 0.0);
  Eigen::VectorXd inv = sv;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    inv(i) = sv(i) > cutoff ? 1.0 / sv(i) : 0.0;
  return from_eigen(svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose());
}

std::vector<double> matvec(const SquareMatrix& m, std::span<const double> v) {
  const int n = m.size();
  std::vector<double> out(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out[i] += m(i, j) * v[j];
  return out;
}

namespace {

std::vector<double> normalize_with_sign(std::vector<double> w) {
  double norm2 = 0.0;
  for (double v : w) norm2 += v * v;
  const double norm = std::sqrt(norm2);
  if (!(norm > 0.0))
    throw std::domain_error("optimal_weight: derivative vector has no sensitivity");
  for (double& v : w) v /= norm;
  // Sign convention: first component with non-negligible magnitude >= 0.
  for (double v : w) {
    if (std::fabs(v) > 1e-12) {
      if (v < 0.0)
        for (double& u : w) u = -u;
      break;
    }
  }
  return w;
}

}  // namespace

std::vector<double> optimal_weight(std::span<const double> p,
                                   std::span<const double> dp) {
  check_probabilities(p);
  check_above_floor(p);
  if (p.size() != dp.size())
    throw std::invalid_argument("optimal_weight: P and dP size mismatch");
  double dp_norm = 0.0;
  for (double v : dp) dp_norm += v * v;
  if (!(std::sqrt(dp_norm) > 1e-300))
    throw std::domain_error("optimal_weight: dP is (numerically) zero");

  const int M = static_cast<int>(p.size());
  const double sum = std::accumulate(p.begin(), p.end(), 0.0);
  std::vector<double> w(M);
  if (std::fabs(sum - 1.0) <= kSimplexTolerance) {
    // Singular Gamma: w_k = dP_k/P_k - mean_m(dP_m/P_m), i.e. Gamma+ dP.
    double mean = 0.0;
    for (int k = 0; k < M; ++k) mean += dp[k] / p[k];
    mean /= M;
    for (int k = 0; k < M; ++k) w[k] = dp[k] / p[k] - mean;
  } else {
    // Invertible Gamma = diag(P) - P P^T:
    // Gamma^{-1} = diag(1/P) + J/(1 - sum P), so
    // w_k = dP_k/P_k + sum(dP)/(1 - sum P).
    const double shift = std::accumulate(dp.begin(), dp.end(), 0.0) / (1.0 - sum);
    for (int k = 0; k < M; ++k) w[k] = dp[k] / p[k] + shift;
  }
  return normalize_with_sign(std::move(w));
}

std::vector<double> optimal_weight_from_covariance(const SquareMatrix& gamma,
                                                   std::span<const double> dp) {
  if (gamma.size() != static_cast<int>(dp.size()))
    throw std::invalid_argument("optimal_weight_from_covariance: size mismatch");
  const auto pinv = pseudoinverse_svd(gamma);
  return normalize_with_sign(matvec(pinv, dp));
}

double estimator_variance(std::span<const double> w, std::span<const double> p,
                          std::span<const double> dp, int nu) {
  if (nu < 1) throw std::invalid_argument("estimator_variance: nu must be >= 1");
  if (w.size() != p.size() || w.size() != dp.size())
    throw std::invalid_argument("estimator_variance: size mismatch");
  const auto gamma = covariance(p);
  const auto gw = matvec(gamma, w);
  double wgw = 0.0, wdp = 0.0, wnorm = 0.0, dpnorm = 0.0;
  for (size_t k = 0; k < w.size(); ++k) {
    wgw += w[k] * gw[k];
    wdp += w[k] * dp[k];
    wnorm += w[k] * w[k];
    dpnorm += dp[k] * dp[k];
  }
  if (std::fabs(wdp) <= 1e-15 * std::sqrt(wnorm * dpnorm) || wdp == 0.0)
    throw std::domain_error("estimator_variance: weight is orthogonal to dP");
  return wgw / (nu * wdp * wdp);
}

MomentEstimator::MomentEstimator(BinScheme scheme, std::vector<double> w,
                                 double phi0, std::vector<CalibrationPoint> curve)
    : scheme_(std::move(scheme)), w_(std::move(w)), phi0_(phi0),
      curve_(std::move(curve)) {
  if (curve_.size() < 2)
    throw std::invalid_argument("MomentEstimator: calibration curve needs >= 2 points");
  increasing_ = curve_.back().g > curve_.front().g;
  for (size_t i = 1; i < curve_.size(); ++i) {
    const bool ok = increasing_ ? curve_[i].g > curve_[i - 1].g
                                : curve_[i].g < curve_[i - 1].g;
    if (!ok)
      throw std::domain_error(
          "calibration function not strictly monotone over the requested range; "
          "use a narrower phase range");
  }
}

double MomentEstimator::g_min() const {
  return std::min(curve_.front().g, curve_.back().g);
}

double MomentEstimator::g_max() const {
  return std::max(curve_.front().g, curve_.back().g);
}

double MomentEstimator::phi_at_g_min() const {
  return increasing_ ? curve_.front().phi : curve_.back().phi;
}

double MomentEstimator::phi_at_g_max() const {
  return increasing_ ? curve_.back().phi : curve_.front().phi;
}

double MomentEstimator::invert(double obar) const {
  if (!(obar >= g_min() && obar <= g_max()))
    throw SaturationError("sample mean " + std::to_string(obar) +
                          " out of calibration range [" + std::to_string(g_min()) +
                          ", " + std::to_string(g_max()) + "]");
  // Bisection on the tabulated, strictly monotone grid.
  size_t lo = 0, hi = curve_.size() - 1;
  while (hi - lo > 1) {
    const size_t mid = (lo + hi) / 2;
    const bool go_right = increasing_ ? curve_[mid].g <= obar : curve_[mid].g >= obar;
    (go_right ? lo : hi) = mid;
  }
  const auto& a = curve_[lo];
  const auto& b = curve_[hi];
  if (a.g == b.g) return a.phi;
  const double t = (obar - a.g) / (b.g - a.g);
  return a.phi + t * (b.phi - a.phi);
}

double MomentEstimator::observable_mean(std::span<const int> sample_bins) const {
  if (sample_bins.empty())
    throw std::invalid_argument("estimate: empty sample list");
  double sum = 0.0;
  for (int k : sample_bins) {
    if (k < 0 || k >= static_cast<int>(w_.size()))
      throw std::out_of_range("estimate: bin index " + std::to_string(k));
    sum += w_[static_cast<size_t>(k)];
  }
  return sum / static_cast<double>(sample_bins.size());
}

double MomentEstimator::estimate(std::span<const int> sample_bins) const {
  return invert(observable_mean(sample_bins));
}

MomentEstimator calibration_curve(std::vector<double> w,
                                  const InterferometerConfig& cfg,
                                  const BinScheme& scheme, double phi0,
                                  double phi_lo, double phi_hi, int grid_points) {
  if (grid_points < 2)
    throw std::invalid_argument("calibration_curve: need >= 2 grid points");
  if (!(phi_hi > phi_lo))
    throw std::invalid_argument("calibration_curve: empty phase range");
  if (static_cast<int>(w.size()) != scheme.bins())
    throw std::invalid_argument("calibration_curve: weight/scheme size mismatch");
  std::vector<CalibrationPoint> curve(grid_points);
  for (int i = 0; i < grid_points; ++i) {
    const double phi = phi_lo + (phi_hi - phi_lo) * i / (grid_points - 1);
    const auto p = bin_probabilities(cfg, phi, scheme);
    double g = 0.0;
    for (int k = 0; k < scheme.bins(); ++k) g += w[k] * p[k];
    curve[i] = {phi, g};
  }
  return MomentEstimator(scheme, std::move(w), phi0, std::move(curve));
}

}  // namespace cghd
