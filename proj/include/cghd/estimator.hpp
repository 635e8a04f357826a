#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cghd/binning.hpp"

namespace cghd {

/// Thrown when a sample mean falls outside the calibrated range of g.
class SaturationError : public std::runtime_error {
 public:
  explicit SaturationError(const std::string& what) : std::runtime_error(what) {}
};

/// Dense square matrix, row-major. Big enough for M x M bin covariances.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(int n) : n_(n), data_(static_cast<size_t>(n) * n, 0.0) {}

  double& operator()(int i, int j) { return data_[static_cast<size_t>(i) * n_ + j]; }
  double operator()(int i, int j) const { return data_[static_cast<size_t>(i) * n_ + j]; }
  int size() const { return n_; }
  const std::vector<double>& data() const { return data_; }

 private:
  int n_ = 0;
  std::vector<double> data_;
};

/// Covariance of the bin-indicator observables: Gamma_kk = P_k (1 - P_k),
/// Gamma_kl = -P_k P_l. Positive semidefinite; singular when sum P_k = 1.
SquareMatrix covariance(std::span<const double> p);

/// Closed-form Moore-Penrose pseudoinverse of the bin covariance for
/// probabilities on the simplex (sum P_k = 1):
///   (Gamma+)_kl = delta_kl/P_k - (1/M)(1/P_k + 1/P_l) + (1/M^2) sum_m 1/P_m.
/// Satisfies Gamma Gamma+ = Gamma+ Gamma = I - J/M.
SquareMatrix pseudoinverse_closed_form(std::span<const double> p);

/// Eigen-backed pseudoinverse for symmetric matrices; fallback for empirical
/// covariance matrices that lack the exact multinomial structure, and the
/// independent oracle for the closed form.
SquareMatrix pseudoinverse_svd(const SquareMatrix& m, double cutoff_rel = 1e-12);

std::vector<double> matvec(const SquareMatrix& m, std::span<const double> v);

/// Optimal method-of-moments weight w = Gamma+ dP, normalized to unit
/// Euclidean norm with w_1 >= 0. Uses the closed-form pseudoinverse when
/// sum P_k = 1; for finite-range probabilities (sum < 1) Gamma is invertible
/// and w = Gamma^{-1} dP via the diagonal-plus-rank-one identity
/// Gamma^{-1} = diag(1/P) + J/(1 - sum P).
std::vector<double> optimal_weight(std::span<const double> p,
                                   std::span<const double> dp);

/// Same weight construction from a measured covariance matrix (SVD route).
std::vector<double> optimal_weight_from_covariance(const SquareMatrix& gamma,
                                                   std::span<const double> dp);

/// Estimator error Delta phi^2 = w^T Gamma w / (nu |w^T dP|^2); equals
/// 1/(nu F_M) when w is the optimal weight and sum P_k = 1. For finite-range
/// probabilities the invertible route lands slightly below 1/(nu F_M): the
/// estimator also collects the information in the escaped-probability count.
double estimator_variance(std::span<const double> w, std::span<const double> p,
                          std::span<const double> dp, int nu);

struct CalibrationPoint {
  double phi;  // radians
  double g;
};

/// Frozen estimation pipeline: a weight vector plus the tabulated
/// calibration function g(phi) = w^T P(phi), strictly monotone over its
/// range. Immutable once built; estimate() is reentrant.
class MomentEstimator {
 public:
  MomentEstimator(BinScheme scheme, std::vector<double> w, double phi0,
                  std::vector<CalibrationPoint> curve);

  const BinScheme& scheme() const { return scheme_; }
  const std::vector<double>& weights() const { return w_; }
  double phi0() const { return phi0_; }
  const std::vector<CalibrationPoint>& curve() const { return curve_; }
  bool increasing() const { return increasing_; }

  double g_min() const;
  double g_max() const;

  /// phi at the low/high end of g's range (used by callers that clamp).
  double phi_at_g_min() const;
  double phi_at_g_max() const;

  /// Inverts the tabulated g by bisection + linear interpolation.
  /// Throws SaturationError when obar is outside [g_min, g_max].
  double invert(double obar) const;

  /// Mean observable value of a set of bin indices.
  double observable_mean(std::span<const int> sample_bins) const;

  /// Phase estimate g^{-1}(mean of w over the sampled bins).
  double estimate(std::span<const int> sample_bins) const;

 private:
  BinScheme scheme_;
  std::vector<double> w_;
  double phi0_;
  std::vector<CalibrationPoint> curve_;
  bool increasing_;
};

/// Tabulates g(phi) = w^T P(phi) on a dense grid and validates strict
/// monotonicity; throws std::domain_error otherwise (narrow the range).
MomentEstimator calibration_curve(std::vector<double> w,
                                  const InterferometerConfig& cfg,
                                  const BinScheme& scheme, double phi0,
                                  double phi_lo, double phi_hi,
                                  int grid_points = 2001);

}  // namespace cghd
