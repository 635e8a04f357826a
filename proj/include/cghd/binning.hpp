#pragma once

#include <span>
#include <vector>

#include "cghd/quadrature.hpp"

namespace cghd {

/// Bins with P_k below this are treated as empty and excluded from Fisher
/// sums (avoids 0/0 for far-tail bins at large |phi|).
inline constexpr double kProbabilityFloor = 1e-300;

/// Whether the outermost boundaries act as +-R (some probability escapes the
/// detection range) or as +-infinity (outer bins absorb the tails, so the
/// bin probabilities sum to 1 exactly).
enum class OuterMode { Finite, Infinite };

enum class Binning { Equal, Optimal };

/// Coarse-graining of the quadrature axis: M bins delimited by M+1 strictly
/// increasing boundaries spanning [-R, R]. The range R is interpreted as
/// 4 sigma(0) of the target distribution, which fixes the scale of the
/// r-invariant scaled boundaries c_k = e^r b_k / sqrt(2) = 2 sqrt(2) b_k / R.
struct BinScheme {
  std::vector<double> boundaries;
  double range = 0.0;
  OuterMode outer_mode = OuterMode::Finite;

  int bins() const { return static_cast<int>(boundaries.size()) - 1; }
  void validate() const;
};

/// Four-standard-deviation detection range R = 4 sigma(0) = 4 e^{-r}.
double default_range(const InterferometerConfig& cfg);

/// Symmetric equal partition of [-R, R] into M bins.
BinScheme equal_bins(int M, double R, OuterMode mode = OuterMode::Finite);

/// Scaled boundaries c_k = e^r b_k / sqrt(2).
std::vector<double> scaled_boundaries(const BinScheme& scheme, double r);

/// Detection probability per bin at phase phi (difference of erf terms).
std::vector<double> bin_probabilities(const InterferometerConfig& cfg,
                                      double phi, const BinScheme& scheme);

/// Analytic d P_k / d phi, including both the mean and the variance
/// dependence on phi.
std::vector<double> bin_prob_derivative(const InterferometerConfig& cfg,
                                        double phi, const BinScheme& scheme);

struct CoarseFisher {
  double value = 0.0;
  std::vector<int> excluded_bins;  // indices dropped by the probability floor
};

/// Fisher information of the binned measurement, sum_k (dP_k/dphi)^2 / P_k.
CoarseFisher coarse_fisher(const InterferometerConfig& cfg, double phi,
                           const BinScheme& scheme);

/// Fisher-information ratio f_M = F_M(0)/F_id(0) from scaled boundaries
/// alone; lies in (0, 1] and is independent of the squeezing parameter.
double fisher_ratio(std::span<const double> scaled,
                    OuterMode mode = OuterMode::Finite);

/// f_M of a scheme, using the R = 4 sigma(0) convention for the scaling.
double fisher_ratio(const BinScheme& scheme);

/// f_M of a scheme with an explicit squeezing parameter for the b -> c map.
double fisher_ratio(const BinScheme& scheme, double r);

struct OptimizedBins {
  BinScheme scheme;
  double ratio = 0.0;
  bool converged = false;
};

/// Maximizes f_M over the interior boundaries (outer ones stay at +-R,
/// antisymmetry is imposed). Simplex descent with deterministic restarts.
OptimizedBins optimize_bins(int M, double R, OuterMode mode = OuterMode::Finite);

/// Scheme for the requested binning mode: equal partition or optimized.
BinScheme make_scheme(int M, double R, Binning binning,
                      OuterMode mode = OuterMode::Finite);

struct ScalingRow {
  double n_tot;
  double dphi_ideal;
  double dphi_M;
  double hl;
  double sql;
};

/// Phase-estimation error vs total photon number with the photons split
/// evenly between squeezed vacuum and coherent state (sinh^2 r = alpha^2 =
/// n_tot / 2). dphi_M = dphi_ideal / sqrt(f_M): a pure vertical shift on
/// log-log axes, preserving the Heisenberg scaling.
std::vector<ScalingRow> scaling_sweep(std::span<const double> n_grid, int M,
                                      Binning binning, int nu);

}  // namespace cghd
