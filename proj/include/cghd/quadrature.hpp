#pragma once

#include <stdexcept>

namespace cghd {

inline constexpr double kPi = 3.14159265358979323846;

double deg_to_rad(double deg);
double rad_to_deg(double rad);

/// Squeezing level in dB <-> squeezing parameter r (dB = 10 log10 e^{2r}).
double squeezing_db_to_r(double db);
double r_to_squeezing_db(double r);

/// Physical scenario: coherent amplitude alpha > 0 injected together with a
/// p-squeezed vacuum of parameter r >= 0 (r = 0 is the classical case).
/// Quadrature convention [x, p] = 2i, so the vacuum variance is 1.
struct InterferometerConfig {
  double alpha;
  double r;

  void validate() const;
};

/// Mean and variance of the dark-port p-quadrature at phase phi:
/// mean = -2 alpha sin(phi/2), variance = sin^2(phi/2) + e^{-2r} cos^2(phi/2).
struct GaussianMoments {
  double mean;
  double variance;
};

GaussianMoments moments(const InterferometerConfig& cfg, double phi);

/// Phase derivatives d(mean)/dphi and d(variance)/dphi of the moments above.
struct GaussianMomentsDerivative {
  double dmean;
  double dvariance;
};

GaussianMomentsDerivative moments_derivative(const InterferometerConfig& cfg,
                                             double phi);

/// Gaussian probability density of the quadrature outcome p at phase phi.
double pdf(const InterferometerConfig& cfg, double phi, double p);

/// Fisher information of ideal fine-grained homodyne detection at phi = 0:
/// alpha^2 e^{2r}.
double ideal_fisher(const InterferometerConfig& cfg);

/// Quantum Fisher information alpha^2 e^{2r} + sinh^2 r.
double qfi(const InterferometerConfig& cfg);

/// Heisenberg limit 1/n_tot and standard quantum limit 1/sqrt(n_tot).
struct ReferenceLimits {
  double hl;
  double sql;
};

ReferenceLimits reference_limits(double n_tot);

}  // namespace cghd
