#include "cghd/quadrature.hpp"

#include <cmath>
#include <string>

namespace cghd {

double deg_to_rad(double deg) { return deg * kPi / 180.0; }
double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

double squeezing_db_to_r(double db) { return std::log(10.0) * db / 20.0; }
double r_to_squeezing_db(double r) { return 20.0 * r / std::log(10.0); }

void InterferometerConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw std::invalid_argument("InterferometerConfig: alpha must be finite and > 0, got " +
                                std::to_string(alpha));
  if (!(r >= 0.0) || !std::isfinite(r))
    throw std::invalid_argument("InterferometerConfig: r must be finite and >= 0, got " +
                                std::to_string(r));
}

GaussianMoments moments(const InterferometerConfig& cfg, double phi) {
  const double s = std::sin(phi / 2.0);
  const double c = std::cos(phi / 2.0);
  return {-2.0 * cfg.alpha * s, s * s + std::exp(-2.0 * cfg.r) * c * c};
}

GaussianMomentsDerivative moments_derivative(const InterferometerConfig& cfg,
                                             double phi) {
  // d/dphi sin^2(phi/2) = sin(phi)/2; the cos^2 term contributes the opposite.
  const double half_sin = 0.5 * std::sin(phi);
  return {-cfg.alpha * std::cos(phi / 2.0),
          half_sin * (1.0 - std::exp(-2.0 * cfg.r))};
}

double pdf(const InterferometerConfig& cfg, double phi, double p) {
  const auto [mean, variance] = moments(cfg, phi);
  const double z = (p - mean);
  return std::exp(-z * z / (2.0 * variance)) / std::sqrt(2.0 * kPi * variance);
}

double ideal_fisher(const InterferometerConfig& cfg) {
  return cfg.alpha * cfg.alpha * std::exp(2.0 * cfg.r);
}

double qfi(const InterferometerConfig& cfg) {
  const double sh = std::sinh(cfg.r);
  return ideal_fisher(cfg) + sh * sh;
}

ReferenceLimits reference_limits(double n_tot) {
  if (!(n_tot > 0.0))
    throw std::invalid_argument("reference_limits: n_tot must be > 0");
  return {1.0 / n_tot, 1.0 / std::sqrt(n_tot)};
}

}  // namespace cghd
