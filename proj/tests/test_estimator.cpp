#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <random>

#include "cghd/estimator.hpp"

using cghd::BinScheme;
using cghd::InterferometerConfig;
using cghd::OuterMode;
using cghd::SquareMatrix;

namespace {

std::vector<double> random_simplex(std::mt19937_64& gen, int M, double floor = 1e-3) {
  std::uniform_real_distribution<double> unif(floor, 1.0);
  std::vector<double> p(M);
  double sum = 0.0;
  for (double& v : p) sum += (v = unif(gen));
  for (double& v : p) v /= sum;
  return p;
}

Eigen::MatrixXd to_eigen(const SquareMatrix& m) {
  Eigen::MatrixXd out(m.size(), m.size());
  for (int i = 0; i < m.size(); ++i)
    for (int j = 0; j < m.size(); ++j) out(i, j) = m(i, j);
  return out;
}

}  // namespace

TEST_CASE("covariance structure") {
  const auto coin = cghd::covariance(std::vector<double>{0.5, 0.5});
  CHECK(coin(0, 0) == doctest::Approx(0.25));
  CHECK(coin(0, 1) == doctest::Approx(-0.25));
  CHECK(coin(1, 0) == doctest::Approx(-0.25));
  CHECK(coin(1, 1) == doctest::Approx(0.25));

  const auto sure = cghd::covariance(std::vector<double>{1.0, 0.0, 0.0});
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(sure(i, j) == 0.0);
}

TEST_CASE("covariance is PSD with the all-ones kernel (eigensolver oracle)") {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 50; ++trial) {
    const int M = 2 + static_cast<int>(gen() % 9);
    const auto p = random_simplex(gen, M);
    const auto gamma = to_eigen(cghd::covariance(p));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gamma);
    CHECK(es.eigenvalues().minCoeff() >= -1e-14);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(M);
    CHECK((gamma * ones).norm() <= 1e-14);
    for (int k = 0; k < M; ++k)
      for (int l = 0; l < M; ++l)
        if (k != l) CHECK(gamma(k, l) < 0.0);  // anti-correlated bins
  }
}

TEST_CASE("closed-form pseudoinverse: frozen example and identities") {
  const auto g2 = cghd::pseudoinverse_closed_form(std::vector<double>{0.5, 0.5});
  CHECK(g2(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(g2(0, 1) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(g2(1, 0) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(g2(1, 1) == doctest::Approx(1.0).epsilon(1e-14));

  std::mt19937_64 gen(47);
  for (int trial = 0; trial < 100; ++trial) {
    const int M = 2 + static_cast<int>(gen() % 9);
    const auto p = random_simplex(gen, M);
    const auto gamma = to_eigen(cghd::covariance(p));
    const auto pinv = to_eigen(cghd::pseudoinverse_closed_form(p));

    // Gamma Gamma+ = Gamma+ Gamma = I - J/M.
    const Eigen::MatrixXd target =
        Eigen::MatrixXd::Identity(M, M) -
        Eigen::MatrixXd::Constant(M, M, 1.0 / M);
    CHECK(((gamma * pinv) - target).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(((pinv * gamma) - target).cwiseAbs().maxCoeff() <= 1e-12);

    // Row sums cancel analytically.
    CHECK((pinv * Eigen::VectorXd::Ones(M)).cwiseAbs().maxCoeff() <= 1e-9);

    // SVD oracle.
    const auto svd = to_eigen(cghd::pseudoinverse_svd(cghd::covariance(p)));
    CHECK((pinv - svd).cwiseAbs().maxCoeff() <= 1e-10 * pinv.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("closed-form pseudoinverse rejects collapsed bins") {
  CHECK_THROWS_AS(cghd::pseudoinverse_closed_form(std::vector<double>{1.0, 0.0}),
                  std::domain_error);
  CHECK_THROWS_WITH_AS(
      cghd::pseudoinverse_closed_form(std::vector<double>{0.5, 0.5, 0.0}),
      doctest::Contains("bin 3"), std::domain_error);
}

TEST_CASE("optimal weight: table rows for M = 2 and 5") {
  InterferometerConfig cfg{5.7, 0.4375};
  const double R = cghd::default_range(cfg);

  // M = 2: any symmetric split gives (0.707, -0.707).
  {
    const auto scheme = cghd::equal_bins(2, R, OuterMode::Infinite);
    const auto p = cghd::bin_probabilities(cfg, 0.0, scheme);
    const auto dp = cghd::bin_prob_derivative(cfg, 0.0, scheme);
    const auto w = cghd::optimal_weight(p, dp);
    CHECK(w[0] == doctest::Approx(0.707).epsilon(2e-3));
    CHECK(w[1] == doctest::Approx(-0.707).epsilon(2e-3));
  }

  // M = 5 equal, finite range (the convention that reproduces the printed
  // tables): (0.637, 0.307, 0, -0.307, -0.637).
  {
    const auto scheme = cghd::equal_bins(5, R, OuterMode::Finite);
    const auto p = cghd::bin_probabilities(cfg, 0.0, scheme);
    const auto dp = cghd::bin_prob_derivative(cfg, 0.0, scheme);
    const auto w = cghd::optimal_weight(p, dp);
    const std::vector<double> expected{0.637, 0.307, 0.0, -0.307, -0.637};
    for (int k = 0; k < 5; ++k) CHECK(std::fabs(w[k] - expected[k]) <= 1e-3);
  }

  // M = 5 optimal bins: (0.646, 0.287, 0, -0.287, -0.646).
  {
    auto scheme = cghd::optimize_bins(5, R).scheme;
    const auto p = cghd::bin_probabilities(cfg, 0.0, scheme);
    const auto dp = cghd::bin_prob_derivative(cfg, 0.0, scheme);
    const auto w = cghd::optimal_weight(p, dp);
    const std::vector<double> expected{0.646, 0.287, 0.0, -0.287, -0.646};
    for (int k = 0; k < 5; ++k) CHECK(std::fabs(w[k] - expected[k]) <= 1e-3);
  }
}

TEST_CASE("optimal weight: normalization, sign, zero-sum, antisymmetry") {
  const InterferometerConfig cfg{8.0, 0.5};
  for (int M : {2, 4, 7}) {
    const auto scheme =
        cghd::equal_bins(M, cghd::default_range(cfg), OuterMode::Infinite);
    const auto p = cghd::bin_probabilities(cfg, 0.0, scheme);
    const auto dp = cghd::bin_prob_derivative(cfg, 0.0, scheme);
    const auto w = cghd::optimal_weight(p, dp);
    double norm = 0.0, sum = 0.0;
    for (double v : w) {
      norm += v * v;
      sum += v;
    }
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::fabs(sum) <= 1e-12);
    CHECK(w[0] >= 0.0);
    for (int k = 0; k < M; ++k)
      CHECK(w[k] == doctest::Approx(-w[M - 1 - k]).epsilon(1e-9));
  }
  CHECK_THROWS_AS(cghd::optimal_weight(std::vector<double>{0.5, 0.5},
                                       std::vector<double>{0.0, 0.0}),
                  std::domain_error);
}

TEST_CASE("estimator variance saturates the CRB on 200 random instances") {
  std::mt19937_64 gen(4242);
  std::uniform_real_distribution<double> alpha_d(0.5, 6.0);
  std::uniform_real_distribution<double> r_d(0.0, 0.8);
  std::uniform_real_distribution<double> phi_d(-0.1, 0.1);
  std::uniform_int_distribution<int> m_d(2, 10);
  std::uniform_int_distribution<int> nu_d(1, 50);

  for (int trial = 0; trial < 200; ++trial) {
    const InterferometerConfig cfg{alpha_d(gen), r_d(gen)};
    const auto scheme = cghd::equal_bins(m_d(gen), cghd::default_range(cfg),
                                         OuterMode::Infinite);
    const double phi = phi_d(gen);
    const int nu = nu_d(gen);
    const auto p = cghd::bin_probabilities(cfg, phi, scheme);
    const auto dp = cghd::bin_prob_derivative(cfg, phi, scheme);
    const auto w = cghd::optimal_weight(p, dp);
    const double var = cghd::estimator_variance(w, p, dp, nu);
    const double fisher = cghd::coarse_fisher(cfg, phi, scheme).value;
    CHECK(std::fabs(var * nu * fisher - 1.0) <= 1e-9);
  }
}

TEST_CASE("finite-range weight harvests the out-of-range indicator too") {
  // With a finite range the covariance is invertible and the moments
  // estimator also sees the escaped-probability count: its variance is
  // 1/(nu (F_M + (sum dP)^2 / (1 - sum P))), at or below the M-bin CRB.
  std::mt19937_64 gen(555);
  std::uniform_real_distribution<double> alpha_d(0.5, 6.0);
  std::uniform_real_distribution<double> r_d(0.0, 0.8);
  std::uniform_real_distribution<double> phi_d(-0.1, 0.1);
  std::uniform_int_distribution<int> m_d(2, 10);

  for (int trial = 0; trial < 100; ++trial) {
    const InterferometerConfig cfg{alpha_d(gen), r_d(gen)};
    const auto scheme = cghd::equal_bins(m_d(gen), cghd::default_range(cfg),
                                         OuterMode::Finite);
    const double phi = phi_d(gen);
    const auto p = cghd::bin_probabilities(cfg, phi, scheme);
    const auto dp = cghd::bin_prob_derivative(cfg, phi, scheme);
    const auto w = cghd::optimal_weight(p, dp);
    const double var = cghd::estimator_variance(w, p, dp, 1);
    const double fisher = cghd::coarse_fisher(cfg, phi, scheme).value;

    double psum = 0.0, dpsum = 0.0;
    for (size_t k = 0; k < p.size(); ++k) {
      psum += p[k];
      dpsum += dp[k];
    }
    const double leak_info = dpsum * dpsum / (1.0 - psum);
    CHECK(std::fabs(var * (fisher + leak_info) - 1.0) <= 1e-9);
    CHECK(var * fisher <= 1.0 + 1e-12);
  }
}

TEST_CASE("estimator variance: frozen two-bin value") {
  // At phi = 0 no probability derivative escapes the range (symmetry), so
  // the finite-range variance is exactly 1/F_2 = 1/115.93.
  const InterferometerConfig cfg{10.0, 0.3};
  const auto scheme = cghd::equal_bins(2, cghd::default_range(cfg), OuterMode::Finite);
  const auto p = cghd::bin_probabilities(cfg, 0.0, scheme);
  const auto dp = cghd::bin_prob_derivative(cfg, 0.0, scheme);
  const auto w = cghd::optimal_weight(p, dp);
  CHECK(cghd::estimator_variance(w, p, dp, 1) ==
        doctest::Approx(8.6260e-3).epsilon(1e-4));
  CHECK(cghd::estimator_variance(w, p, dp, 1) ==
        doctest::Approx(1.0 / cghd::coarse_fisher(cfg, 0.0, scheme).value)
            .epsilon(1e-11));
}

TEST_CASE("estimator variance: scale invariance and suboptimal weights") {
  const InterferometerConfig cfg{5.7, 0.4375};
  const auto scheme = cghd::equal_bins(6, cghd::default_range(cfg), OuterMode::Infinite);
  const auto p = cghd::bin_probabilities(cfg, 0.0, scheme);
  const auto dp = cghd::bin_prob_derivative(cfg, 0.0, scheme);
  const auto w = cghd::optimal_weight(p, dp);
  const double best = cghd::estimator_variance(w, p, dp, 1);

  auto doubled = w;
  for (double& v : doubled) v *= 2.0;
  CHECK(cghd::estimator_variance(doubled, p, dp, 1) == best);

  // Sign-flipped middle components are strictly worse.
  auto flipped = w;
  flipped[2] = -flipped[2];
  flipped[3] = -flipped[3];
  CHECK(cghd::estimator_variance(flipped, p, dp, 1) >= best);

  std::mt19937_64 gen(9);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> random_w(p.size());
    for (double& v : random_w) v = noise(gen);
    double wdp = 0.0;
    for (size_t k = 0; k < p.size(); ++k) wdp += random_w[k] * dp[k];
    if (std::fabs(wdp) < 1e-6) continue;
    CHECK(cghd::estimator_variance(random_w, p, dp, 1) >= best * (1.0 - 1e-12));
  }

  // nu = 1 vs nu = 25 is an exact 1/nu rescaling.
  CHECK(cghd::estimator_variance(w, p, dp, 25) == doctest::Approx(best / 25.0));

  // The all-ones weight is orthogonal to dP (its entries sum to zero).
  std::vector<double> ones(p.size(), 1.0);
  CHECK_THROWS_AS(cghd::estimator_variance(ones, p, dp, 1), std::domain_error);
}

TEST_CASE("generalized eigenvalue residual and column-space condition") {
  std::mt19937_64 gen(1234);
  std::uniform_real_distribution<double> alpha_d(1.0, 8.0);
  std::uniform_real_distribution<double> r_d(0.0, 0.8);
  for (int trial = 0; trial < 40; ++trial) {
    const InterferometerConfig cfg{alpha_d(gen), r_d(gen)};
    const int M = 2 + static_cast<int>(gen() % 9);
    const auto scheme = cghd::equal_bins(M, cghd::default_range(cfg), OuterMode::Infinite);
    const auto p = cghd::bin_probabilities(cfg, 0.01, scheme);
    const auto dp = cghd::bin_prob_derivative(cfg, 0.01, scheme);
    const auto w = cghd::optimal_weight(p, dp);

    const auto gamma = cghd::covariance(p);
    const auto gw = cghd::matvec(gamma, w);
    double wgw = 0.0, wdp = 0.0, dpnorm = 0.0;
    for (size_t k = 0; k < w.size(); ++k) {
      wgw += w[k] * gw[k];
      wdp += w[k] * dp[k];
      dpnorm += dp[k] * dp[k];
    }
    dpnorm = std::sqrt(dpnorm);
    const double lambda = wgw / wdp;
    double resid = 0.0;
    for (size_t k = 0; k < w.size(); ++k) {
      const double d = gw[k] - lambda * dp[k];
      resid += d * d;
    }
    CHECK(std::sqrt(resid) <= 1e-10 * dpnorm);

    // Gamma Gamma+ dP = dP (dP lies in the column space of Gamma).
    const auto pinv = cghd::pseudoinverse_closed_form(p);
    const auto projected = cghd::matvec(gamma, cghd::matvec(pinv, dp));
    for (size_t k = 0; k < dp.size(); ++k)
      CHECK(std::fabs(projected[k] - dp[k]) <= 1e-10 * dpnorm);
  }
}

TEST_CASE("kernel freedom: shifting w along the all-ones vector changes nothing") {
  const InterferometerConfig cfg{5.7, 0.4375};
  const auto scheme = cghd::equal_bins(5, cghd::default_range(cfg), OuterMode::Infinite);
  const auto p = cghd::bin_probabilities(cfg, 0.0, scheme);
  const auto dp = cghd::bin_prob_derivative(cfg, 0.0, scheme);
  const auto w = cghd::optimal_weight(p, dp);

  auto shifted = w;
  for (double& v : shifted) v += 0.37;
  CHECK(cghd::estimator_variance(shifted, p, dp, 7) ==
        doctest::Approx(cghd::estimator_variance(w, p, dp, 7)).epsilon(1e-12));

  const double lo = cghd::deg_to_rad(-20.0), hi = cghd::deg_to_rad(20.0);
  const auto est = cghd::calibration_curve(w, cfg, scheme, 0.0, lo, hi);
  const auto est_shifted = cghd::calibration_curve(shifted, cfg, scheme, 0.0, lo, hi);
  const std::vector<int> sample{0, 1, 2, 2, 3, 4, 1, 2};
  CHECK(est_shifted.estimate(sample) ==
        doctest::Approx(est.estimate(sample)).epsilon(1e-12));
}

TEST_CASE("calibration curve: oddness, slope sign, closed form for M = 2") {
  const InterferometerConfig cfg{10.0, 0.3};
  const auto scheme = cghd::equal_bins(2, cghd::default_range(cfg), OuterMode::Infinite);
  const auto p = cghd::bin_probabilities(cfg, 0.0, scheme);
  const auto dp = cghd::bin_prob_derivative(cfg, 0.0, scheme);
  const auto w = cghd::optimal_weight(p, dp);
  const auto est = cghd::calibration_curve(w, cfg, scheme, 0.0,
                                           cghd::deg_to_rad(-20.0),
                                           cghd::deg_to_rad(20.0));
  // g(0) = 0 and g odd near 0 for a symmetric scheme.
  CHECK(std::fabs(est.invert(0.0)) <= 1e-12);
  const auto& curve = est.curve();
  const size_t n = curve.size();
  for (size_t i = 0; i < n / 4; ++i)
    CHECK(curve[i].g == doctest::Approx(-curve[n - 1 - i].g).epsilon(1e-10));

  // g'(phi0) = w . dP > 0 under the sign convention.
  double slope = 0.0;
  for (size_t k = 0; k < w.size(); ++k) slope += w[k] * dp[k];
  CHECK(slope > 0.0);
  CHECK(est.increasing());

  // M = 2 closed form: g(phi) = w1 (2 P1(phi) - 1).
  for (double phi_deg : {-15.0, -3.0, 1.0, 12.0}) {
    const double phi = cghd::deg_to_rad(phi_deg);
    const auto pp = cghd::bin_probabilities(cfg, phi, scheme);
    const double expected = w[0] * (2.0 * pp[0] - 1.0);
    // Tabulated curve evaluated via inversion round trip.
    CHECK(est.invert(expected) == doctest::Approx(phi).epsilon(1e-6));
  }
}

TEST_CASE("calibration curve rejects non-monotone ranges") {
  // Over +-170 deg the M = 2 calibration folds back (sin(phi/2) turns).
  const InterferometerConfig cfg{10.0, 0.3};
  const auto scheme = cghd::equal_bins(2, cghd::default_range(cfg), OuterMode::Infinite);
  const auto p = cghd::bin_probabilities(cfg, 0.0, scheme);
  const auto dp = cghd::bin_prob_derivative(cfg, 0.0, scheme);
  const auto w = cghd::optimal_weight(p, dp);
  CHECK_THROWS_AS(cghd::calibration_curve(w, cfg, scheme, 0.0,
                                          cghd::deg_to_rad(-170.0),
                                          cghd::deg_to_rad(170.0)),
                  std::domain_error);
}

TEST_CASE("estimate_phase: fixed point, population limit, saturation") {
  const InterferometerConfig cfg{10.0, 0.3};
  const auto scheme = cghd::equal_bins(2, cghd::default_range(cfg), OuterMode::Infinite);
  const double phi0 = 0.0;
  const auto p0 = cghd::bin_probabilities(cfg, phi0, scheme);
  const auto dp0 = cghd::bin_prob_derivative(cfg, phi0, scheme);
  const auto w = cghd::optimal_weight(p0, dp0);
  const auto est = cghd::calibration_curve(w, cfg, scheme, phi0,
                                           cghd::deg_to_rad(-20.0),
                                           cghd::deg_to_rad(20.0));

  // Samples reproducing <o>_{phi0} exactly: equal counts in both bins.
  const std::vector<int> balanced{0, 1, 0, 1};
  CHECK(est.estimate(balanced) == doctest::Approx(phi0).epsilon(1e-12));

  // Population limit at 2 deg: feed the exact P_k as frequencies.
  const double phi_true = cghd::deg_to_rad(2.0);
  const auto pt = cghd::bin_probabilities(cfg, phi_true, scheme);
  const double obar = w[0] * pt[0] + w[1] * pt[1];
  CHECK(std::fabs(cghd::rad_to_deg(est.invert(obar)) - 2.0) <= 1e-4);

  // Obar beyond the calibrated range errors instead of clamping.
  const std::vector<int> all_low(25, 0);
  CHECK_THROWS_AS(est.estimate(all_low), cghd::SaturationError);
  CHECK_THROWS_AS(est.invert(w[0]), cghd::SaturationError);
  CHECK_THROWS_AS(est.estimate(std::vector<int>{}), std::invalid_argument);
}
