#include <doctest.h>

#include <cmath>
#include <functional>

#include "cghd/quadrature.hpp"

namespace {

// Adaptive Simpson quadrature; test-side oracle for density normalization.
double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double fa, double fm, double fb, double whole,
                        double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(a, m, fa, flm, fm);
  const double right = simpson(m, b, fm, frm, fb);
  if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  return adaptive_simpson(f, a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, 40);
}

}  // namespace

using cghd::InterferometerConfig;

TEST_CASE("unit conversions") {
  CHECK(cghd::deg_to_rad(180.0) == doctest::Approx(cghd::kPi).epsilon(1e-15));
  CHECK(cghd::rad_to_deg(cghd::kPi / 2.0) == doctest::Approx(90.0).epsilon(1e-15));
  // 3.8 dB of squeezing corresponds to r ~ 0.4375.
  CHECK(cghd::squeezing_db_to_r(3.8) == doctest::Approx(0.437491).epsilon(1e-5));
  CHECK(cghd::r_to_squeezing_db(cghd::squeezing_db_to_r(2.7)) ==
        doctest::Approx(2.7).epsilon(1e-14));
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS((InterferometerConfig{0.0, 0.1}).validate(), std::invalid_argument);
  CHECK_THROWS_AS((InterferometerConfig{-2.0, 0.1}).validate(), std::invalid_argument);
  CHECK_THROWS_AS((InterferometerConfig{1.0, -0.1}).validate(), std::invalid_argument);
  CHECK_NOTHROW((InterferometerConfig{1.0, 0.0}).validate());
}

TEST_CASE("moments closed forms") {
  const InterferometerConfig a{10.0, 0.3};
  const auto m0 = cghd::moments(a, 0.0);
  CHECK(m0.mean == 0.0);
  CHECK(m0.variance == doctest::Approx(std::exp(-0.6)).epsilon(1e-15));

  const InterferometerConfig b{10.0, 0.0};
  const auto mpi = cghd::moments(b, cghd::kPi);
  CHECK(mpi.mean == doctest::Approx(-20.0).epsilon(1e-14));
  CHECK(mpi.variance == doctest::Approx(1.0).epsilon(1e-14));

  // alpha = 5.7, 3.8 dB squeezing, phi = -0.02 deg (frozen from the closed
  // forms; cross-checked against sampled moments in the simulate tests).
  const InterferometerConfig c{5.7, 0.4375};
  const auto md = cghd::moments(c, cghd::deg_to_rad(-0.02));
  CHECK(md.mean == doctest::Approx(1.98968e-3).epsilon(1e-5));
  CHECK(md.variance == doctest::Approx(0.416862).epsilon(1e-5));
}

TEST_CASE("moments derivative matches finite differences") {
  const InterferometerConfig cfg{5.7, 0.4375};
  const double h = 1e-6;
  for (double phi : {-0.4, -0.02, 0.0, 0.1, 0.35}) {
    const auto d = cghd::moments_derivative(cfg, phi);
    const auto up = cghd::moments(cfg, phi + h);
    const auto dn = cghd::moments(cfg, phi - h);
    CHECK(d.dmean == doctest::Approx((up.mean - dn.mean) / (2 * h)).epsilon(1e-8));
    CHECK(d.dvariance ==
          doctest::Approx((up.variance - dn.variance) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("pdf peak, symmetry, and normalization") {
  const InterferometerConfig cfg{10.0, 0.3};
  CHECK(cghd::pdf(cfg, 0.0, 0.0) == doctest::Approx(0.5385157509).epsilon(1e-9));

  const double phi = cghd::deg_to_rad(2.0);
  const auto m = cghd::moments(cfg, phi);
  const double sigma = std::sqrt(m.variance);
  CHECK(cghd::pdf(cfg, phi, m.mean) ==
        doctest::Approx(1.0 / (std::sqrt(2.0 * cghd::kPi) * sigma)).epsilon(1e-13));
  for (double delta : {0.1, 0.5, 1.7}) {
    CHECK(cghd::pdf(cfg, phi, m.mean + delta) ==
          doctest::Approx(cghd::pdf(cfg, phi, m.mean - delta)).epsilon(1e-13));
  }

  for (double r : {0.0, 0.3, 1.0}) {
    const InterferometerConfig c{5.7, r};
    const auto mm = cghd::moments(c, 0.07);
    const double s = std::sqrt(mm.variance);
    const double mass = integrate([&](double p) { return cghd::pdf(c, 0.07, p); },
                                  mm.mean - 10.0 * s, mm.mean + 10.0 * s, 1e-13);
    CHECK(std::fabs(mass - 1.0) <= 1e-10);
  }
}

TEST_CASE("ideal fisher and qfi") {
  CHECK(cghd::ideal_fisher({10.0, 0.3}) ==
        doctest::Approx(182.2118800391).epsilon(1e-10));
  CHECK(cghd::ideal_fisher({1.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cghd::ideal_fisher({5.7, 0.4375}) ==
        doctest::Approx(77.9394583010).epsilon(1e-10));

  CHECK(cghd::qfi({10.0, 0.0}) == doctest::Approx(100.0).epsilon(1e-14));
  CHECK(cghd::qfi({10.0, 0.3}) == doctest::Approx(182.3046126482).epsilon(1e-10));
  for (double r : {0.0, 0.2, 0.9}) {
    const InterferometerConfig cfg{3.3, r};
    CHECK(cghd::qfi(cfg) >= cghd::ideal_fisher(cfg));
    const double sh = std::sinh(r);
    CHECK(cghd::qfi(cfg) - cghd::ideal_fisher(cfg) ==
          doctest::Approx(sh * sh).epsilon(1e-13));
  }
}

TEST_CASE("finite-difference identity for the ideal fisher information") {
  const double h = 1e-6;
  for (const auto& cfg : {InterferometerConfig{10.0, 0.3},
                          InterferometerConfig{5.7, 0.4375},
                          InterferometerConfig{2.0, 0.0}}) {
    const double dmean =
        (cghd::moments(cfg, h).mean - cghd::moments(cfg, -h).mean) / (2 * h);
    const double fd = dmean * dmean / cghd::moments(cfg, 0.0).variance;
    CHECK(std::fabs(fd - cghd::ideal_fisher(cfg)) <=
          1e-9 * cghd::ideal_fisher(cfg) + 1e-9);
  }
}

TEST_CASE("variance stays within its phase bounds") {
  for (double r : {0.0, 0.3, 1.2}) {
    const InterferometerConfig cfg{4.0, r};
    const double floor = std::exp(-2.0 * r);
    for (double phi = -cghd::kPi / 2.0; phi <= cghd::kPi / 2.0; phi += 0.01) {
      const double v = cghd::moments(cfg, phi).variance;
      CHECK(v >= floor - 1e-15);
      CHECK(v <= 1.0 + 1e-15);
      CHECK(v > 0.0);
    }
  }
}

TEST_CASE("reference limits") {
  const auto l100 = cghd::reference_limits(100.0);
  CHECK(l100.hl == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(l100.sql == doctest::Approx(0.1).epsilon(1e-15));
  const auto l1 = cghd::reference_limits(1.0);
  CHECK(l1.hl == doctest::Approx(1.0));
  CHECK(l1.sql == doctest::Approx(1.0));
  for (double n : {1.0, 2.5, 77.0}) {
    const auto l = cghd::reference_limits(n);
    CHECK(l.hl <= l.sql + 1e-15);
  }
  CHECK_THROWS_AS(cghd::reference_limits(0.0), std::invalid_argument);
  CHECK_THROWS_AS(cghd::reference_limits(-3.0), std::invalid_argument);
}
