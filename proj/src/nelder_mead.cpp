#include "cghd/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cghd {

namespace {

// Standard coefficients: reflection, expansion, contraction, shrink.
constexpr double kAlpha = 1.0;
constexpr double kGamma = 2.0;
constexpr double kRho = 0.5;
constexpr double kSigma = 0.5;

std::vector<double> centroid_excluding_worst(
    const std::vector<std::vector<double>>& pts, int worst) {
  const int n = static_cast<int>(pts[0].size());
  std::vector<double> c(n, 0.0);
  for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
    if (i == worst) continue;
    for (int j = 0; j < n; ++j) c[j] += pts[i][j];
  }
  for (double& v : c) v /= static_cast<double>(pts.size() - 1);
  return c;
}

std::vector<double> affine(const std::vector<double>& c,
                           const std::vector<double>& x, double t) {
  std::vector<double> out(c.size());
  for (size_t j = 0; j < c.size(); ++j) out[j] = c[j] + t * (x[j] - c[j]);
  return out;
}

}  // namespace

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> x0, const SimplexOptions& opts) {
  const int n = static_cast<int>(x0.size());
  std::vector<std::vector<double>> pts(n + 1, x0);
  for (int i = 0; i < n; ++i) {
    double step = opts.initial_step * std::fabs(x0[i]);
    if (step == 0.0) step = opts.initial_step;
    pts[i + 1][i] += step;
  }
  std::vector<double> vals(n + 1);
  for (int i = 0; i <= n; ++i) vals[i] = f(pts[i]);

  SimplexResult result;
  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    std::vector<int> order(n + 1);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return vals[a] < vals[b]; });
    const int best = order[0], worst = order[n], second = order[n - 1];

    const double fspread = vals[worst] - vals[best];
    double xspread = 0.0;
    for (int j = 0; j < n; ++j)
      xspread = std::max(xspread, std::fabs(pts[worst][j] - pts[best][j]));
    if (fspread <= opts.f_tolerance && xspread <= opts.x_tolerance) {
      result.converged = true;
      break;
    }

    const auto c = centroid_excluding_worst(pts, worst);
    auto xr = affine(c, pts[worst], -kAlpha);
    const double fr = f(xr);
    if (fr < vals[best]) {
      auto xe = affine(c, pts[worst], -kGamma);
      const double fe = f(xe);
      if (fe < fr) {
        pts[worst] = std::move(xe);
        vals[worst] = fe;
      } else {
        pts[worst] = std::move(xr);
        vals[worst] = fr;
      }
    } else if (fr < vals[second]) {
      pts[worst] = std::move(xr);
      vals[worst] = fr;
    } else {
      const bool outside = fr < vals[worst];
      auto xc = affine(c, outside ? xr : pts[worst], kRho);
      const double fc = f(xc);
      if (fc < std::min(fr, vals[worst])) {
        pts[worst] = std::move(xc);
        vals[worst] = fc;
      } else {
        for (int i = 0; i <= n; ++i) {
          if (i == best) continue;
          pts[i] = affine(pts[best], pts[i], kSigma);
          vals[i] = f(pts[i]);
        }
      }
    }
  }

  const auto it = std::min_element(vals.begin(), vals.end());
  result.x = pts[static_cast<size_t>(it - vals.begin())];
  result.value = *it;
  result.iterations = iter;
  return result;
}

}  // namespace cghd
