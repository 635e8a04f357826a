#pragma once

namespace cghd {

/// Error function, Cody-style rational approximations.
/// Absolute accuracy better than 1e-15 on the real line; erf(-x) = -erf(x)
/// holds exactly by construction.
double erf(double x);

/// Complementary error function, accurate in the far tail where 1 - erf(x)
/// would cancel.
double erfc(double x);

/// exp(-x*x), computed as exp(-x*x) with argument splitting to avoid the
/// rounding of x*x from costing accuracy for large |x|.
double exp_neg_square(double x);

}  // namespace cghd
