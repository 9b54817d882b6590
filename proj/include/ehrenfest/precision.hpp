#pragma once

// Bridges between exact rationals and irrational arguments (e^lambda) using
// MPFR. Only used where the lambda-domain forces an approximation; the exact
// kernels never see a float.

#include <string>

#include "ehrenfest/rational.hpp"

namespace ehrenfest {

// Rational approximation of scale * (e^lambda - 1) with relative error at
// most 10^-(digits + 5). lambda >= 0.
Rational scaled_expm1(const Rational& lambda, long scale, int digits);

// Rational approximation of e^-lambda with relative error at most
// 10^-(digits + 5). lambda >= 0.
Rational exp_neg(const Rational& lambda, int digits);

// Decimal rendering with `digits` significant digits, e.g. "3.33333e-01".
std::string render_significant(const Rational& value, int digits);

}  // namespace ehrenfest
