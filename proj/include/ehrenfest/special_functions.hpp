#pragma once

// Exact evaluation of the resolvent kernels f_k(u) and g_k(u) and their
// derivatives at u = 0, plus the closed forms and identities built on them.
//
// With w_{k,d} the coefficient of s^d in ((N-1)s + 1)^k (1 - s)^(M-k):
//
//   f_k(u) = sum_{d=0}^{M}  w_{k,d} / (N d + u (N-1))          (u > 0)
//   g_k(u) = sum_{d=1}^{M}  w_{k,d} / (N d + u (N-1))          (u >= 0)
//
// so g_k(u) = f_k(u) - 1/(u (N-1)). Everything here is exact except
// f_k_quadrature, which exists only as an independent cross-check.

#include <vector>

#include "ehrenfest/model.hpp"
#include "ehrenfest/rational.hpp"

namespace ehrenfest {

struct SpecialFunctionContext {
  ModelParams params;
  int k = 0;  // overlap, 0 <= k <= M

  void validate() const;
};

// Coefficients w_{k,0..M}.
std::vector<BigInt> kernel_weights(const SpecialFunctionContext& ctx);

Rational f_k(const SpecialFunctionContext& ctx, const Rational& u);
Rational g_k(const SpecialFunctionContext& ctx, const Rational& u);
// g_k^{(m)}(0) for m >= 1.
Rational g_derivative(const SpecialFunctionContext& ctx, int m);

struct GClosedForms {
  Rational g0;
  Rational gM;
  std::vector<Rational> gaps;  // gaps[k] = g_{k+1}(0) - g_k(0), k = 0..M-1
};

GClosedForms g_closed_forms(const ModelParams& params);

// Both sides of
//   sum_i C(M,i) a^i / i   = sum_i ((1+a)^i - 1) / i
//   sum_i C(M,i) a^i / i^2 = sum_i (1/i) sum_{j<=i} ((1+a)^j - 1) / j
struct SeriesIdentitySides {
  Rational first_lhs, first_rhs;
  Rational second_lhs, second_rhs;
  bool holds() const { return first_lhs == first_rhs && second_lhs == second_rhs; }
};

SeriesIdentitySides series_identity_sides(const ModelParams& params, const Rational& a);
bool series_identities_check(const ModelParams& params, const Rational& a);

// f_k(u) from its integral representation
//   (1/N) int_0^1 s^{(N-1)u/N - 1} ((N-1)s + 1)^k (1-s)^{M-k} ds
// by adaptive Gauss-Kronrod, substituting v = s^{(N-1)u/N} when that exponent
// is below 1. Throws std::runtime_error if the error estimate stays above 1e-10
// (relative once |f_k| > 1).
double f_k_quadrature(const SpecialFunctionContext& ctx, double u);

// E[g_{z+1}(0) - g_z(0)] for z ~ Binomial(m, 1/(N-1)), closed form.
Rational binomial_gap_expectation(const ModelParams& params, int m);

// Taylor coefficients c_{k,m} = g_k^{(m)}(0) / m! for all k in [0, M] and
// m in [0, order]. Immutable once built; share freely across threads.
class GTaylorTable {
 public:
  GTaylorTable(const ModelParams& params, int order);

  const ModelParams& params() const { return params_; }
  int order() const { return order_; }
  const Rational& coefficient(int k, int m) const { return coeffs_.at(k).at(m); }
  const Rational& at_zero(int k) const { return coefficient(k, 0); }

 private:
  ModelParams params_;
  int order_;
  std::vector<std::vector<Rational>> coeffs_;
};

}  // namespace ehrenfest
