#include "ehrenfest/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace ehrenfest {

namespace {

constexpr double kQuadratureTolerance = 1e-10;

}  // namespace

void SpecialFunctionContext::validate() const {
  params.validate();
  if (k < 0 || k > params.balls) {
    throw std::invalid_argument("overlap k=" + std::to_string(k) + " outside [0, " +
                                std::to_string(params.balls) + "]");
  }
}

std::vector<BigInt> kernel_weights(const SpecialFunctionContext& ctx) {
  ctx.validate();
  const int m = ctx.params.balls;
  const long nm1 = ctx.params.urns - 1;
  std::vector<BigInt> w(m + 1, 0);
  BigInt up_power = 1;  // (N-1)^i
  for (int i = 0; i <= ctx.k; ++i) {
    const BigInt left = binomial(ctx.k, i) * up_power;
    for (int j = 0; j <= m - ctx.k; ++j) {
      BigInt term = left * binomial(m - ctx.k, j);
      if (j % 2) term = -term;
      w[i + j] += term;
    }
    up_power *= nm1;
  }
  return w;
}

Rational f_k(const SpecialFunctionContext& ctx, const Rational& u) {
  if (u.sign() <= 0) throw std::domain_error("f_k needs u > 0");
  const auto w = kernel_weights(ctx);
  const long n = ctx.params.urns;
  const Rational shift = u * Rational(n - 1);
  Rational sum(0);
  for (std::size_t d = 0; d < w.size(); ++d) {
    if (w[d] == 0) continue;
    sum += Rational(w[d]) / (Rational(n * static_cast<long>(d)) + shift);
  }
  return sum;
}

Rational g_k(const SpecialFunctionContext& ctx, const Rational& u) {
  if (u.sign() < 0) throw std::domain_error("g_k needs u >= 0");
  const auto w = kernel_weights(ctx);
  const long n = ctx.params.urns;
  const Rational shift = u * Rational(n - 1);
  Rational sum(0);
  for (std::size_t d = 1; d < w.size(); ++d) {
    if (w[d] == 0) continue;
    sum += Rational(w[d]) / (Rational(n * static_cast<long>(d)) + shift);
  }
  return sum;
}

Rational g_derivative(const SpecialFunctionContext& ctx, int m) {
  if (m < 1) throw std::invalid_argument("g_derivative needs order m >= 1");
  const auto w = kernel_weights(ctx);
  const long n = ctx.params.urns;
  Rational sum(0);
  for (std::size_t d = 1; d < w.size(); ++d) {
    if (w[d] == 0) continue;
    sum += Rational(w[d]) / pow(Rational(n * static_cast<long>(d)), m + 1);
  }
  const Rational sign = m % 2 ? Rational(-1) : Rational(1);
  return sign * Rational(factorial(m)) * pow(Rational(n - 1), m) * sum;
}

GClosedForms g_closed_forms(const ModelParams& params) {
  params.validate();
  const long n = params.urns;
  const int m = params.balls;
  GClosedForms out;
  Rational harmonic(0);
  Rational spread(0);
  for (int i = 1; i <= m; ++i) {
    harmonic += Rational(1, i);
    spread += (pow(Rational(n), i) - Rational(1)) / Rational(i);
  }
  out.g0 = -harmonic / Rational(n);
  out.gM = spread / Rational(n);
  const Rational nm1(n - 1);
  out.gaps.reserve(m);
  for (int k = 0; k < m; ++k) {
    Rational inner(0);
    for (int i = 0; i <= k; ++i) inner += Rational(binomial(m, i)) / pow(nm1, i);
    out.gaps.push_back(pow(nm1, k) / (Rational(m) * Rational(binomial(m - 1, k))) * inner);
  }
  return out;
}

SeriesIdentitySides series_identity_sides(const ModelParams& params, const Rational& a) {
  params.validate();
  const int m = params.balls;
  SeriesIdentitySides s;
  Rational a_power(1);
  Rational shifted_power(1);  // (1+a)^i
  Rational running(0);        // sum_{j<=i} ((1+a)^j - 1)/j
  const Rational one_plus_a = Rational(1) + a;
  for (int i = 1; i <= m; ++i) {
    a_power *= a;
    shifted_power *= one_plus_a;
    const Rational c(binomial(m, i));
    s.first_lhs += c * a_power / Rational(i);
    s.second_lhs += c * a_power / Rational(static_cast<long>(i) * i);
    const Rational term = (shifted_power - Rational(1)) / Rational(i);
    s.first_rhs += term;
    running += term;
    s.second_rhs += running / Rational(i);
  }
  return s;
}

bool series_identities_check(const ModelParams& params, const Rational& a) {
  return series_identity_sides(params, a).holds();
}

double f_k_quadrature(const SpecialFunctionContext& ctx, double u) {
  ctx.validate();
  if (!(u > 0.0)) throw std::domain_error("f_k_quadrature needs u > 0");
  const double n = ctx.params.urns;
  const int k = ctx.k;
  const int m = ctx.params.balls;
  const double a = (n - 1.0) * u / n;
  auto poly = [&](double s) { return std::pow((n - 1.0) * s + 1.0, k) * std::pow(1.0 - s, m - k); };
  // a < 1: substitute v = s^a to remove the s^(a-1) singularity at 0.
  const bool substitute = a < 1.0;
  auto integrand = [&](double t) {
    if (substitute) return poly(t <= 0.0 ? 0.0 : std::pow(t, 1.0 / a));
    return std::pow(t, a - 1.0) * poly(t);
  };
  const double scale = substitute ? 1.0 / (n * a) : 1.0 / n;
  double error = 0.0;
  const double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, 0.0, 1.0, 30, kQuadratureTolerance / (scale * 16.0), &error);
  // Absolute target, relative once |f_k| > 1 (1e-10 absolute is below double resolution there).
  const double value = integral * scale;
  if (!(error * scale <= kQuadratureTolerance * std::max(1.0, std::abs(value)))) {
    std::ostringstream msg;
    msg << "f_k quadrature did not converge (error estimate " << error * scale << ")";
    throw std::runtime_error(msg.str());
  }
  return value;
}

Rational binomial_gap_expectation(const ModelParams& params, int m) {
  params.validate();
  const int balls = params.balls;
  if (m < 0 || m > balls - 1) {
    throw std::invalid_argument("binomial trial count m=" + std::to_string(m) + " outside [0, " +
                                std::to_string(balls - 1) + "]");
  }
  const Rational nm1(params.urns - 1);
  Rational sum(0);
  for (int i = balls - m; i <= balls; ++i) sum += Rational(binomial(balls, i)) / pow(nm1, i);
  return pow(nm1, balls - m) / (Rational(balls) * Rational(binomial(balls - 1, m))) * sum;
}

GTaylorTable::GTaylorTable(const ModelParams& params, int order) : params_(params), order_(order) {
  params.validate();
  if (order < 0) throw std::invalid_argument("negative Taylor order");
  const long n = params.urns;
  const Rational neg_rate(-(n - 1));
  coeffs_.resize(params.balls + 1);
  for (int k = 0; k <= params.balls; ++k) {
    const auto w = kernel_weights({params, k});
    auto& row = coeffs_[k];
    row.assign(order + 1, Rational(0));
    // c_{k,m} = (-(N-1))^m sum_{d>=1} w_d / (N d)^{m+1}
    for (std::size_t d = 1; d < w.size(); ++d) {
      if (w[d] == 0) continue;
      const Rational inv_pole = Rational(1) / Rational(n * static_cast<long>(d));
      Rational term = Rational(w[d]) * inv_pole;
      for (int mm = 0; mm <= order; ++mm) {
        row[mm] += term;
        term *= neg_rate * inv_pole;
      }
    }
  }
}

}  // namespace ehrenfest
