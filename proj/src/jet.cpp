#include "ehrenfest/jet.hpp"

#include <stdexcept>
#include <string>

namespace ehrenfest {

namespace {

void require_same_order(const SeriesJet& a, const SeriesJet& b) {
  if (a.order() != b.order()) {
    throw std::invalid_argument("jet order mismatch: " + std::to_string(a.order()) + " vs " +
                                std::to_string(b.order()));
  }
}

}  // namespace

SeriesJet::SeriesJet(std::size_t order) : coeffs_(order + 1, Rational(0)) {}

SeriesJet::SeriesJet(std::vector<Rational> coefficients) : coeffs_(std::move(coefficients)) {
  if (coeffs_.empty()) throw std::invalid_argument("jet needs at least one coefficient");
}

SeriesJet SeriesJet::constant(const Rational& c, std::size_t order) {
  SeriesJet out(order);
  out.coeffs_[0] = c;
  return out;
}

SeriesJet SeriesJet::variable(std::size_t order) {
  SeriesJet out(order);
  if (order >= 1) out.coeffs_[1] = 1;
  return out;
}

SeriesJet SeriesJet::scaled_expm1(const Rational& scale, std::size_t order) {
  SeriesJet out(order);
  Rational term = scale;
  for (std::size_t i = 1; i <= order; ++i) {
    term /= Rational(static_cast<long>(i));
    out.coeffs_[i] = term;
  }
  return out;
}

Rational SeriesJet::derivative_at_zero(std::size_t i) const {
  return coeffs_.at(i) * Rational(factorial(static_cast<long>(i)));
}

SeriesJet& SeriesJet::operator+=(const SeriesJet& rhs) {
  require_same_order(*this, rhs);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += rhs.coeffs_[i];
  return *this;
}

SeriesJet& SeriesJet::operator-=(const SeriesJet& rhs) {
  require_same_order(*this, rhs);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= rhs.coeffs_[i];
  return *this;
}

SeriesJet& SeriesJet::operator*=(const Rational& scalar) {
  for (auto& c : coeffs_) c *= scalar;
  return *this;
}

SeriesJet operator*(const SeriesJet& a, const SeriesJet& b) {
  require_same_order(a, b);
  const std::size_t n = a.order();
  SeriesJet out(n);
  for (std::size_t i = 0; i <= n; ++i) {
    if (a.coeffs_[i].is_zero()) continue;
    for (std::size_t j = 0; i + j <= n; ++j) out.coeffs_[i + j] += a.coeffs_[i] * b.coeffs_[j];
  }
  return out;
}

SeriesJet operator/(const SeriesJet& a, const SeriesJet& b) {
  require_same_order(a, b);
  if (b.coeffs_[0].is_zero()) {
    throw std::domain_error("jet division by a series with zero constant term");
  }
  const std::size_t n = a.order();
  SeriesJet q(n);
  // a = q * b solved coefficientwise.
  for (std::size_t i = 0; i <= n; ++i) {
    Rational acc = a.coeffs_[i];
    for (std::size_t j = 1; j <= i; ++j) acc -= q.coeffs_[i - j] * b.coeffs_[j];
    q.coeffs_[i] = acc / b.coeffs_[0];
  }
  return q;
}

SeriesJet compose(const SeriesJet& outer, const SeriesJet& inner) {
  require_same_order(outer, inner);
  if (!inner[0].is_zero()) {
    throw std::domain_error("jet composition needs an inner series with zero constant term");
  }
  const std::size_t n = outer.order();
  // Horner in the inner series.
  SeriesJet out = SeriesJet::constant(outer[n], n);
  for (std::size_t i = n; i-- > 0;) {
    out = out * inner;
    out[0] += outer[i];
  }
  return out;
}

}  // namespace ehrenfest
