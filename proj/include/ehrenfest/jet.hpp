#pragma once

// Truncated power series with exact rational coefficients.
//
// A SeriesJet of order n stores c_0..c_n of sum c_i t^i; all arithmetic is
// closed at that order. Used to differentiate Laplace transforms at 0.

#include <cstddef>
#include <span>
#include <vector>

#include "ehrenfest/rational.hpp"

namespace ehrenfest {

class SeriesJet {
 public:
  // Zero series of the given order.
  explicit SeriesJet(std::size_t order);
  // Coefficients c_0..c_n; the order is coefficients.size() - 1.
  explicit SeriesJet(std::vector<Rational> coefficients);

  static SeriesJet constant(const Rational& c, std::size_t order);
  // The series t (identity).
  static SeriesJet variable(std::size_t order);
  // scale * (e^t - 1).
  static SeriesJet scaled_expm1(const Rational& scale, std::size_t order);

  std::size_t order() const { return coeffs_.size() - 1; }
  const Rational& operator[](std::size_t i) const { return coeffs_.at(i); }
  Rational& operator[](std::size_t i) { return coeffs_.at(i); }
  std::span<const Rational> coefficients() const { return coeffs_; }

  // i-th derivative at 0, i.e. i! c_i.
  Rational derivative_at_zero(std::size_t i) const;

  SeriesJet& operator+=(const SeriesJet& rhs);
  SeriesJet& operator-=(const SeriesJet& rhs);
  SeriesJet& operator*=(const Rational& scalar);

  friend SeriesJet operator+(SeriesJet a, const SeriesJet& b) { return a += b; }
  friend SeriesJet operator-(SeriesJet a, const SeriesJet& b) { return a -= b; }
  friend SeriesJet operator*(SeriesJet a, const Rational& s) { return a *= s; }
  friend SeriesJet operator*(const SeriesJet& a, const SeriesJet& b);
  // Requires b[0] != 0.
  friend SeriesJet operator/(const SeriesJet& a, const SeriesJet& b);

  friend bool operator==(const SeriesJet& a, const SeriesJet& b) = default;

 private:
  std::vector<Rational> coeffs_;
};

// outer(inner(t)) truncated at the common order; requires inner[0] == 0.
SeriesJet compose(const SeriesJet& outer, const SeriesJet& inner);

}  // namespace ehrenfest
