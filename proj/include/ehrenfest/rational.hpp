#pragma once

// Exact arbitrary-precision rationals and binomial coefficients.
//
// Rational is a thin value type over GMP's mpq_class. Every operation leaves
// the value canonical: positive denominator, gcd(|num|, den) = 1.

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace ehrenfest {

using BigInt = mpz_class;

class Rational {
 public:
  Rational() = default;
  Rational(long value) : value_(value) {}  // NOLINT: implicit from integers
  Rational(int value) : value_(static_cast<long>(value)) {}  // NOLINT
  explicit Rational(const BigInt& value) : value_(value) {}
  Rational(const BigInt& num, const BigInt& den);
  Rational(long num, long den);
  explicit Rational(const mpq_class& value) : value_(value) { value_.canonicalize(); }

  // Exact binary value of a finite double.
  static Rational from_double(double value);

  // Accepts "p/q", "-p", "p", and plain decimals such as "0.125" or "-1.5e-3";
  // decimals are converted exactly (0.1 is 1/10, not the nearest double).
  static Rational parse(std::string_view text);

  BigInt numerator() const { return value_.get_num(); }
  BigInt denominator() const { return value_.get_den(); }
  const mpq_class& mpq() const { return value_; }

  bool is_zero() const { return sgn(value_) == 0; }
  bool is_integer() const { return value_.get_den() == 1; }
  int sign() const { return sgn(value_); }

  double to_double() const;  // nearest double

  // "num/den" in lowest terms; integers are written without "/1".
  std::string to_string() const;

  Rational& operator+=(const Rational& rhs) { value_ += rhs.value_; return *this; }
  Rational& operator-=(const Rational& rhs) { value_ -= rhs.value_; return *this; }
  Rational& operator*=(const Rational& rhs) { value_ *= rhs.value_; return *this; }
  Rational& operator/=(const Rational& rhs);

  friend Rational operator+(Rational lhs, const Rational& rhs) { return lhs += rhs; }
  friend Rational operator-(Rational lhs, const Rational& rhs) { return lhs -= rhs; }
  friend Rational operator*(Rational lhs, const Rational& rhs) { return lhs *= rhs; }
  friend Rational operator/(Rational lhs, const Rational& rhs) { return lhs /= rhs; }
  Rational operator-() const { return Rational(mpq_class(-value_)); }

  friend bool operator==(const Rational& a, const Rational& b) { return a.value_ == b.value_; }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const int c = cmp(a.value_, b.value_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

 private:
  mpq_class value_;
};

std::ostream& operator<<(std::ostream& os, const Rational& r);

// base^exponent, exponent may be negative for nonzero base.
Rational pow(const Rational& base, long exponent);
Rational abs(const Rational& r);

// C(n, m); zero outside 0 <= m <= n.
BigInt binomial(long n, long m);
BigInt factorial(long n);

}  // namespace ehrenfest
