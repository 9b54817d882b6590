#include "ehrenfest/rational.hpp"

#include <cctype>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <mpfr.h>

namespace ehrenfest {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

BigInt parse_integer(std::string_view text) {
  std::string_view body = text;
  bool negative = false;
  if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  if (!all_digits(body)) {
    throw std::invalid_argument("not an integer: '" + std::string(text) + "'");
  }
  BigInt value(std::string(body), 10);
  return negative ? BigInt(-value) : value;
}

Rational parse_decimal(std::string_view text) {
  std::string_view body = text;
  bool negative = false;
  if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  long exponent = 0;
  if (const auto e = body.find_first_of("eE"); e != std::string_view::npos) {
    const BigInt ex = parse_integer(body.substr(e + 1));
    if (!ex.fits_slong_p() || std::abs(ex.get_si()) > 100000) {
      throw std::invalid_argument("exponent out of range: '" + std::string(text) + "'");
    }
    exponent = ex.get_si();
    body = body.substr(0, e);
  }
  std::string digits;
  if (const auto dot = body.find('.'); dot != std::string_view::npos) {
    const auto int_part = body.substr(0, dot);
    const auto frac_part = body.substr(dot + 1);
    if ((int_part.empty() && frac_part.empty()) ||
        (!int_part.empty() && !all_digits(int_part)) ||
        (!frac_part.empty() && !all_digits(frac_part))) {
      throw std::invalid_argument("not a number: '" + std::string(text) + "'");
    }
    digits = std::string(int_part) + std::string(frac_part);
    exponent -= static_cast<long>(frac_part.size());
  } else {
    if (!all_digits(body)) {
      throw std::invalid_argument("not a number: '" + std::string(text) + "'");
    }
    digits = std::string(body);
  }
  if (digits.empty()) digits = "0";
  Rational value{BigInt(digits, 10)};
  value *= pow(Rational(10), exponent);
  return negative ? -value : value;
}

}  // namespace

Rational::Rational(const BigInt& num, const BigInt& den) {
  if (den == 0) throw std::domain_error("rational with zero denominator");
  value_ = mpq_class(num, den);
  value_.canonicalize();
}

Rational::Rational(long num, long den) : Rational(BigInt(num), BigInt(den)) {}

Rational Rational::from_double(double value) {
  if (!std::isfinite(value)) throw std::domain_error("non-finite double");
  return Rational(mpq_class(value));
}

Rational Rational::parse(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) throw std::invalid_argument("empty rational");
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const BigInt num = parse_integer(text.substr(0, slash));
    const auto den_text = text.substr(slash + 1);
    if (!all_digits(den_text)) {
      throw std::invalid_argument("bad denominator: '" + std::string(text) + "'");
    }
    return Rational(num, BigInt(std::string(den_text), 10));
  }
  return parse_decimal(text);
}

std::string Rational::to_string() const {
  if (is_integer()) return value_.get_num().get_str();
  return value_.get_num().get_str() + "/" + value_.get_den().get_str();
}

Rational& Rational::operator/=(const Rational& rhs) {
  if (rhs.is_zero()) throw std::domain_error("rational division by zero");
  value_ /= rhs.value_;
  return *this;
}

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.to_string(); }

Rational pow(const Rational& base, long exponent) {
  if (exponent < 0) {
    if (base.is_zero()) throw std::domain_error("zero to a negative power");
    return Rational(1) / pow(base, -exponent);
  }
  BigInt num, den;
  mpz_pow_ui(num.get_mpz_t(), base.numerator().get_mpz_t(), static_cast<unsigned long>(exponent));
  mpz_pow_ui(den.get_mpz_t(), base.denominator().get_mpz_t(), static_cast<unsigned long>(exponent));
  return Rational(num, den);
}

Rational abs(const Rational& r) { return r.sign() < 0 ? -r : r; }

BigInt binomial(long n, long m) {
  if (n < 0) throw std::domain_error("binomial with negative n");
  if (m < 0 || m > n) return 0;
  BigInt out;
  mpz_bin_uiui(out.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(m));
  return out;
}

BigInt factorial(long n) {
  if (n < 0) throw std::domain_error("factorial of a negative number");
  BigInt out;
  mpz_fac_ui(out.get_mpz_t(), static_cast<unsigned long>(n));
  return out;
}

double Rational::to_double() const {
  mpfr_t x;
  mpfr_init2(x, 53);
  mpfr_set_q(x, value_.get_mpq_t(), MPFR_RNDN);
  const double d = mpfr_get_d(x, MPFR_RNDN);
  mpfr_clear(x);
  return d;
}

}  // namespace ehrenfest
