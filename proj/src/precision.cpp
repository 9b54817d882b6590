#include "ehrenfest/precision.hpp"

#include <cmath>
#include <stdexcept>

#include <mpfr.h>

namespace ehrenfest {

namespace {

// RAII holder for one mpfr_t.
class MpfrValue {
 public:
  explicit MpfrValue(mpfr_prec_t bits) { mpfr_init2(value_, bits); }
  ~MpfrValue() { mpfr_clear(value_); }
  MpfrValue(const MpfrValue&) = delete;
  MpfrValue& operator=(const MpfrValue&) = delete;
  mpfr_ptr get() { return value_; }

 private:
  mpfr_t value_;
};

mpfr_prec_t working_bits(const Rational& lambda, int digits) {
  if (digits < 1) throw std::invalid_argument("precision needs at least one digit");
  const double magnitude = std::abs(lambda.to_double());
  return static_cast<mpfr_prec_t>(std::ceil((digits + 5) * 3.3219280948873623) + 16 +
                                  std::ceil(std::log2(2.0 + magnitude)));
}

Rational to_rational(mpfr_ptr x) {
  mpq_class q;
  mpfr_get_q(q.get_mpq_t(), x);
  return Rational(q);
}

}  // namespace

Rational scaled_expm1(const Rational& lambda, long scale, int digits) {
  if (lambda.sign() < 0) throw std::domain_error("lambda must be non-negative");
  if (lambda.is_zero()) return Rational(0);
  MpfrValue x(working_bits(lambda, digits));
  mpfr_set_q(x.get(), lambda.mpq().get_mpq_t(), MPFR_RNDN);
  mpfr_expm1(x.get(), x.get(), MPFR_RNDN);
  return to_rational(x.get()) * Rational(scale);
}

Rational exp_neg(const Rational& lambda, int digits) {
  if (lambda.sign() < 0) throw std::domain_error("lambda must be non-negative");
  if (lambda.is_zero()) return Rational(1);
  MpfrValue x(working_bits(lambda, digits));
  mpfr_set_q(x.get(), lambda.mpq().get_mpq_t(), MPFR_RNDN);
  mpfr_neg(x.get(), x.get(), MPFR_RNDN);
  mpfr_exp(x.get(), x.get(), MPFR_RNDN);
  return to_rational(x.get());
}

std::string render_significant(const Rational& value, int digits) {
  if (digits < 1) throw std::invalid_argument("precision needs at least one digit");
  MpfrValue x(static_cast<mpfr_prec_t>(std::ceil(digits * 3.3219280948873623) + 16));
  mpfr_set_q(x.get(), value.mpq().get_mpq_t(), MPFR_RNDN);
  char* text = nullptr;
  if (mpfr_asprintf(&text, "%.*Re", digits - 1, x.get()) < 0) {
    throw std::runtime_error("mpfr_asprintf failed");
  }
  std::string out(text);
  mpfr_free_str(text);
  return out;
}

}  // namespace ehrenfest
