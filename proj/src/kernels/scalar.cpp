// Reference kernels. Plain loops, no reassociation.

#include <cmath>

#include "kernels_internal.hpp"

namespace ehrenfest::kernels::detail {

namespace {

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double sum_sq_dev_scalar(const double* x, std::size_t n, double mean) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - mean;
    acc += d * d;
  }
  return acc;
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void xpby_scalar(const double* x, double b, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + b * y[i];
}

void exp_neg_scaled_scalar(const double* x, double rate, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(-rate * x[i]);
}

void gather_apply_scalar(const std::int32_t* nbr, std::size_t rows, std::size_t degree,
                         const double* x, double coef, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (std::size_t j = 0; j < degree; ++j) acc += x[nbr[j * rows + r]];
    y[r] = x[r] - coef * acc;
  }
}

}  // namespace

const KernelTable kScalarTable{
    Isa::Scalar,          "scalar",           sum_scalar,
    sum_sq_dev_scalar,    dot_scalar,         axpy_scalar,
    xpby_scalar,          exp_neg_scaled_scalar, gather_apply_scalar,
};

}  // namespace ehrenfest::kernels::detail
