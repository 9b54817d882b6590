#pragma once

// Floating-point inner loops: sample reductions for the Monte Carlo
// summaries and the vector operations behind the iterative oracle solve.
//
// Each kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant. The variant is picked once at runtime from CPUID; setting
// EHRENFEST_SIMD=scalar forces the reference path. Variants agree with the
// reference to rounding (tests/test_kernels.cpp), not bit for bit.

#include <cstddef>
#include <cstdint>
#include <span>

namespace ehrenfest::kernels {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  Isa isa;
  const char* name;

  double (*sum)(const double* x, std::size_t n);
  // sum (x_i - mean)^2
  double (*sum_sq_dev)(const double* x, std::size_t n, double mean);
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y += a x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // y = x + b y
  void (*xpby)(const double* x, double b, double* y, std::size_t n);
  // out_i = exp(-rate x_i), rate >= 0, x_i >= 0
  void (*exp_neg_scaled)(const double* x, double rate, double* out, std::size_t n);
  // Fixed-degree operator y_r = x_r - coef * sum_j x[nbr[j * rows + r]].
  // nbr is column-major (neighbour slot j of all rows is contiguous); x must
  // have at least max(nbr)+1 entries, padding slots included.
  void (*gather_apply)(const std::int32_t* nbr, std::size_t rows, std::size_t degree,
                       const double* x, double coef, double* y);
};

const KernelTable& scalar_kernels();
// nullptr when the variant was not built or the CPU lacks AVX2.
const KernelTable* avx2_kernels();
// The table used by the library.
const KernelTable& active_kernels();

// Convenience wrappers over active_kernels().
double sum(std::span<const double> x);
double sum_sq_dev(std::span<const double> x, double mean);
double dot(std::span<const double> x, std::span<const double> y);

}  // namespace ehrenfest::kernels
