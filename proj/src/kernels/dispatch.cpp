#include <cstdlib>
#include <stdexcept>
#include <string_view>

#include "kernels_internal.hpp"

namespace ehrenfest::kernels {

namespace {

bool cpu_has_avx2() {
#if EHRENFEST_HAVE_AVX2 && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& select() {
  if (const char* forced = std::getenv("EHRENFEST_SIMD")) {
    if (std::string_view(forced) == "scalar") return detail::kScalarTable;
  }
  if (const KernelTable* t = avx2_kernels()) return *t;
  return detail::kScalarTable;
}

}  // namespace

const KernelTable& scalar_kernels() { return detail::kScalarTable; }

const KernelTable* avx2_kernels() {
#if EHRENFEST_HAVE_AVX2
  static const bool available = cpu_has_avx2();
  return available ? &detail::kAvx2Table : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active_kernels() {
  static const KernelTable& table = select();
  return table;
}

double sum(std::span<const double> x) { return active_kernels().sum(x.data(), x.size()); }

double sum_sq_dev(std::span<const double> x, double mean) {
  return active_kernels().sum_sq_dev(x.data(), x.size(), mean);
}

double dot(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("dot of vectors with different lengths");
  return active_kernels().dot(x.data(), y.data(), x.size());
}

}  // namespace ehrenfest::kernels
