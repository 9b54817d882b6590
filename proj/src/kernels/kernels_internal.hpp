#pragma once

#include "ehrenfest/kernels.hpp"

namespace ehrenfest::kernels::detail {

extern const KernelTable kScalarTable;
#if EHRENFEST_HAVE_AVX2
extern const KernelTable kAvx2Table;
#endif

}  // namespace ehrenfest::kernels::detail
