#pragma once

#include "fadec/kernels/kernels.hpp"

namespace fadec::kernels {

namespace scalar {
extern const KernelTable kTable;
}

#if defined(FADEC_HAVE_AVX2)
namespace avx2 {
extern const KernelTable kTable;
}
#endif

}  // namespace fadec::kernels
