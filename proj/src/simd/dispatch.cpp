#include <cstdlib>
#include <string_view>

#include "fesf/simd.hpp"

namespace fesf::simd {

#if FESF_HAVE_AVX2
const Kernels& avx2_table();
#endif

const Kernels* avx2_kernels() {
#if FESF_HAVE_AVX2
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const Kernels& active() {
  static const Kernels& chosen = [&]() -> const Kernels& {
    const char* forced = std::getenv("FESF_SIMD");
    if (forced != nullptr && std::string_view(forced) == "scalar") return scalar_kernels();
    if (const Kernels* v = avx2_kernels()) return *v;
    return scalar_kernels();
  }();
  return chosen;
}

}  // namespace fesf::simd
