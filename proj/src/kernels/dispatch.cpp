#include <cstdlib>
#include <cstring>

#include "magtrace/kernels.hpp"

namespace magtrace::kernels {

const char* to_string(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) {
  if (isa == Isa::scalar) return true;
#if MAGTRACE_HAVE_AVX2
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa active_isa() {
  static const Isa chosen = [] {
    const char* env = std::getenv("MAGTRACE_KERNEL");
    if (env && std::strcmp(env, "scalar") == 0) return Isa::scalar;
    return isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar;
  }();
  return chosen;
}

void shifted_sqrt(Isa isa, const double* nu, std::size_t n, double n2, double en, double* lam, double* shift) {
#if MAGTRACE_HAVE_AVX2
  if (isa == Isa::avx2 && isa_available(Isa::avx2)) {
    shifted_sqrt_avx2(nu, n, n2, en, lam, shift);
    return;
  }
#endif
  (void)isa;
  shifted_sqrt_scalar(nu, n, n2, en, lam, shift);
}

}  // namespace magtrace::kernels
