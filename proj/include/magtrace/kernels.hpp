#pragma once

#include <cstddef>

namespace magtrace::kernels {

enum class Isa { scalar, avx2 };

const char* to_string(Isa isa);

/// lam[i] = sqrt(nu[i] + n2), shift[i] = lam[i] - en.
void shifted_sqrt_scalar(const double* nu, std::size_t n, double n2, double en, double* lam, double* shift);
#if MAGTRACE_HAVE_AVX2
void shifted_sqrt_avx2(const double* nu, std::size_t n, double n2, double en, double* lam, double* shift);
#endif

/// Best kernel supported by the running CPU. MAGTRACE_KERNEL=scalar forces
/// the reference path.
Isa active_isa();
bool isa_available(Isa isa);
void shifted_sqrt(Isa isa, const double* nu, std::size_t n, double n2, double en, double* lam, double* shift);
inline void shifted_sqrt(const double* nu, std::size_t n, double n2, double en, double* lam, double* shift) {
  shifted_sqrt(active_isa(), nu, n, n2, en, lam, shift);
}

}  // namespace magtrace::kernels
