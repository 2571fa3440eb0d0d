#include <cmath>

#include "magtrace/kernels.hpp"

namespace magtrace::kernels {

void shifted_sqrt_scalar(const double* nu, std::size_t n, double n2, double en, double* lam, double* shift) {
  for (std::size_t i = 0; i < n; ++i) {
    const double l = std::sqrt(nu[i] + n2);
    lam[i] = l;
    shift[i] = l - en;
  }
}

}  // namespace magtrace::kernels
