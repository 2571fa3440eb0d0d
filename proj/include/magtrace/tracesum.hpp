#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "magtrace/spectra.hpp"
#include "magtrace/testfn.hpp"

namespace magtrace {

struct TraceValue {
  int N = 0;
  cplx value = 0.0;
  double tail_bound = 0.0;
  std::size_t terms = 0;
};

enum class SumOrder { ascending, descending };

/// Y_N(phi) = sum over the window of mult * phi(lambda - EN), compensated.
TraceValue y_n(const Model& model, int N, const EnergyLevel& level, const TestFunction& phi, double tail_tol,
               SumOrder order = SumOrder::ascending);

/// Elementwise y_n over an ascending N list. Work is split across `threads`
/// workers; each N is computed independently so the output does not depend
/// on the thread count.
std::vector<TraceValue> y_sequence(const Model& model, const EnergyLevel& level, const TestFunction& phi,
                                   const std::vector<int>& N_list, double tail_tol, unsigned threads = 1);

/// Runs body(i) for i in [0, n) on up to `threads` workers. Exceptions are
/// rethrown on the caller (the one from the lowest index wins).
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace magtrace
