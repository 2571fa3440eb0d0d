#include "magtrace/tracesum.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

#include "magtrace/error.hpp"
#include "magtrace/summation.hpp"

namespace magtrace {

TraceValue y_n(const Model& model, int N, const EnergyLevel& level, const TestFunction& phi, double tail_tol,
               SumOrder order) {
  const Window win = enumerate_window(model, N, level, phi, tail_tol);
  CompensatedComplexSum acc;
  const std::size_t n = win.entries.size();
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = order == SumOrder::ascending ? k : n - 1 - k;
    acc.add(static_cast<double>(win.entries[i].mult) * phi(win.shift[i]));
  }
  TraceValue tv;
  tv.N = N;
  tv.value = acc.value();
  tv.tail_bound = win.tail_bound;
  tv.terms = n;
  return tv;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<TraceValue> y_sequence(const Model& model, const EnergyLevel& level, const TestFunction& phi,
                                   const std::vector<int>& N_list, double tail_tol, unsigned threads) {
  require(!N_list.empty(), "N list must be nonempty");
  for (std::size_t i = 1; i < N_list.size(); ++i) require(N_list[i] > N_list[i - 1], "N list must be ascending");
  check_energy(model, level);
  std::vector<TraceValue> out(N_list.size());
  parallel_for(N_list.size(), threads, [&](std::size_t i) { out[i] = y_n(model, N_list[i], level, phi, tail_tol); });
  return out;
}

}  // namespace magtrace
