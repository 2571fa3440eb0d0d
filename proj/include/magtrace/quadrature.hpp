#pragma once

#include <boost/math/quadrature/gauss.hpp>

#include <cstddef>

namespace magtrace::quad {

/// Composite 20-point Gauss-Legendre rule on [a, b] with `panels` equal panels.
/// Panels are visited left to right and nodes in a fixed order, so the result
/// is reproducible bit for bit.
template <class F>
auto composite_gauss(F&& f, double a, double b, std::size_t panels) {
  using rule = boost::math::quadrature::gauss<double, 20>;
  const auto& x = rule::abscissa();
  const auto& w = rule::weights();
  const double h = (b - a) / static_cast<double>(panels);
  const double half = 0.5 * h;
  decltype(f(a)) total{};
  for (std::size_t i = 0; i < panels; ++i) {
    const double mid = a + (static_cast<double>(i) + 0.5) * h;
    decltype(f(a)) panel{};
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (x[k] == 0.0) {
        panel += w[k] * f(mid);
      } else {
        panel += w[k] * (f(mid - half * x[k]) + f(mid + half * x[k]));
      }
    }
    total += half * panel;
  }
  return total;
}

}  // namespace magtrace::quad
