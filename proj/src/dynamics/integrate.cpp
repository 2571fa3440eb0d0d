#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>

#include <boost/numeric/odeint.hpp>

#include "flow.hpp"
#include "magtrace/error.hpp"

namespace magtrace {

namespace {

namespace odeint = boost::numeric::odeint;
using State4 = std::array<double, 4>;

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kChartMargin = 0.1;

PhaseState to_phase(const State4& x, int chart) { return PhaseState{{x[0], x[1]}, {x[2], x[3]}, chart}; }
// State ordering inside the stepper is (q1, q2, p1, p2).
State4 pack(const PhaseState& s) { return {s.q[0], s.q[1], s.p[0], s.p[1]}; }

[[noreturn]] void integrator_error(const char* what, double t) {
  char buf[192];
  std::snprintf(buf, sizeof buf, "integrator: %s at t=%.17g", what, t);
  fail(ErrorKind::integrator, buf);
}

// Integrates through the ascending output times, calling emit(i, state) at
// each. Shared by integrate() and integrate_path().
IntegrationResult run(const GeometrySpec& geo, const PhaseState& s0, double E, const std::vector<double>& times,
                      double tol, const std::function<void(std::size_t, const PhaseState&)>& emit) {
  require(tol > 0.0, "ODE tolerance must be positive");
  const double H0 = hamiltonian(geo, s0);
  if (!(std::abs(H0 - E) <= 1e-10)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "initial state is off shell: H=%.17g, E=%.17g", H0, E);
    fail(ErrorKind::validation, buf);
  }
  const bool katok = geo.kind == GeometryKind::katok;
  const double P0 = katok ? katok_first_integral(geo.eps, s0) : 0.0;
  const double drift_limit = 100.0 * tol;

  IntegrationResult res;
  int chart = s0.chart;
  State4 x = pack(s0);
  auto sys = [&geo](const State4& y, State4& dy, double) { detail::flow(geo, y.data(), dy.data()); };
  auto stepper = odeint::make_controlled(tol, tol, odeint::runge_kutta_fehlberg78<State4>());

  double t = 0.0;
  double dt = 1e-2;
  const std::size_t max_steps = 50'000'000;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double target = times[i];
    while (t < target) {
      const bool last = t + dt >= target;
      double h = last ? target - t : dt;
      const auto r = stepper.try_step(sys, x, t, h);
      if (r == odeint::fail) {
        dt = h;
        if (dt < 1e-14 * std::max(1.0, std::abs(target))) integrator_error("step size collapse", t);
        continue;
      }
      if (last) t = target;
      // A step clipped to hit an output time does not shrink the next one.
      if (!last) dt = h;
      if (++res.steps > max_steps) integrator_error("step budget exhausted", t);

      PhaseState cur = to_phase(x, chart);
      if (geo.kind == GeometryKind::sphere) {
        const double th = cur.q[0];
        if (th < kChartMargin || th > std::numbers::pi - kChartMargin) {
          cur = detail::sphere_to_chart(geo, cur, 1 - chart);
          chart = cur.chart;
          x = pack(cur);
          ++res.chart_switches;
        }
      }
      if (!detail::in_chart(geo, cur)) integrator_error("orbit left the chart domain", t);
      if (katok && std::sin(cur.q[0]) < std::sin(kChartMargin) * 0.5) integrator_error("orbit approached a pole", t);
      const double dH = std::abs(hamiltonian(geo, cur) - E);
      res.energy_drift = std::max(res.energy_drift, dH);
      if (dH > drift_limit) integrator_error("energy drift exceeds 100 tol", t);
      if (katok) {
        const double dP = std::abs(katok_first_integral(geo.eps, cur) - P0);
        res.integral_drift = std::max(res.integral_drift, dP);
        if (dP > drift_limit) integrator_error("first-integral drift exceeds 100 tol", t);
      }
    }
    emit(i, to_phase(x, chart));
  }
  res.state = to_phase(x, chart);
  return res;
}

}  // namespace

IntegrationResult integrate(const GeometrySpec& geo, const PhaseState& s0, double E, double t, double tol) {
  require(std::isfinite(t) && t >= 0.0, "integration time must be nonnegative");
  if (t == 0.0) {
    IntegrationResult res;
    hamiltonian(geo, s0);
    res.state = s0;
    return res;
  }
  return run(geo, s0, E, {t}, tol, [](std::size_t, const PhaseState&) {});
}

std::vector<PathSample> integrate_path(const GeometrySpec& geo, const PhaseState& s0, double E, double T,
                                       std::size_t n, double tol) {
  require(n >= 1, "path needs at least one interval");
  require(std::isfinite(T) && T >= 0.0, "path duration must be nonnegative");
  std::vector<PathSample> out(n + 1);
  out[0] = PathSample{0.0, s0};
  if (T == 0.0) {
    for (std::size_t i = 1; i <= n; ++i) out[i] = out[0];
    return out;
  }
  std::vector<double> times(n);
  for (std::size_t i = 1; i <= n; ++i) times[i - 1] = T * static_cast<double>(i) / static_cast<double>(n);
  run(geo, s0, E, times, tol, [&](std::size_t i, const PhaseState& s) { out[i + 1] = PathSample{times[i], s}; });
  return out;
}

namespace {

// A(qdot) for the geometry's connection form, evaluated from a state.
double connection_rate(const GeometrySpec& geo, const PhaseState& s) {
  const double x[4] = {s.q[0], s.q[1], s.p[0], s.p[1]};
  double dx[4];
  detail::flow(geo, x, dx);
  switch (geo.kind) {
    case GeometryKind::torus: return geo.B * s.q[0] * dx[1];
    case GeometryKind::hyperbolic: return geo.B * dx[0] / s.q[1];
    case GeometryKind::katok: {
      const double st = std::sin(s.q[0]);
      return geo.eps * st * st / (1.0 - geo.eps * geo.eps * st * st) * dx[1];
    }
    case GeometryKind::sphere: {
      const auto amb = detail::sphere_ambient(geo, s);
      const double z = amb.x[2];
      if (!(z > 0.0)) {
        fail(ErrorKind::validation, "orbit leaves the upper hemisphere; hemispheric holonomy undefined");
      }
      const double R = geo.R;
      return geo.B * (amb.x[0] * amb.v[1] - amb.x[1] * amb.v[0]) / (R * (R + z));
    }
  }
  return 0.0;
}

}  // namespace

double closure_gap(const GeometrySpec& geo, const PhaseState& a, const PhaseState& b) {
  if (geo.kind == GeometryKind::sphere) {
    const auto x = detail::sphere_ambient(geo, a).x;
    const auto y = detail::sphere_ambient(geo, b).x;
    return std::hypot(x[0] - y[0], x[1] - y[1], x[2] - y[2]);
  }
  double dphi = b.q[1] - a.q[1];
  if (geo.kind == GeometryKind::katok) dphi = std::remainder(dphi, kTwoPi);
  return std::hypot(b.q[0] - a.q[0], dphi);
}

double numeric_holonomy(const GeometrySpec& geo, const std::vector<PathSample>& path, double E) {
  (void)E;
  if (path.size() < 2) return 0.0;
  const double T = path.back().t - path.front().t;
  if (T == 0.0) return 0.0;
  const double gap = closure_gap(geo, path.front().s, path.back().s);
  if (!(gap < 1e-7)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "holonomy requires a closed path; endpoint gap %.3g", gap);
    fail(ErrorKind::validation, buf);
  }
  const std::size_t n = path.size() - 1;
  const double h = T / static_cast<double>(n);
  double sum = 0.5 * (connection_rate(geo, path.front().s) + connection_rate(geo, path.back().s));
  for (std::size_t i = 1; i < n; ++i) sum += connection_rate(geo, path[i].s);
  return h * sum;
}

HolonomyResult orbit_holonomy(const GeometrySpec& geo, const PhaseState& s0, double E, double T, double qtol,
                              double ode_tol) {
  HolonomyResult res;
  std::size_t n = 32;
  double prev = numeric_holonomy(geo, integrate_path(geo, s0, E, T, n, ode_tol), E);
  for (int level = 0; level < 12; ++level) {
    n *= 2;
    const double cur = numeric_holonomy(geo, integrate_path(geo, s0, E, T, n, ode_tol), E);
    res.value = cur;
    res.change = std::abs(cur - prev);
    res.samples = n;
    if (res.change <= qtol) return res;
    prev = cur;
  }
  fail(ErrorKind::quadrature, "holonomy quadrature did not converge");
}

}  // namespace magtrace
