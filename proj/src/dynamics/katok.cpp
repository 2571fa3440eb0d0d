#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include <boost/numeric/odeint.hpp>

#include "flow.hpp"
#include "magtrace/error.hpp"

namespace magtrace {

namespace {

namespace odeint = boost::numeric::odeint;
constexpr double kPi = std::numbers::pi;

void check_eps_E(double eps, double E) {
  require(std::isfinite(eps) && eps > 0.0 && eps < 1.0, "katok eps must lie in (0, 1)");
  require(std::isfinite(E) && E > 1.0, "energy parameter E must satisfy E > 1");
}

double katok_period(double eps, double E) { return 2.0 * kPi * E / (std::sqrt(E * E - 1.0) * (1.0 - eps * eps)); }

}  // namespace

Mat2 mat_pow(const Mat2& m, int k) {
  Mat2 base = k < 0 ? inverse(m) : m;
  unsigned n = static_cast<unsigned>(k < 0 ? -k : k);
  Mat2 out;
  while (n) {
    if (n & 1u) out = out * base;
    base = base * base;
    n >>= 1u;
  }
  return out;
}

Mat2 inverse(const Mat2& m) {
  const double det = m.det();
  return {m.d / det, -m.b / det, -m.c / det, m.a / det};
}

double det_I_minus(const Mat2& m) { return (1.0 - m.a) * (1.0 - m.d) - m.b * m.c; }

PhaseState katok_equator_state(double eps, double E, Orientation o) {
  check_eps_E(eps, E);
  const double c = std::sqrt(E * E - 1.0);
  PhaseState s;
  s.q = {kPi / 2.0, 0.0};
  s.p = {0.0, sign_of(o) * c / (1.0 - eps * eps)};
  return s;
}

KatokPoincare katok_poincare_analytic(double eps, double E, Orientation o) {
  check_eps_E(eps, E);
  const double sg = sign_of(o);
  const double c2 = E * E - 1.0;
  const double c = std::sqrt(c2);
  const double e1 = 1.0 - eps * eps;
  KatokPoincare out;
  out.a = std::sqrt(c2 * (1.0 + eps * eps) + sg * 2.0 * eps * c);
  out.alpha = 2.0 * kPi / e1 * std::sqrt(1.0 + eps * eps + sg * 2.0 * eps / c);
  const double ca = std::cos(out.alpha), sa = std::sin(out.alpha);
  out.P = {ca, e1 / out.a * sa, -out.a / e1 * sa, ca};
  const double h = std::sin(out.alpha / 2.0);
  out.detIminusP = 4.0 * h * h;
  return out;
}

Mat2 katok_monodromy_numeric(double eps, double E, Orientation o, double tol) {
  check_eps_E(eps, E);
  require(tol > 0.0, "ODE tolerance must be positive");
  const GeometrySpec geo = GeometrySpec::katok(eps);
  const PhaseState s0 = katok_equator_state(eps, E, o);
  const double T = katok_period(eps, E);

  using State = std::array<double, 20>;
  using D4 = detail::Dual<4>;
  // y = (x[4], Phi[4x4] row-major), dPhi/dt = J(x) Phi.
  auto sys = [&geo](const State& y, State& dy, double) {
    D4 xd[4];
    for (int i = 0; i < 4; ++i) xd[i] = D4::variable(y[i], i);
    D4 fd[4];
    detail::flow(geo, xd, fd);
    for (int i = 0; i < 4; ++i) dy[i] = fd[i].v;
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        double acc = 0.0;
        for (int k = 0; k < 4; ++k) acc += fd[r].d[k] * y[4 + 4 * k + c];
        dy[4 + 4 * r + c] = acc;
      }
    }
  };
  State y{};
  y[0] = s0.q[0];
  y[1] = s0.q[1];
  y[2] = s0.p[0];
  y[3] = s0.p[1];
  for (int i = 0; i < 4; ++i) y[4 + 5 * i] = 1.0;

  auto stepper = odeint::make_controlled(tol, tol, odeint::runge_kutta_fehlberg78<State>());
  double t = 0.0, dt = 1e-2;
  std::size_t steps = 0;
  while (t < T) {
    const bool last = t + dt >= T;
    double h = last ? T - t : dt;
    if (stepper.try_step(sys, y, t, h) == odeint::fail) {
      dt = h;
      if (dt < 1e-14 * T) fail(ErrorKind::integrator, "variational integration: step size collapse");
      continue;
    }
    if (last) t = T;
    if (!last) dt = h;
    if (++steps > 10'000'000) fail(ErrorKind::integrator, "variational integration: step budget exhausted");
  }
  // Transverse block: theta is state index 0, p_theta is index 2.
  return {y[4 + 0], y[4 + 2], y[4 + 8], y[4 + 10]};
}

MaslovResult maslov_katok(int k, double eps, Orientation o, double margin) {
  require(k != 0, "Maslov index requires k != 0");
  check_eps_E(eps, std::sqrt(2.0));
  const double E = std::sqrt(2.0);
  const double sg = sign_of(o);
  const KatokPoincare an = katok_poincare_analytic(eps, E, o);
  MaslovResult out;
  // Rotation of the vertical line in the (Theta, P_theta) plane over k periods.
  out.rotation = an.a / E * k * katok_period(eps, E);
  const double z = out.rotation / kPi;
  const double zc = 2.0 * k / (1.0 - sg * eps);
  const double frac = z - std::floor(z);
  const double to_half = std::abs(frac - 0.5);
  const double to_int = std::min(frac, 1.0 - frac);
  if (!(2.0 * to_half > margin) || !(2.0 * to_int > margin)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "Maslov index near resonance: k=%d, branch %c, 2k/(1%ceps)=%.17g", k,
                  o == Orientation::plus ? '+' : '-', o == Orientation::plus ? '-' : '+', zc);
    fail(ErrorKind::resonance, buf);
  }
  const int sk = k > 0 ? 1 : -1;
  out.kappa = static_cast<int>(std::floor(z + 0.5));
  out.sgnR = (frac < 0.5 ? 1 : -1) + 2 * sk;
  out.m = out.sgnR + 2 * out.kappa;
  out.closed_form = 2 * static_cast<int>(std::floor(zc)) + 2 * sk + 1;
  if (out.m != out.closed_form) {
    throw std::logic_error("Maslov rotation count disagrees with the closed form");
  }
  return out;
}

}  // namespace magtrace
