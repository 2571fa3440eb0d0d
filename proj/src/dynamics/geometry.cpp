#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "flow.hpp"
#include "magtrace/error.hpp"

namespace magtrace {

namespace {
constexpr double kPi = std::numbers::pi;
}

const char* to_string(GeometryKind kind) {
  switch (kind) {
    case GeometryKind::torus: return "torus";
    case GeometryKind::sphere: return "sphere";
    case GeometryKind::hyperbolic: return "hyperbolic";
    case GeometryKind::katok: return "katok";
  }
  return "unknown";
}

GeometrySpec GeometrySpec::torus() {
  GeometrySpec g;
  g.kind = GeometryKind::torus;
  g.B = 2.0 * kPi;
  return g;
}

GeometrySpec GeometrySpec::sphere(double R) {
  require(std::isfinite(R) && R > 0.0, "sphere radius R must be positive");
  GeometrySpec g;
  g.kind = GeometryKind::sphere;
  g.R = R;
  g.B = 0.5;
  return g;
}

GeometrySpec GeometrySpec::hyperbolic(double R, int genus) {
  require(std::isfinite(R) && R > 0.0, "hyperbolic scale R must be positive");
  require(genus >= 2, "genus must be at least 2");
  GeometrySpec g;
  g.kind = GeometryKind::hyperbolic;
  g.R = R;
  g.genus = genus;
  g.B = 1.0;
  return g;
}

GeometrySpec GeometrySpec::katok(double eps) {
  require(std::isfinite(eps) && eps > 0.0 && eps < 1.0, "katok eps must lie in (0, 1)");
  GeometrySpec g;
  g.kind = GeometryKind::katok;
  g.eps = eps;
  return g;
}

namespace detail {

bool in_chart(const GeometrySpec& geo, const PhaseState& s) {
  switch (geo.kind) {
    case GeometryKind::torus: return true;
    case GeometryKind::sphere:
    case GeometryKind::katok: return std::sin(s.q[0]) > 0.0;
    case GeometryKind::hyperbolic: return s.q[1] > 0.0;
  }
  return false;
}

namespace {
// Ambient coordinates of chart `chart`: chart 0 uses (x, y, z), chart 1 uses
// the cyclic relabelling (y, z, x) as its (X, Y, Z).
std::array<double, 3> unpermute(int chart, const std::array<double, 3>& v) {
  if (chart == 0) return v;
  return {v[2], v[0], v[1]};
}
std::array<double, 3> permute(int chart, const std::array<double, 3>& v) {
  if (chart == 0) return v;
  return {v[1], v[2], v[0]};
}
double dot(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
}  // namespace

Ambient sphere_ambient(const GeometrySpec& geo, const PhaseState& s) {
  const double R = geo.R;
  const double th = s.q[0], ph = s.q[1];
  const double st = std::sin(th), ct = std::cos(th), sp = std::sin(ph), cp = std::cos(ph);
  const double H = hamiltonian(geo, s);
  const double thd = s.p[0] / (R * R * H);
  const double phd = s.p[1] / (R * R * st * st * H);
  const std::array<double, 3> pos{R * st * cp, R * st * sp, R * ct};
  const std::array<double, 3> vel{R * (ct * cp * thd - st * sp * phd), R * (ct * sp * thd + st * cp * phd),
                                  -R * st * thd};
  return Ambient{unpermute(s.chart, pos), unpermute(s.chart, vel)};
}

PhaseState sphere_to_chart(const GeometrySpec& geo, const PhaseState& s, int chart) {
  if (chart == s.chart) return s;
  const double H = hamiltonian(geo, s);
  const Ambient amb = sphere_ambient(geo, s);
  const auto pos = permute(chart, amb.x);
  const auto vel = permute(chart, amb.v);
  const double R = geo.R;
  const double th = std::acos(std::clamp(pos[2] / R, -1.0, 1.0));
  const double ph = std::atan2(pos[1], pos[0]);
  const double st = std::sin(th), ct = std::cos(th), sp = std::sin(ph), cp = std::cos(ph);
  const std::array<double, 3> e_th{R * ct * cp, R * ct * sp, -R * st};
  const std::array<double, 3> e_ph{-R * st * sp, R * st * cp, 0.0};
  PhaseState out;
  out.chart = chart;
  out.q = {th, ph};
  // p_i = g_ij qdot^j H = H <v, e_i>
  out.p = {H * dot(vel, e_th), H * dot(vel, e_ph)};
  return out;
}

}  // namespace detail

double hamiltonian(const GeometrySpec& geo, const PhaseState& s) {
  if (!detail::in_chart(geo, s)) fail(ErrorKind::validation, "phase state outside its chart");
  const auto lg = detail::local_geometry(geo, s.q[0], s.q[1]);
  return std::sqrt(lg.g1 * s.p[0] * s.p[0] + lg.g2 * s.p[1] * s.p[1] + 1.0);
}

Tangent flow_rhs(const GeometrySpec& geo, const PhaseState& s, double E) {
  const double H = hamiltonian(geo, s);
  if (!(std::abs(H - E) <= 1e-10)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "state is off shell: H=%.17g, E=%.17g", H, E);
    fail(ErrorKind::validation, buf);
  }
  const double x[4] = {s.q[0], s.q[1], s.p[0], s.p[1]};
  double dx[4];
  detail::flow(geo, x, dx);
  return Tangent{{dx[0], dx[1]}, {dx[2], dx[3]}};
}

double katok_first_integral(double eps, const PhaseState& s) {
  const double st = std::sin(s.q[0]);
  return s.p[1] + eps * st * st / (1.0 - eps * eps * st * st);
}

}  // namespace magtrace
