#include <cmath>
#include <numbers>
#include <random>

#include "flow.hpp"
#include "magtrace/error.hpp"

namespace magtrace {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double speed(double E) {
  require(std::isfinite(E) && E > 1.0, "energy parameter E must satisfy E > 1");
  return std::sqrt(E * E - 1.0);
}
}  // namespace

ClosedOrbits closed_orbit_invariants(const GeometrySpec& geo, double E) {
  const double c = speed(E);
  ClosedOrbits out;
  switch (geo.kind) {
    case GeometryKind::torus: {
      // Larmor circle of radius c/B, clockwise in the universal cover.
      OrbitInvariants o;
      o.T = kTwoPi * E / geo.B;
      o.L = c / E * o.T;
      o.Tsharp = o.T;
      o.hol = -kPi * c * c / geo.B;
      o.S = o.L * c + o.hol;
      o.maslov = 4;
      o.detIminusP = 0.0;
      o.orientation = -1;
      o.orientation_label = "clockwise";
      o.start.q = {0.0, 0.0};
      o.start.p = {c, 0.0};
      out.orbits.push_back(o);
      break;
    }
    case GeometryKind::sphere: {
      // Latitude circle tan(theta0) = cR/B, traversed with phi decreasing.
      const double R = geo.R;
      const double s = std::sqrt(c * c + 1.0 / (4.0 * R * R));
      const double th0 = std::atan2(c * R, geo.B);
      OrbitInvariants o;
      o.T = kTwoPi * R * E / s;
      o.L = kTwoPi * R * c / s;
      o.Tsharp = o.T;
      o.hol = -kPi * (1.0 - (geo.B / R) / s);
      o.S = o.L * c + o.hol;
      o.detIminusP = 0.0;
      o.orientation = -1;
      o.orientation_label = "clockwise about the north pole";
      o.start.q = {th0, 0.0};
      o.start.p = {0.0, -c * R * std::sin(th0)};
      out.orbits.push_back(o);
      break;
    }
    case GeometryKind::hyperbolic: {
      const double R = geo.R;
      if (!(c * R < 1.0)) {
        out.closed = false;
        out.note = "cR >= 1: the flow on this level has no periodic trajectories";
        break;
      }
      const double w = std::sqrt(1.0 - c * c * R * R);
      OrbitInvariants o;
      o.T = kTwoPi * E * R * R / w;
      o.L = kTwoPi * R * R * c / w;
      o.Tsharp = o.T;
      o.hol = -kTwoPi * geo.B * (1.0 / w - 1.0);
      o.S = o.L * c + o.hol;
      o.detIminusP = 0.0;
      o.orientation = -1;
      o.orientation_label = "clockwise in the upper half-plane";
      o.start.q = {0.0, 1.0};
      o.start.p = {c * R, 0.0};
      out.orbits.push_back(o);
      break;
    }
    case GeometryKind::katok: {
      const double eps = geo.eps;
      const double e1 = 1.0 - eps * eps;
      for (Orientation orient : {Orientation::plus, Orientation::minus}) {
        const int sg = sign_of(orient);
        OrbitInvariants o;
        o.T = kTwoPi * E / (c * e1);
        o.L = kTwoPi / e1;
        o.Tsharp = o.T;
        o.hol = sg * kTwoPi * eps / e1;
        o.S = o.L * c + o.hol;
        o.detIminusP = katok_poincare_analytic(eps, E, orient).detIminusP;
        if (std::abs(E - std::sqrt(2.0)) < 1e-12) o.maslov = maslov_katok(1, eps, orient).m;
        o.orientation = sg;
        o.orientation_label = sg > 0 ? "equator, phi increasing" : "equator, phi decreasing";
        o.start = katok_equator_state(eps, E, orient);
        out.orbits.push_back(o);
      }
      break;
    }
  }
  return out;
}

namespace {
double manifold_volume(const GeometrySpec& geo) {
  switch (geo.kind) {
    case GeometryKind::torus: return 1.0;
    case GeometryKind::sphere: return 4.0 * kPi * geo.R * geo.R;
    case GeometryKind::hyperbolic: return 4.0 * kPi * (geo.genus - 1) * geo.R * geo.R;
    case GeometryKind::katok: return 4.0 * kPi / (1.0 - geo.eps * geo.eps);
  }
  return 0.0;
}
}  // namespace

double liouville_volume(const GeometrySpec& geo, double E) {
  speed(E);
  return kTwoPi * E * manifold_volume(geo);
}

VolumeEstimate liouville_volume_mc(const GeometrySpec& geo, double E, std::size_t samples, std::uint64_t seed) {
  speed(E);
  require(samples >= 2, "Monte Carlo volume needs at least two samples");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double delta = 0.05 * (E - 1.0);
  const double cmax = std::sqrt((E + delta) * (E + delta) - 1.0);

  // Position box; the hyperbolic surface has no global chart, so its fibre
  // integral is sampled at one point and scaled by the Gauss-Bonnet area.
  double q1lo = 0.0, q1hi = 1.0, q2lo = 0.0, q2hi = 1.0, scale = 1.0;
  switch (geo.kind) {
    case GeometryKind::torus: break;
    case GeometryKind::sphere:
    case GeometryKind::katok:
      q1hi = kPi;
      q2hi = kTwoPi;
      break;
    case GeometryKind::hyperbolic:
      q1lo = q1hi = 0.0;
      q2lo = q2hi = 1.0;
      scale = manifold_volume(geo) / (geo.R * geo.R);
      break;
  }
  const double box = geo.kind == GeometryKind::hyperbolic ? 1.0 : (q1hi - q1lo) * (q2hi - q2lo);

  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    PhaseState s;
    s.q = {q1lo + (q1hi - q1lo) * u01(rng), q2lo + (q2hi - q2lo) * u01(rng)};
    double w = 0.0;
    if (detail::in_chart(geo, s)) {
      const auto lg = detail::local_geometry(geo, s.q[0], s.q[1]);
      const double a1 = cmax / std::sqrt(lg.g1), a2 = cmax / std::sqrt(lg.g2);
      s.p = {a1 * (2.0 * u01(rng) - 1.0), a2 * (2.0 * u01(rng) - 1.0)};
      const double H = std::sqrt(lg.g1 * s.p[0] * s.p[0] + lg.g2 * s.p[1] * s.p[1] + 1.0);
      if (std::abs(H - E) < delta) w = 4.0 * a1 * a2 / (2.0 * delta);
    } else {
      u01(rng);
      u01(rng);
    }
    const double d = w - mean;
    mean += d / static_cast<double>(i + 1);
    m2 += d * (w - mean);
  }
  VolumeEstimate est;
  est.samples = samples;
  est.estimate = box * scale * mean;
  est.std_error = box * scale * std::sqrt(m2 / static_cast<double>(samples - 1) / static_cast<double>(samples));
  return est;
}

}  // namespace magtrace
