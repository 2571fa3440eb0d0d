#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "magtrace/dynamics.hpp"
#include "magtrace/error.hpp"

using namespace magtrace;

namespace {
const double kPi = std::numbers::pi;
const double kEps5 = 1.0 / std::sqrt(5.0);

double wrap(double x) { return std::remainder(x, 2.0 * kPi); }

PhaseState state(double q1, double q2, double p1, double p2, int chart = 0) { return PhaseState{{q1, q2}, {p1, p2}, chart}; }

std::vector<GeometrySpec> all_geometries() {
  return {GeometrySpec::torus(), GeometrySpec::sphere(0.5), GeometrySpec::hyperbolic(1.0, 2), GeometrySpec::katok(0.3)};
}
}  // namespace

TEST_CASE("hamiltonian examples") {
  for (const auto& g : all_geometries()) CHECK(hamiltonian(g, state(1.0, 0.5, 0.0, 0.0)) == 1.0);
  CHECK(std::abs(hamiltonian(GeometrySpec::torus(), state(0.2, 0.7, 1.0, 1.0)) - std::sqrt(3.0)) < 1e-15);
  const double eps = 0.3, E = std::sqrt(2.0);
  const auto s = state(kPi / 2.0, 0.0, 0.0, 1.0 / (1.0 - eps * eps));
  CHECK(std::abs(hamiltonian(GeometrySpec::katok(eps), s) - E) < 1e-15);
  CHECK_THROWS_AS(hamiltonian(GeometrySpec::hyperbolic(1.0, 2), state(0.0, -1.0, 0.0, 0.0)), Error);
}

TEST_CASE("flow right-hand side examples") {
  const double eps = 0.3, E = std::sqrt(2.0);
  const auto geo = GeometrySpec::katok(eps);
  for (Orientation o : {Orientation::plus, Orientation::minus}) {
    const auto d = flow_rhs(geo, katok_equator_state(eps, E, o), E);
    CHECK(std::abs(d.qdot[0]) < 1e-15);
    CHECK(std::abs(d.qdot[1] - sign_of(o) * (1.0 / E) * (1.0 - eps * eps)) < 1e-15);
    CHECK(std::abs(d.pdot[0]) < 1e-15);
    CHECK(d.pdot[1] == 0.0);
  }
  const auto t = flow_rhs(GeometrySpec::torus(), state(0.0, 0.0, std::sqrt(3.0), 0.0), 2.0);
  CHECK(std::abs(t.qdot[0] - std::sqrt(3.0) / 2.0) < 1e-15);
  CHECK(t.qdot[1] == 0.0);
  CHECK(t.pdot[0] == 0.0);
  CHECK(std::abs(t.pdot[1] + kPi * std::sqrt(3.0)) < 1e-14);
  const auto sg = GeometrySpec::sphere(1.0);
  for (double th = 0.1; th < kPi - 0.1; th += 0.05) {
    const auto s = state(th, 0.4, 0.3, 0.2 * std::sin(th));
    const auto d = flow_rhs(sg, s, hamiltonian(sg, s));
    CHECK(std::isfinite(d.pdot[0]));
    CHECK(std::isfinite(d.qdot[1]));
  }
  CHECK_THROWS_AS(flow_rhs(GeometrySpec::torus(), state(0.0, 0.0, 1.0, 0.0), 2.0), Error);
}

TEST_CASE("integration for zero time is the identity") {
  const auto s = state(0.3, -0.2, 1.0, 2.0);
  const auto r = integrate(GeometrySpec::torus(), s, hamiltonian(GeometrySpec::torus(), s), 0.0, 1e-11);
  CHECK(r.state.q == s.q);
  CHECK(r.state.p == s.p);
}

TEST_CASE("Katok equatorial orbit closes and conserves energy and the first integral") {
  const double E = std::sqrt(2.0);
  const double T = 2.0 * kPi * std::sqrt(2.0) / (1.0 - kEps5 * kEps5);
  const auto geo = GeometrySpec::katok(kEps5);
  for (Orientation o : {Orientation::plus, Orientation::minus}) {
    const auto s0 = katok_equator_state(kEps5, E, o);
    const auto r = integrate(geo, s0, E, T, 1e-11);
    CHECK(closure_gap(geo, s0, r.state) < 1e-8);
    CHECK(std::abs(r.state.p[0] - s0.p[0]) < 1e-8);
    CHECK(std::abs(r.state.p[1] - s0.p[1]) < 1e-8);
    CHECK(r.energy_drift < 1e-9);
    CHECK(r.integral_drift < 1e-9);
  }
}

TEST_CASE("hyperbolic orbit stays on its circle") {
  const double E = 1.2, R = 1.0, c = std::sqrt(E * E - 1.0);
  const auto geo = GeometrySpec::hyperbolic(R, 2);
  const auto orbs = closed_orbit_invariants(geo, E);
  REQUIRE(orbs.closed);
  const auto& o = orbs.orbits[0];
  const auto path = integrate_path(geo, o.start, E, o.T, 200, 1e-12);
  // Algebraic circle fit x^2 + y^2 + D x + F y + G = 0.
  double A[3][3] = {}, b[3] = {};
  for (const auto& p : path) {
    const double x = p.s.q[0], y = p.s.q[1], row[3] = {x, y, 1.0}, rhs = -(x * x + y * y);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) A[i][j] += row[i] * row[j];
      b[i] += row[i] * rhs;
    }
  }
  for (int i = 0; i < 3; ++i) {
    for (int k = i + 1; k < 3; ++k) {
      const double f = A[k][i] / A[i][i];
      for (int j = i; j < 3; ++j) A[k][j] -= f * A[i][j];
      b[k] -= f * b[i];
    }
  }
  double sol[3];
  for (int i = 2; i >= 0; --i) {
    double acc = b[i];
    for (int j = i + 1; j < 3; ++j) acc -= A[i][j] * sol[j];
    sol[i] = acc / A[i][i];
  }
  const double xc = -sol[0] / 2.0, yc = -sol[1] / 2.0;
  const double rho = std::sqrt(xc * xc + yc * yc - sol[2]);
  for (const auto& p : path) CHECK(std::abs(std::hypot(p.s.q[0] - xc, p.s.q[1] - yc) - rho) < 1e-7);
  CHECK(std::abs(rho / yc - c * R) < 1e-7);
}

TEST_CASE("closed-orbit invariants from the closed forms") {
  {
    const auto o = closed_orbit_invariants(GeometrySpec::torus(), 3.0).orbits.at(0);
    CHECK(std::abs(o.S - 4.0) < 1e-14);
    CHECK(std::abs(o.T - 3.0) < 1e-15);
    CHECK(std::abs(o.L - 2.0 * std::sqrt(2.0)) < 1e-14);
    CHECK(o.maslov == 4);
  }
  {
    const auto o = closed_orbit_invariants(GeometrySpec::sphere(0.5), std::sqrt(2.0)).orbits.at(0);
    CHECK(std::abs(o.S - (-kPi + kPi * std::sqrt(2.0))) < 1e-14);
    CHECK_FALSE(o.maslov.has_value());
  }
  {
    // c = 1/2
    const auto o = closed_orbit_invariants(GeometrySpec::hyperbolic(1.0, 2), std::sqrt(1.25)).orbits.at(0);
    CHECK(std::abs(o.S - 2.0 * kPi * (1.0 - std::sqrt(3.0) / 2.0)) < 1e-14);
    CHECK(std::abs(o.L - 2.0 * kPi / std::sqrt(3.0)) < 1e-14);
    CHECK_FALSE(o.maslov.has_value());
  }
  {
    const auto r = closed_orbit_invariants(GeometrySpec::hyperbolic(1.0, 2), std::sqrt(2.0));
    CHECK_FALSE(r.closed);
    CHECK(r.orbits.empty());
  }
  {
    const double eps = 0.3;
    const auto r = closed_orbit_invariants(GeometrySpec::katok(eps), std::sqrt(2.0));
    REQUIRE(r.orbits.size() == 2);
    CHECK(std::abs(r.orbits[0].L - 2.0 * kPi / (1.0 - eps * eps)) < 1e-14);
    CHECK(std::abs(wrap(r.orbits[0].S - 2.0 * kPi / (1.0 - eps))) < 1e-13);
    CHECK(std::abs(wrap(r.orbits[1].S - 2.0 * kPi / (1.0 + eps))) < 1e-13);
    CHECK(r.orbits[0].maslov == 7);
    CHECK(r.orbits[1].maslov == 5);
  }
}

TEST_CASE("property: L = (c/E) T for every geometry") {
  for (const auto& g : all_geometries()) {
    for (double E : {1.1, 1.3, std::sqrt(2.0) - 1e-3}) {
      for (const auto& o : closed_orbit_invariants(g, E).orbits) {
        CHECK(std::abs(o.L - std::sqrt(E * E - 1.0) / E * o.T) < 1e-13 * o.L);
      }
    }
  }
}

TEST_CASE("holonomy examples") {
  {
    const double eps = 0.3, E = std::sqrt(2.0);
    const auto geo = GeometrySpec::katok(eps);
    const auto o = closed_orbit_invariants(geo, E).orbits.at(0);
    const auto h = orbit_holonomy(geo, o.start, E, o.T, 1e-10, 1e-12);
    CHECK(std::abs(h.value - 2.0 * kPi * eps / (1.0 - eps * eps)) < 1e-6);
    CHECK(std::abs(h.value - 2.0712) < 2e-4);
  }
  {
    const auto geo = GeometrySpec::torus();
    const auto o = closed_orbit_invariants(geo, 2.0).orbits.at(0);
    const auto h = orbit_holonomy(geo, o.start, 2.0, o.T, 1e-10, 1e-12);
    CHECK(std::abs(h.value + 1.5) < 1e-6);
  }
  const std::vector<PathSample> still{{0.0, state(0.5, 0.5, 0.0, 0.0)}, {0.0, state(0.5, 0.5, 0.0, 0.0)}};
  CHECK(numeric_holonomy(GeometrySpec::torus(), still, 1.0) == 0.0);
  const auto open = integrate_path(GeometrySpec::torus(), state(0.0, 0.0, std::sqrt(3.0), 0.0), 2.0, 0.5, 8, 1e-11);
  CHECK_THROWS_AS(numeric_holonomy(GeometrySpec::torus(), open, 2.0), Error);
}

TEST_CASE("property: action identity with the numeric holonomy, all geometries") {
  struct Case {
    GeometrySpec g;
    double E;
  };
  for (const auto& [g, E] : {Case{GeometrySpec::torus(), 2.0}, Case{GeometrySpec::sphere(0.5), std::sqrt(2.0)},
                             Case{GeometrySpec::hyperbolic(1.0, 2), 1.2}, Case{GeometrySpec::katok(kEps5), std::sqrt(2.0)}}) {
    const double c = std::sqrt(E * E - 1.0);
    for (const auto& o : closed_orbit_invariants(g, E).orbits) {
      const auto h = orbit_holonomy(g, o.start, E, o.T, 1e-11, 1e-12);
      CHECK(std::abs(h.value - o.hol) < 1e-6);
      CHECK(std::abs(wrap(o.S - (o.L * c + h.value))) < 1e-8);
    }
  }
}

TEST_CASE("Katok analytic Poincare map") {
  const double eps = 0.3, E = std::sqrt(2.0);
  const auto p = katok_poincare_analytic(eps, E, Orientation::plus);
  CHECK(std::abs(p.a - 1.3) < 1e-15);
  CHECK(std::abs(p.alpha - 2.0 * kPi / 0.7) < 1e-14);
  CHECK(std::abs(p.detIminusP - 4.0 * std::pow(std::sin(kPi / 0.7), 2)) < 1e-14);
  CHECK(std::abs(p.P.det() - 1.0) < 1e-14);
  const auto m = katok_poincare_analytic(eps, E, Orientation::minus);
  CHECK(std::abs(m.alpha - 2.0 * kPi / 1.3) < 1e-14);
  CHECK(std::abs(katok_poincare_analytic(0.5, E, Orientation::plus).detIminusP) < 1e-12);
}

TEST_CASE("Katok numeric monodromy matches the analytic map") {
  for (double eps : {kEps5, 0.3, 1e-4}) {
    for (Orientation o : {Orientation::plus, Orientation::minus}) {
      const auto an = katok_poincare_analytic(eps, std::sqrt(2.0), o).P;
      const auto nu = katok_monodromy_numeric(eps, std::sqrt(2.0), o, 1e-12);
      CHECK(std::abs(nu.a - an.a) < 1e-6);
      CHECK(std::abs(nu.b - an.b) < 1e-6);
      CHECK(std::abs(nu.c - an.c) < 1e-6);
      CHECK(std::abs(nu.d - an.d) < 1e-6);
      CHECK(std::abs(nu.det() - 1.0) < 1e-9);
    }
  }
  const auto lim = katok_poincare_analytic(1e-4, std::sqrt(2.0), Orientation::plus);
  CHECK(std::abs(lim.alpha - 2.0 * kPi) < 1e-3);
  CHECK(std::abs(lim.a - 1.0) < 1e-3);
}

TEST_CASE("matrix helpers") {
  const Mat2 m{2.0, 1.0, 1.0, 1.0};
  const Mat2 id = m * inverse(m);
  CHECK(std::abs(id.a - 1.0) < 1e-15);
  CHECK(std::abs(id.b) < 1e-15);
  const Mat2 m3 = mat_pow(m, 3), mi = mat_pow(m, -1);
  CHECK(m3.a == 13.0);
  CHECK(m3.d == 5.0);
  CHECK(std::abs(mi.a - 1.0) < 1e-15);
  CHECK(det_I_minus(Mat2{}) == 0.0);
}

TEST_CASE("Maslov identity away from resonance") {
  for (double eps : {0.1, 0.3, kEps5, 0.61, 0.77}) {
    for (int k : {1, -1, 2, -2, 3, -3, 5, -6}) {
      for (Orientation o : {Orientation::plus, Orientation::minus}) {
        const auto m = maslov_katok(k, eps, o);
        CHECK(m.m == m.sgnR + 2 * m.kappa);
        CHECK(m.m == m.closed_form);
      }
    }
  }
  CHECK_THROWS_AS(maslov_katok(1, 0.2, Orientation::plus), Error);  // 2/0.8 = 2.5
}

TEST_CASE("Liouville volumes") {
  CHECK(std::abs(liouville_volume(GeometrySpec::torus(), 2.0) - 4.0 * kPi) < 1e-14);
  CHECK(std::abs(liouville_volume(GeometrySpec::sphere(0.5), std::sqrt(2.0)) - 2.0 * kPi * kPi * std::sqrt(2.0)) < 1e-13);
  CHECK(std::abs(liouville_volume(GeometrySpec::katok(0.3), std::sqrt(2.0)) / (2.0 * kPi * std::sqrt(2.0)) -
                 13.80919847731777) < 1e-12);
  for (const auto& g : all_geometries()) {
    const double E = 1.3;
    const auto mc = liouville_volume_mc(g, E, 200000, 0);
    const double exact = liouville_volume(g, E);
    CHECK(std::abs(mc.estimate - exact) < 4.0 * mc.std_error + 0.02 * exact);
    const auto again = liouville_volume_mc(g, E, 200000, 0);
    CHECK(again.estimate == mc.estimate);
  }
}

TEST_CASE("sphere orbit through the polar cap switches charts and closes") {
  const double R = 1.0, E = std::sqrt(1.25), c = 0.5;
  const auto geo = GeometrySpec::sphere(R);
  const auto s0 = state(0.3, 0.0, -c * R, 0.0);
  const double T = closed_orbit_invariants(geo, E).orbits.at(0).T;
  const auto r = integrate(geo, s0, E, T, 1e-12);
  CHECK(r.chart_switches >= 1);
  CHECK(r.energy_drift < 1e-9);
  CHECK(closure_gap(geo, s0, r.state) < 1e-8);
}
