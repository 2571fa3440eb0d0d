#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace magtrace {

enum class GeometryKind { torus, sphere, hyperbolic, katok };

const char* to_string(GeometryKind kind);

/// Surface, metric and magnetic 2-form F = f(q) dq1 ^ dq2.
///   torus       flat unit square cover, f = 2 pi
///   sphere      R^2 (dtheta^2 + sin^2 dphi^2), f = B sin(theta), B = 1/2
///   hyperbolic  R^2 (dx^2 + dy^2)/y^2, f = B/y^2, B = 1
///   katok       Katok metric in (theta, phi), F = d(eps sin^2/(1 - eps^2 sin^2) dphi)
struct GeometrySpec {
  GeometryKind kind = GeometryKind::torus;
  double R = 1.0;
  int genus = 2;
  double eps = 0.0;
  double B = 0.0;

  static GeometrySpec torus();
  static GeometrySpec sphere(double R);
  static GeometrySpec hyperbolic(double R, int genus);
  static GeometrySpec katok(double eps);
};

/// Chart coordinates and kinetic momenta. Sphere chart 1 is the spherical
/// chart of the cyclically permuted axes (y, z, x).
struct PhaseState {
  std::array<double, 2> q{};
  std::array<double, 2> p{};
  int chart = 0;
};

double hamiltonian(const GeometrySpec& geo, const PhaseState& s);

struct Tangent {
  std::array<double, 2> qdot{};
  std::array<double, 2> pdot{};
};

/// Right-hand side of the flow on the level H = E; rejects off-shell states.
Tangent flow_rhs(const GeometrySpec& geo, const PhaseState& s, double E);

/// Katok first integral P = p_phi + eps sin^2/(1 - eps^2 sin^2).
double katok_first_integral(double eps, const PhaseState& s);

struct IntegrationResult {
  PhaseState state;
  double energy_drift = 0.0;
  double integral_drift = 0.0;
  std::size_t steps = 0;
  int chart_switches = 0;
};

/// Adaptive Runge-Kutta-Fehlberg 7(8) integration to time t with local
/// tolerance tol. Drift above 100 tol or step collapse raise integrator errors.
IntegrationResult integrate(const GeometrySpec& geo, const PhaseState& s0, double E, double t, double tol);

struct PathSample {
  double t = 0.0;
  PhaseState s;
};

/// Samples at t_i = i T / n, i = 0..n.
std::vector<PathSample> integrate_path(const GeometrySpec& geo, const PhaseState& s0, double E, double T,
                                       std::size_t n, double tol);

/// Distance between two states' base points (ambient for the sphere, phi mod
/// 2 pi for Katok).
double closure_gap(const GeometrySpec& geo, const PhaseState& a, const PhaseState& b);

/// Line integral of the geometry's connection form along a closed sampled
/// path (trapezoid rule, spectrally accurate for a full period).
double numeric_holonomy(const GeometrySpec& geo, const std::vector<PathSample>& path, double E);

struct HolonomyResult {
  double value = 0.0;
  double change = 0.0;  // difference to the previous refinement
  std::size_t samples = 0;
};

/// Refines the sample count until two levels agree to qtol.
HolonomyResult orbit_holonomy(const GeometrySpec& geo, const PhaseState& s0, double E, double T, double qtol,
                              double ode_tol);

struct OrbitInvariants {
  std::string geometry;
  double L = 0.0;
  double T = 0.0;
  double Tsharp = 0.0;
  double S = 0.0;
  double hol = 0.0;
  std::optional<int> maslov;
  double detIminusP = 0.0;
  int orientation = 1;  // +1 / -1
  std::string orientation_label;
  PhaseState start;
};

struct ClosedOrbits {
  bool closed = true;
  std::string note;
  std::vector<OrbitInvariants> orbits;
};

ClosedOrbits closed_orbit_invariants(const GeometrySpec& geo, double E);

struct Mat2 {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;
  double det() const { return a * d - b * c; }
  Mat2 operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
};

Mat2 mat_pow(const Mat2& m, int k);
Mat2 inverse(const Mat2& m);
/// det(I - M).
double det_I_minus(const Mat2& m);

enum class Orientation { plus, minus };

inline int sign_of(Orientation o) { return o == Orientation::plus ? 1 : -1; }

struct KatokPoincare {
  Mat2 P;
  double a = 0.0;
  double alpha = 0.0;
  double detIminusP = 0.0;
};

KatokPoincare katok_poincare_analytic(double eps, double E, Orientation o);

/// Transverse block (theta, p_theta) of the linearized flow over one period
/// of the equatorial orbit.
Mat2 katok_monodromy_numeric(double eps, double E, Orientation o, double tol);

/// Starting state on the + / - equatorial orbit (theta = pi/2, phi = 0).
PhaseState katok_equator_state(double eps, double E, Orientation o);

struct MaslovResult {
  int m = 0;
  int kappa = 0;
  int sgnR = 0;
  int closed_form = 0;
  double rotation = 0.0;  // (a/E) k T
};

MaslovResult maslov_katok(int k, double eps, Orientation o, double margin = 1e-6);

double liouville_volume(const GeometrySpec& geo, double E);

struct VolumeEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Monte Carlo estimate of the Liouville volume of H = E from the shell
/// E - delta < H < E + delta. Deterministic for a given seed.
VolumeEstimate liouville_volume_mc(const GeometrySpec& geo, double E, std::size_t samples, std::uint64_t seed);

}  // namespace magtrace
