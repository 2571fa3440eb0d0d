#pragma once

#include <array>
#include <cmath>

#include "magtrace/dynamics.hpp"

namespace magtrace::detail {

/// Forward-mode dual number with a fixed-size gradient.
template <int D>
struct Dual {
  double v = 0.0;
  std::array<double, D> d{};

  Dual() = default;
  Dual(double x) : v(x) {}  // NOLINT: implicit lift of constants

  static Dual variable(double x, int i) {
    Dual r(x);
    r.d[i] = 1.0;
    return r;
  }
};

template <int D>
Dual<D> operator+(const Dual<D>& a, const Dual<D>& b) {
  Dual<D> r(a.v + b.v);
  for (int i = 0; i < D; ++i) r.d[i] = a.d[i] + b.d[i];
  return r;
}
template <int D>
Dual<D> operator-(const Dual<D>& a, const Dual<D>& b) {
  Dual<D> r(a.v - b.v);
  for (int i = 0; i < D; ++i) r.d[i] = a.d[i] - b.d[i];
  return r;
}
template <int D>
Dual<D> operator-(const Dual<D>& a) {
  Dual<D> r(-a.v);
  for (int i = 0; i < D; ++i) r.d[i] = -a.d[i];
  return r;
}
template <int D>
Dual<D> operator*(const Dual<D>& a, const Dual<D>& b) {
  Dual<D> r(a.v * b.v);
  for (int i = 0; i < D; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
  return r;
}
template <int D>
Dual<D> operator/(const Dual<D>& a, const Dual<D>& b) {
  Dual<D> r(a.v / b.v);
  for (int i = 0; i < D; ++i) r.d[i] = (a.d[i] * b.v - a.v * b.d[i]) / (b.v * b.v);
  return r;
}
template <int D>
Dual<D> operator+(const Dual<D>& a, double b) { return a + Dual<D>(b); }
template <int D>
Dual<D> operator+(double a, const Dual<D>& b) { return Dual<D>(a) + b; }
template <int D>
Dual<D> operator-(const Dual<D>& a, double b) { return a - Dual<D>(b); }
template <int D>
Dual<D> operator-(double a, const Dual<D>& b) { return Dual<D>(a) - b; }
template <int D>
Dual<D> operator*(const Dual<D>& a, double b) { return a * Dual<D>(b); }
template <int D>
Dual<D> operator*(double a, const Dual<D>& b) { return Dual<D>(a) * b; }
template <int D>
Dual<D> operator/(const Dual<D>& a, double b) { return a / Dual<D>(b); }
template <int D>
Dual<D> operator/(double a, const Dual<D>& b) { return Dual<D>(a) / b; }

template <int D>
Dual<D> sin(const Dual<D>& a) {
  Dual<D> r(std::sin(a.v));
  const double c = std::cos(a.v);
  for (int i = 0; i < D; ++i) r.d[i] = c * a.d[i];
  return r;
}
template <int D>
Dual<D> cos(const Dual<D>& a) {
  Dual<D> r(std::cos(a.v));
  const double s = -std::sin(a.v);
  for (int i = 0; i < D; ++i) r.d[i] = s * a.d[i];
  return r;
}
template <int D>
Dual<D> sqrt(const Dual<D>& a) {
  Dual<D> r(std::sqrt(a.v));
  for (int i = 0; i < D; ++i) r.d[i] = a.d[i] / (2.0 * r.v);
  return r;
}

/// Diagonal inverse metric g^11, g^22, their partials and the field f.
template <class T>
struct LocalGeometry {
  T g1, g2;
  T d1g1, d1g2, d2g1, d2g2;
  T f;
};

template <class T>
LocalGeometry<T> local_geometry(const GeometrySpec& geo, const T& q1, const T& q2) {
  using std::cos;
  using std::sin;
  LocalGeometry<T> lg{T(1.0), T(1.0), T(0.0), T(0.0), T(0.0), T(0.0), T(0.0)};
  switch (geo.kind) {
    case GeometryKind::torus:
      lg.f = T(geo.B);
      break;
    case GeometryKind::sphere: {
      const double R2 = geo.R * geo.R;
      const T s = sin(q1), c = cos(q1);
      lg.g1 = T(1.0 / R2);
      lg.g2 = 1.0 / (R2 * s * s);
      lg.d1g2 = -2.0 * c / (R2 * s * s * s);
      lg.f = geo.B * s;
      break;
    }
    case GeometryKind::hyperbolic: {
      const double R2 = geo.R * geo.R;
      lg.g1 = q2 * q2 / R2;
      lg.g2 = lg.g1;
      lg.d2g1 = 2.0 * q2 / R2;
      lg.d2g2 = lg.d2g1;
      lg.f = geo.B / (q2 * q2);
      break;
    }
    case GeometryKind::katok: {
      const double e2 = geo.eps * geo.eps;
      const T s = sin(q1), c = cos(q1);
      const T w = 1.0 - e2 * s * s;
      const T dw = -2.0 * e2 * s * c;
      lg.g1 = w;
      lg.g2 = w * w / (s * s);
      lg.d1g1 = dw;
      lg.d1g2 = (2.0 * w * dw * s * s - w * w * 2.0 * s * c) / (s * s * s * s);
      lg.f = 2.0 * geo.eps * s * c / (w * w);
      break;
    }
  }
  return lg;
}

/// x = (q1, q2, p1, p2) -> dx, along the true Hamiltonian flow of H.
template <class T>
void flow(const GeometrySpec& geo, const T* x, T* dx) {
  using std::sqrt;
  const auto lg = local_geometry(geo, x[0], x[1]);
  const T p1 = x[2], p2 = x[3];
  const T H = sqrt(lg.g1 * p1 * p1 + lg.g2 * p2 * p2 + 1.0);
  const T v1 = lg.g1 * p1 / H;
  const T v2 = lg.g2 * p2 / H;
  dx[0] = v1;
  dx[1] = v2;
  dx[2] = -(lg.d1g1 * p1 * p1 + lg.d1g2 * p2 * p2) / (2.0 * H) + lg.f * v2;
  dx[3] = -(lg.d2g1 * p1 * p1 + lg.d2g2 * p2 * p2) / (2.0 * H) - lg.f * v1;
}

/// Chart-domain test used by the integrator.
bool in_chart(const GeometrySpec& geo, const PhaseState& s);

struct Ambient {
  std::array<double, 3> x{};
  std::array<double, 3> v{};
};

/// Embedded position and velocity of a sphere state.
Ambient sphere_ambient(const GeometrySpec& geo, const PhaseState& s);
/// Re-expresses a sphere state in the given chart.
PhaseState sphere_to_chart(const GeometrySpec& geo, const PhaseState& s, int chart);

}  // namespace magtrace::detail
