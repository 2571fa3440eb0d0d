#include "magtrace/testfn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "magtrace/error.hpp"
#include "magtrace/quadrature.hpp"

namespace magtrace {

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt2Pi = std::sqrt(2.0 * kPi);

constexpr int kMaxJet = 8;

double gauss_tail(double s, double r, double A, double B, double C) {
  r = std::max(r, 0.0);
  const double e = std::exp(-r * r / (2.0 * s * s));
  const double i0 = e;
  const double i1 = r * e + s * std::sqrt(kPi / 2.0) * std::erfc(r / (s * std::sqrt(2.0)));
  const double i2 = (r * r + 2.0 * s * s) * e;
  return A * i0 + B * i1 + C * i2;
}

double bump_const(int m, double w) { return bump::abs_integral(m) * std::pow(w, 1.0 - m) / (2.0 * kPi); }

double bump_envelope(double w, double x) {
  double best = bump_const(0, w);
  if (x <= 0.0) return best;
  for (int m = 1; m <= kMaxJet; ++m) best = std::min(best, bump_const(m, w) / std::pow(x, m));
  return best;
}

double bump_tail(double w, double r, double A, double B, double C) {
  int min_m = 1;
  if (B > 0.0) min_m = 2;
  if (C > 0.0) min_m = 3;
  if (r <= 0.0) return INFINITY;
  double best = INFINITY;
  for (int m = min_m; m <= kMaxJet; ++m) {
    const double cm = bump_const(m, w);
    double v = cm * A / std::pow(r, m);
    if (B > 0.0) v += m * cm * B / ((m - 1.0) * std::pow(r, m - 1));
    if (C > 0.0) v += m * cm * C / ((m - 2.0) * std::pow(r, m - 2));
    best = std::min(best, v);
  }
  return best;
}

cplx bump_inverse(const FnTerm& t, double x) {
  // phi(x) = (w/2pi) e^{i tau0 x} 2 int_0^1 g(u) cos(w u x) du
  const double wx = t.w * x;
  const auto panels = static_cast<std::size_t>(std::max(64.0, std::ceil(std::abs(wx) / 2.0)));
  const double integral = quad::composite_gauss(
      [wx](double u) {
        double g;
        bump::jet(u, &g, 0);
        return g * std::cos(wx * u);
      },
      0.0, 1.0, panels);
  return std::polar(t.w / kPi * integral, t.tau0 * x);
}

}  // namespace

const char* to_string(FnKind kind) {
  switch (kind) {
    case FnKind::gaussian: return "gaussian";
    case FnKind::gaussian_modulated: return "gaussian_modulated";
    case FnKind::fourier_bump: return "fourier_bump";
  }
  return "unknown";
}

namespace bump {

void jet(double t, double* out, int max_order) {
  for (int m = 0; m <= max_order; ++m) out[m] = 0.0;
  if (!(std::abs(t) < 1.0)) return;
  // Taylor coefficients of v = 1 - (t+h)^2, r = 1/v, u = -r, g = exp(u).
  const double v0 = 1.0 - t * t, v1 = -2.0 * t, v2 = -1.0;
  const double u0 = -1.0 / v0;
  if (u0 < -700.0) return;
  std::array<double, kMaxJet + 1> r{}, u{}, e{};
  r[0] = 1.0 / v0;
  for (int n = 1; n <= max_order; ++n) {
    double acc = v1 * r[n - 1];
    if (n >= 2) acc += v2 * r[n - 2];
    r[n] = -acc / v0;
  }
  for (int n = 0; n <= max_order; ++n) u[n] = -r[n];
  e[0] = std::exp(u0);
  for (int n = 1; n <= max_order; ++n) {
    double acc = 0.0;
    for (int k = 1; k <= n; ++k) acc += k * u[k] * e[n - k];
    e[n] = acc / n;
  }
  double fact = 1.0;
  for (int m = 0; m <= max_order; ++m) {
    if (m > 0) fact *= m;
    out[m] = fact * e[m];
  }
}

namespace {
struct BumpTables {
  std::array<double, kMaxJet + 1> abs_int{};
  std::array<double, 3> sup{};
  BumpTables() {
    for (int m = 0; m <= kMaxJet; ++m) {
      const double half = quad::composite_gauss(
          [m](double t) {
            std::array<double, kMaxJet + 1> j{};
            jet(t, j.data(), m);
            return std::abs(j[m]);
          },
          0.0, 1.0, 4000);
      // Kinks of |g^(m)| limit the rule to algebraic accuracy; pad the bound.
      abs_int[m] = 2.0 * half * 1.001;
    }
    const int samples = 200000;
    for (int i = 0; i <= samples; ++i) {
      const double t = static_cast<double>(i) / samples;
      std::array<double, kMaxJet + 1> j{};
      jet(t, j.data(), 2);
      for (int m = 0; m < 3; ++m) sup[m] = std::max(sup[m], std::abs(j[m]));
    }
    for (auto& v : sup) v *= 1.01;
  }
};

const BumpTables& tables() {
  static const BumpTables t;
  return t;
}
}  // namespace

double abs_integral(int m) { return tables().abs_int.at(m); }
double sup_abs(int m) { return tables().sup.at(m); }

}  // namespace bump

TestFunction::TestFunction(std::vector<FnTerm> terms) : terms_(std::move(terms)) {
  for (const auto& t : terms_) {
    require(std::isfinite(t.coef.real()) && std::isfinite(t.coef.imag()), "test function coefficient must be finite");
    switch (t.kind) {
      case FnKind::gaussian:
      case FnKind::gaussian_modulated:
        require(std::isfinite(t.s) && t.s > 0.0, "gaussian width s must be positive");
        require(std::isfinite(t.b), "modulation frequency b must be finite");
        break;
      case FnKind::fourier_bump:
        require(std::isfinite(t.w) && t.w > 0.0, "bump half-width w must be positive");
        require(std::isfinite(t.tau0), "bump center tau0 must be finite");
        break;
    }
  }
}

TestFunction make_gaussian(double s) { return TestFunction({FnTerm{FnKind::gaussian, s, 0.0, 0.0, 1.0, 1.0}}); }

TestFunction make_gaussian_modulated(double s, double b) {
  return TestFunction({FnTerm{FnKind::gaussian_modulated, s, b, 0.0, 1.0, 1.0}});
}

TestFunction make_fourier_bump(double tau0, double w) {
  return TestFunction({FnTerm{FnKind::fourier_bump, 1.0, 0.0, tau0, w, 1.0}});
}

cplx TestFunction::operator()(double x) const {
  cplx total = 0.0;
  for (const auto& t : terms_) {
    cplx v;
    switch (t.kind) {
      case FnKind::gaussian: v = std::exp(-x * x / (2.0 * t.s * t.s)); break;
      case FnKind::gaussian_modulated: v = std::polar(std::exp(-x * x / (2.0 * t.s * t.s)), t.b * x); break;
      case FnKind::fourier_bump: v = bump_inverse(t, x); break;
    }
    total += t.coef * v;
  }
  return total;
}

cplx TestFunction::hat(double xi) const { return hat_derivative(xi, 0); }

cplx TestFunction::hat_derivative(double xi, int order) const {
  require(order >= 0 && order <= 2, "hat_derivative order must be 0, 1 or 2");
  cplx total = 0.0;
  for (const auto& t : terms_) {
    double v = 0.0;
    if (t.kind == FnKind::fourier_bump) {
      std::array<double, 3> j{};
      bump::jet((xi - t.tau0) / t.w, j.data(), order);
      v = j[order] / std::pow(t.w, order);
    } else {
      const double b = t.kind == FnKind::gaussian ? 0.0 : t.b;
      const double u = xi - b;
      const double s2 = t.s * t.s;
      const double g = t.s * kSqrt2Pi * std::exp(-s2 * u * u / 2.0);
      if (order == 0) v = g;
      if (order == 1) v = -s2 * u * g;
      if (order == 2) v = (s2 * s2 * u * u - s2) * g;
    }
    total += t.coef * v;
  }
  return total;
}

double TestFunction::envelope(double x) const {
  x = std::abs(x);
  double total = 0.0;
  for (const auto& t : terms_) {
    const double e = t.kind == FnKind::fourier_bump ? bump_envelope(t.w, x) : std::exp(-x * x / (2.0 * t.s * t.s));
    total += std::abs(t.coef) * e;
  }
  return total;
}

double TestFunction::radius(double tol) const {
  require(tol > 0.0, "radius tolerance must be positive");
  if (terms_.size() == 1 && terms_[0].kind != FnKind::fourier_bump) {
    const double a = std::abs(terms_[0].coef);
    if (a <= tol) return 0.0;
    double r = terms_[0].s * std::sqrt(2.0 * std::log(a / tol));
    while (envelope(r) > tol) r = std::nextafter(r, INFINITY);
    return r;
  }
  if (envelope(0.0) <= tol) return 0.0;
  double hi = 1.0;
  while (envelope(hi) > tol) {
    hi *= 2.0;
    if (hi > 1e300) fail(ErrorKind::quadrature, "effective radius search diverged");
  }
  double lo = 0.0;
  for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (envelope(mid) > tol ? lo : hi) = mid;
  }
  return hi;
}

double TestFunction::tail_integral(double r, double A, double B, double C) const {
  double total = 0.0;
  for (const auto& t : terms_) {
    const double v = t.kind == FnKind::fourier_bump ? bump_tail(t.w, r, A, B, C) : gauss_tail(t.s, r, A, B, C);
    total += std::abs(t.coef) * v;
  }
  return total;
}

double TestFunction::hat_envelope(double x, int order) const {
  x = std::abs(x);
  double total = 0.0;
  for (const auto& t : terms_) {
    double v;
    if (t.kind == FnKind::fourier_bump) {
      v = x >= std::abs(t.tau0) + t.w ? 0.0 : bump::sup_abs(order) / std::pow(t.w, order);
    } else {
      const double b = t.kind == FnKind::gaussian ? 0.0 : std::abs(t.b);
      const double s = t.s, s2 = s * s;
      const double pre = s * kSqrt2Pi;
      const double u = x - b;
      if (order == 0) {
        v = u > 0.0 ? pre * std::exp(-s2 * u * u / 2.0) : pre;
      } else if (order == 1) {
        v = u >= 1.0 / s ? pre * s2 * u * std::exp(-s2 * u * u / 2.0) : pre * s * std::exp(-0.5);
      } else {
        v = u >= 1.0 / s ? pre * (s2 * s2 * u * u + s2) * std::exp(-s2 * u * u / 2.0)
                         : pre * 2.0 * s2 * std::exp(-0.5);
      }
    }
    total += std::abs(t.coef) * v;
  }
  return total;
}

bool TestFunction::is_real() const {
  for (const auto& t : terms_) {
    if (t.coef.imag() != 0.0) return false;
    if (t.kind == FnKind::gaussian_modulated && t.b != 0.0) return false;
    if (t.kind == FnKind::fourier_bump && t.tau0 != 0.0) return false;
  }
  return true;
}

std::optional<std::pair<double, double>> TestFunction::hat_support() const {
  std::optional<std::pair<double, double>> hull;
  for (const auto& t : terms_) {
    if (t.coef == cplx(0.0)) continue;
    if (t.kind != FnKind::fourier_bump) return std::nullopt;
    const std::pair<double, double> iv{t.tau0 - t.w, t.tau0 + t.w};
    hull = hull ? std::pair{std::min(hull->first, iv.first), std::max(hull->second, iv.second)} : iv;
  }
  if (!hull) return std::pair{0.0, 0.0};
  return hull;
}

bool TestFunction::hat_may_be_nonzero_in(double lo, double hi) const {
  for (const auto& t : terms_) {
    if (t.coef == cplx(0.0)) continue;
    if (t.kind != FnKind::fourier_bump) return true;
    const double a = t.tau0 - t.w, b = t.tau0 + t.w;
    if (lo == hi ? (a < lo && lo < b) : std::max(lo, a) < std::min(hi, b)) return true;
  }
  return false;
}

std::string TestFunction::describe() const {
  std::string out;
  char buf[160];
  for (const auto& t : terms_) {
    if (!out.empty()) out += " + ";
    switch (t.kind) {
      case FnKind::gaussian: std::snprintf(buf, sizeof buf, "gaussian(s=%.17g)", t.s); break;
      case FnKind::gaussian_modulated:
        std::snprintf(buf, sizeof buf, "gaussian_modulated(s=%.17g,b=%.17g)", t.s, t.b);
        break;
      case FnKind::fourier_bump: std::snprintf(buf, sizeof buf, "fourier_bump(tau0=%.17g,w=%.17g)", t.tau0, t.w); break;
    }
    if (t.coef != cplx(1.0)) {
      char c[96];
      std::snprintf(c, sizeof c, "(%.17g%+.17gi)*", t.coef.real(), t.coef.imag());
      out += c;
    }
    out += buf;
  }
  return out.empty() ? "zero" : out;
}

TestFunction TestFunction::operator*(cplx a) const {
  auto terms = terms_;
  for (auto& t : terms) t.coef *= a;
  return TestFunction(std::move(terms));
}

TestFunction TestFunction::operator+(const TestFunction& other) const {
  auto terms = terms_;
  terms.insert(terms.end(), other.terms_.begin(), other.terms_.end());
  return TestFunction(std::move(terms));
}

PairReport validate_pair(const TestFunction& f, const std::vector<double>& grid, double tol,
                         const std::function<cplx(double)>* hat_override) {
  require(!grid.empty(), "validate_pair grid must be nonempty");
  require(tol > 0.0, "validate_pair tolerance must be positive");
  PairReport rep;
  rep.grid = grid;

  double r = std::max(f.radius(tol * 1e-2), 1.0);
  for (int i = 0; 2.0 * f.tail_integral(r, 0.0, 1.0, 0.0) > tol / 10.0; ++i) {
    if (i > 200) fail(ErrorKind::quadrature, "validate_pair: truncation radius search failed");
    r *= 1.25;
  }
  rep.truncation_radius = r;

  double band = 0.0;
  for (const auto& t : f.terms()) {
    band = std::max(band, t.kind == FnKind::fourier_bump ? std::abs(t.tau0) + t.w : std::abs(t.b) + 1.0 / t.s);
  }

  for (double xi : grid) {
    auto integrand = [&](double x) { return f(x) * std::polar(1.0, -xi * x); };
    auto panels = static_cast<std::size_t>(std::max(16.0, std::ceil(r * (std::abs(xi) + band + 1.0) / 2.0)));
    cplx prev = quad::composite_gauss(integrand, -r, r, panels);
    cplx cur;
    bool converged = false;
    for (int level = 0; level < 8; ++level) {
      panels *= 2;
      cur = quad::composite_gauss(integrand, -r, r, panels);
      if (std::abs(cur - prev) <= tol / 10.0) {
        converged = true;
        break;
      }
      prev = cur;
    }
    if (!converged) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "validate_pair: quadrature did not converge at xi=%.17g", xi);
      fail(ErrorKind::quadrature, buf);
    }
    const cplx expected = hat_override ? (*hat_override)(xi) : f.hat(xi);
    const double dev = std::abs(cur - expected);
    rep.deviation.push_back(dev);
    rep.max_deviation = std::max(rep.max_deviation, dev);
  }
  rep.pass = rep.max_deviation < tol;
  return rep;
}

}  // namespace magtrace
