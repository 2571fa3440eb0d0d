#include "magtrace/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "magtrace/error.hpp"
#include "magtrace/kernels.hpp"

namespace magtrace {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_N(int N) { require(N >= 1, "N must be a positive integer"); }

// Runs the eigenvalue kernel over j in [j0, j1] and keeps |lambda - EN| <= r.
template <class NuFn, class MultFn>
void fill_window(Window& win, int N, std::int64_t j0, std::int64_t j1, double en, NuFn&& nu_of, MultFn&& mult_of) {
  if (j1 < j0) return;
  const auto n = static_cast<std::size_t>(j1 - j0 + 1);
  std::vector<double> nu(n), lam(n), shift(n);
  for (std::size_t i = 0; i < n; ++i) nu[i] = nu_of(j0 + static_cast<std::int64_t>(i));
  const double n2 = static_cast<double>(N) * N;
  kernels::shifted_sqrt(nu.data(), n, n2, en, lam.data(), shift.data());
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(shift[i]) > win.radius) continue;
    const std::int64_t j = j0 + static_cast<std::int64_t>(i);
    win.entries.push_back(SpectrumEntry{N, j, nu[i], lam[i], mult_of(j)});
    win.shift.push_back(shift[i]);
  }
}

std::int64_t clamp_index(double v) {
  if (!(v > 0.0)) return 0;
  if (v > 4e15) fail(ErrorKind::validation, "spectral window too large");
  return static_cast<std::int64_t>(std::floor(v));
}

}  // namespace

EnergyLevel EnergyLevel::from_E(double E) {
  require(std::isfinite(E) && E > 1.0, "energy parameter E must satisfy E > 1");
  EnergyLevel lv;
  lv.E = E;
  lv.c2 = E * E - 1.0;
  lv.c = std::sqrt(lv.c2);
  lv.calE = lv.c2 / 2.0;
  return lv;
}

SphereModel::SphereModel(double radius) : R(radius) {
  require(std::isfinite(radius) && radius > 0.0, "sphere radius R must be positive");
}

HyperbolicModel::HyperbolicModel(double radius, int g) : R(radius), genus(g) {
  require(std::isfinite(radius) && radius > 0.0, "hyperbolic scale R must be positive");
  require(g >= 2, "genus must be at least 2");
  maneE = std::sqrt(1.0 / (R * R) + 1.0);
}

std::string model_name(const Model& m) {
  if (std::holds_alternative<TorusModel>(m)) return "torus";
  if (std::holds_alternative<SphereModel>(m)) return "sphere";
  return "hyperbolic";
}

SpectrumEntry torus_levels(int N, std::int64_t j) {
  check_N(N);
  require(j >= 0, "j must be nonnegative");
  SpectrumEntry e;
  e.N = N;
  e.j = j;
  e.nu = kTwoPi * N * static_cast<double>(2 * j + 1);
  e.lambda = std::sqrt(e.nu + static_cast<double>(N) * N);
  e.mult = N;
  return e;
}

SpectrumEntry sphere_levels(const SphereModel& model, int N, std::int64_t j) {
  check_N(N);
  require(j >= 0, "j must be nonnegative");
  const double jd = static_cast<double>(j);
  SpectrumEntry e;
  e.N = N;
  e.j = j;
  e.nu = (jd * (jd + 1.0) + 0.5 * N * (2.0 * jd + 1.0)) / (model.R * model.R);
  e.lambda = std::sqrt(e.nu + static_cast<double>(N) * N);
  e.mult = N + 2 * j + 1;
  return e;
}

SpectrumEntry hyperbolic_levels(const HyperbolicModel& model, int N, std::int64_t j) {
  check_N(N);
  if (j < 0 || static_cast<double>(j) >= N - 0.5) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "hyperbolic level index j=%lld outside the integrable range 0 <= j < N - 1/2 = %.17g",
                  static_cast<long long>(j), N - 0.5);
    fail(ErrorKind::validation, buf);
  }
  const double d = static_cast<double>(j) + 0.5 - N;
  SpectrumEntry e;
  e.N = N;
  e.j = j;
  e.nu = (0.25 + static_cast<double>(N) * N - d * d) / (model.R * model.R);
  e.lambda = std::sqrt(e.nu + static_cast<double>(N) * N);
  e.mult = static_cast<std::int64_t>(model.genus - 1) * (2 * N - 2 * j - 1);
  return e;
}

double hyperbolic_nu_alt(const HyperbolicModel& model, int N, std::int64_t j) {
  const double jd = static_cast<double>(j);
  return ((2.0 * jd + 1.0) * N - jd * (jd + 1.0)) / (model.R * model.R);
}

void check_energy(const Model& model, const EnergyLevel& level) {
  if (const auto* h = std::get_if<HyperbolicModel>(&model)) {
    if (!(level.E < h->maneE)) {
      char buf[200];
      std::snprintf(buf, sizeof buf,
                    "energy E=%.17g is at or above the Mane level sqrt(1/R^2+1)=%.17g; the trace formula cannot be "
                    "extended analytically at this level and above it",
                    level.E, h->maneE);
      fail(ErrorKind::mane_level, buf);
    }
  }
}

Window enumerate_window(const Model& model, int N, const EnergyLevel& level, const TestFunction& phi,
                        double tail_tol) {
  check_N(N);
  require(tail_tol > 0.0, "tail tolerance must be positive");
  check_energy(model, level);

  Window win;
  win.radius = phi.radius(tail_tol);
  const double r = win.radius;
  const double Nd = N;
  const double en = level.E * Nd;
  const double lam_hi = en + r;
  const double lam_lo = std::max(en - r, 0.0);
  // Omitted levels sit at |lambda - EN| > r; a tail bound needs r > 0.
  const double r_tail = std::max(r, 1e-300);

  if (std::holds_alternative<TorusModel>(model)) {
    const double step = kTwoPi * Nd;
    const double nu_hi = lam_hi * lam_hi - Nd * Nd;
    if (nu_hi >= 0.0) {
      const std::int64_t j1 = clamp_index((nu_hi / step - 1.0) / 2.0) + 1;
      const std::int64_t j0 = std::max<std::int64_t>(0, clamp_index(((lam_lo * lam_lo - Nd * Nd) / step - 1.0) / 2.0) - 1);
      fill_window(
          win, N, j0, j1, en, [&](std::int64_t j) { return step * static_cast<double>(2 * j + 1); },
          [&](std::int64_t) { return static_cast<std::int64_t>(N); });
    }
    const double C = 1.0 / (4.0 * kPi);
    const double B = 2.0 * level.E * Nd / (4.0 * kPi);
    const double A = level.c2 * Nd * Nd / (4.0 * kPi) + Nd / 2.0;
    win.tail_bound = phi.tail_integral(r_tail, A, B, C);
    if (en - r > Nd) win.tail_bound += A * phi.envelope(r);
  } else if (const auto* sm = std::get_if<SphereModel>(&model)) {
    const double R2 = sm->R * sm->R;
    auto j_of = [&](double lam) {
      const double nu = lam * lam - Nd * Nd;
      const double b = Nd + 1.0;
      const double disc = b * b - 4.0 * (Nd / 2.0 - R2 * nu);
      if (disc < 0.0) return -1.0;
      return (-b + std::sqrt(disc)) / 2.0;
    };
    const double jh = j_of(lam_hi);
    if (jh >= -1.0) {
      const std::int64_t j1 = clamp_index(jh) + 2;
      const std::int64_t j0 = std::max<std::int64_t>(0, clamp_index(j_of(lam_lo)) - 2);
      fill_window(
          win, N, j0, j1, en,
          [&](std::int64_t j) {
            const double jd = static_cast<double>(j);
            return (jd * (jd + 1.0) + 0.5 * Nd * (2.0 * jd + 1.0)) / R2;
          },
          [&](std::int64_t j) { return N + 2 * j + 1; });
    }
    const double a = sm->R * en + 1.0;
    const double A = a * a + Nd * a;
    const double B = 2.0 * a * sm->R + Nd * sm->R;
    const double C = R2;
    win.tail_bound = phi.tail_integral(r_tail, A, B, C);
    if (en - r > Nd) win.tail_bound += A * phi.envelope(r);
  } else {
    const auto& hm = std::get<HyperbolicModel>(model);
    const double R2 = hm.R * hm.R;
    const std::int64_t jmax = N - 1;
    // Whole integrable range; omitted members are bounded term by term.
    std::vector<double> nu(static_cast<std::size_t>(N)), lam(nu.size()), shift(nu.size());
    for (std::int64_t j = 0; j <= jmax; ++j) {
      const double d = static_cast<double>(j) + 0.5 - Nd;
      nu[static_cast<std::size_t>(j)] = (0.25 + Nd * Nd - d * d) / R2;
    }
    kernels::shifted_sqrt(nu.data(), nu.size(), Nd * Nd, en, lam.data(), shift.data());
    double omitted = 0.0;
    for (std::int64_t j = 0; j <= jmax; ++j) {
      const auto i = static_cast<std::size_t>(j);
      const std::int64_t mult = static_cast<std::int64_t>(hm.genus - 1) * (2 * N - 2 * j - 1);
      if (std::abs(shift[i]) <= r) {
        win.entries.push_back(SpectrumEntry{N, j, nu[i], lam[i], mult});
        win.shift.push_back(shift[i]);
      } else {
        omitted += static_cast<double>(mult) * phi.envelope(shift[i]);
      }
    }
    // Remaining spectrum starts at nu = (N^2 + 1/4)/R^2; counted with a
    // Weyl-type majorant.
    const double g1 = hm.genus - 1.0;
    const double A = 2.0 * g1 * R2 * en * en + g1 * Nd * Nd;
    const double B = 4.0 * g1 * R2 * en;
    const double C = 2.0 * g1 * R2;
    const double rc = std::sqrt(Nd * Nd + (Nd * Nd + 0.25) / R2) - en;
    // Every such level has shift >= rc > 0 below the Mane level.
    const double chaotic = phi.tail_integral(std::max(rc, 1e-300), A, B, C);
    win.tail_bound = omitted + chaotic;
  }
  return win;
}

}  // namespace magtrace
