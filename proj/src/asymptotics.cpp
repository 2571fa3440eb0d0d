#include "magtrace/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>

#include "magtrace/error.hpp"
#include "magtrace/summation.hpp"

namespace magtrace {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
const cplx kI(0.0, 1.0);

/// e^{2 pi i turns}, reduced to the nearest integer first.
cplx turn_phase(double turns) { return std::polar(1.0, kTwoPi * (turns - std::nearbyint(turns))); }

/// e^{i pi j/4} for integer j.
cplx eighth_root(long j) {
  const long r = ((j % 8) + 8) % 8;
  return std::polar(1.0, kPi * static_cast<double>(r) / 4.0);
}

double parity(long k) { return (k % 2 == 0) ? 1.0 : -1.0; }

/// Bound on sum_{|k| > K} b(|k|) for a bound sequence that is eventually
/// log-concave and decreasing: once a ratio falls below 1/2 the rest is
/// dominated by a geometric series.
double series_tail(const std::function<double(int)>& b, int K) {
  double prev = b(K + 1);
  double sum = prev;
  if (prev == 0.0) return 0.0;
  for (int k = K + 2; k < K + 1000000; ++k) {
    const double cur = b(k);
    sum += cur;
    if (cur == 0.0) return 2.0 * sum;
    const double ratio = cur / prev;
    if (ratio < 0.5) return 2.0 * (sum + cur * ratio / (1.0 - ratio));
    prev = cur;
  }
  return INFINITY;
}

struct KTerm {
  cplx c0, c1;
};

// Sums k = 0, 1, -1, 2, -2, ... with compensated accumulation.
CoefficientPrediction ksum(int N, const KSumControl& ctl, const std::function<KTerm(int)>& term,
                           const std::function<double(int)>& bound0, const std::function<double(int)>& bound1) {
  require(N >= 1, "N must be a positive integer");
  int K = ctl.k_max;
  if (K <= 0) {
    require(ctl.tol > 0.0, "k-sum tolerance must be positive");
    K = 1;
    while (series_tail(bound0, K) + series_tail(bound1, K) > ctl.tol) {
      if (++K > 100000) fail(ErrorKind::quadrature, "k-sum truncation search did not terminate");
    }
  }
  CoefficientPrediction out;
  out.N = N;
  out.d = 1.0;
  out.k_max = K;
  out.c0_tail = series_tail(bound0, K);
  out.c1_tail = series_tail(bound1, K);
  CompensatedComplexSum s0, s1;
  CompensatedSum a0, a1;
  for (int k = 0; k <= K; ++k) {
    for (int sg : {1, -1}) {
      if (k == 0 && sg < 0) continue;
      const KTerm t = term(sg * k);
      if (k == 0) out.c0_k0 = t.c0;
      s0.add(t.c0);
      s1.add(t.c1);
      a0.add(std::abs(t.c0));
      a1.add(std::abs(t.c1));
    }
  }
  out.c0 = s0.value();
  out.c1 = s1.value();
  out.c0_abs_sum = a0.value();
  out.c1_abs_sum = a1.value();
  return out;
}

}  // namespace

CoefficientPrediction torus_c01(int N, const EnergyLevel& level, const TestFunction& phi, const KSumControl& ctl) {
  const double E = level.E;
  const double base = level.c2 * N / (4.0 * kPi);  // (E^2-1)N/2 in turns
  auto term = [&](int k) {
    const double xi = k * E;
    const cplx ph = parity(k) * turn_phase(-k * base);
    const cplx h0 = phi.hat_derivative(xi, 0);
    const cplx h1 = phi.hat_derivative(xi, 1);
    const cplx h2 = phi.hat_derivative(xi, 2);
    KTerm t;
    t.c0 = E / kTwoPi * h0 * ph;
    t.c1 = (kI / kTwoPi * h1 + kI * (k * E / (4.0 * kPi)) * h2) * ph;
    return t;
  };
  auto b0 = [&](int k) { return E / kTwoPi * phi.hat_envelope(k * E, 0); };
  auto b1 = [&](int k) {
    return phi.hat_envelope(k * E, 1) / kTwoPi + k * E / (4.0 * kPi) * phi.hat_envelope(k * E, 2);
  };
  return ksum(N, ctl, term, b0, b1);
}

CoefficientPrediction sphere_c01(int N, const SphereModel& model, const EnergyLevel& level, const TestFunction& phi,
                                 const KSumControl& ctl) {
  const double E = level.E, R = model.R;
  const double s = std::sqrt(level.c2 + 1.0 / (4.0 * R * R));
  const double h = kTwoPi * E * R / s;
  const double turns = R * s * N;
  const double R2 = R * R;
  const double q2 = kPi * E * R * (4.0 * R2 - 1.0) / (2.0 * s * s * s);
  const double q0 = kPi * E * R / (2.0 * s);
  auto term = [&](int k) {
    const double xi = k * h;
    const cplx ph = parity(static_cast<long>(k) * (N + 1)) * turn_phase(-k * turns);
    const cplx h0 = phi.hat_derivative(xi, 0);
    const cplx h1 = phi.hat_derivative(xi, 1);
    const cplx h2 = phi.hat_derivative(xi, 2);
    KTerm t;
    t.c0 = 2.0 * E * R2 * h0 * ph;
    t.c1 = (2.0 * kI * R2 * h1 - kI * (k * q2) * h2 - kI * (k * q0) * h0) * ph;
    return t;
  };
  auto b0 = [&](int k) { return 2.0 * E * R2 * phi.hat_envelope(k * h, 0); };
  auto b1 = [&](int k) {
    return 2.0 * R2 * phi.hat_envelope(k * h, 1) + k * std::abs(q2) * phi.hat_envelope(k * h, 2) +
           k * q0 * phi.hat_envelope(k * h, 0);
  };
  return ksum(N, ctl, term, b0, b1);
}

CoefficientPrediction sphere_c01_half(int N, const EnergyLevel& level, const TestFunction& phi,
                                      const KSumControl& ctl) {
  const double E = level.E;
  const double turns = E * N / 2.0;
  auto term = [&](int k) {
    const double xi = k * kPi;
    const cplx ph = parity(static_cast<long>(k) * (N + 1)) * turn_phase(-k * turns);
    const cplx h0 = phi.hat_derivative(xi, 0);
    const cplx h1 = phi.hat_derivative(xi, 1);
    KTerm t;
    t.c0 = E / 2.0 * h0 * ph;
    t.c1 = (kI / 2.0 * h1 - kI * (kPi * k / 4.0) * h0) * ph;
    return t;
  };
  auto b0 = [&](int k) { return E / 2.0 * phi.hat_envelope(k * kPi, 0); };
  auto b1 = [&](int k) { return phi.hat_envelope(k * kPi, 1) / 2.0 + kPi * k / 4.0 * phi.hat_envelope(k * kPi, 0); };
  return ksum(N, ctl, term, b0, b1);
}

CoefficientPrediction hyperbolic_c01(int N, const HyperbolicModel& model, const EnergyLevel& level,
                                     const TestFunction& phi, const KSumControl& ctl) {
  check_energy(Model{model}, level);
  const double E = level.E, R = model.R, R2 = R * R;
  const double w = std::sqrt(1.0 / R2 + 1.0 - E * E);
  const double h = kTwoPi * E * R / w;
  const double turns = R * w * N;
  const double g2 = 2.0 * model.genus - 2.0;
  const double q0 = kPi * E * R / (4.0 * w);
  const double q2 = kPi * E * R * (R2 + 1.0) / (w * w * w);
  auto term = [&](int k) {
    const double xi = k * h;
    const cplx ph = parity(k) * turn_phase(k * turns);
    const cplx h0 = phi.hat_derivative(xi, 0);
    const cplx h1 = phi.hat_derivative(xi, 1);
    const cplx h2 = phi.hat_derivative(xi, 2);
    KTerm t;
    t.c0 = g2 * E * R2 * h0 * ph;
    t.c1 = g2 * (kI * R2 * h1 + kI * (k * q0) * h0 + kI * (k * q2) * h2) * ph;
    return t;
  };
  auto b0 = [&](int k) { return g2 * E * R2 * phi.hat_envelope(k * h, 0); };
  auto b1 = [&](int k) {
    return g2 * (R2 * phi.hat_envelope(k * h, 1) + k * q0 * phi.hat_envelope(k * h, 0) +
                 k * q2 * phi.hat_envelope(k * h, 2));
  };
  return ksum(N, ctl, term, b0, b1);
}

CoefficientPrediction predict(const Model& model, int N, const EnergyLevel& level, const TestFunction& phi,
                              const KSumControl& ctl) {
  if (std::holds_alternative<TorusModel>(model)) return torus_c01(N, level, phi, ctl);
  if (const auto* s = std::get_if<SphereModel>(&model)) return sphere_c01(N, *s, level, phi, ctl);
  return hyperbolic_c01(N, std::get<HyperbolicModel>(model), level, phi, ctl);
}

cplx general_c0_volume(cplx phi_hat_0, double volXE, int n) {
  require(volXE > 0.0, "Liouville volume must be positive");
  require(n >= 1, "dimension n must be positive");
  return std::pow(kTwoPi, -n) * phi_hat_0 * volXE;
}

cplx general_c0_nondegenerate(double Tsharp, int m, double S, double detIminusP, double Tgamma, cplx phi_hat_at_T,
                              int N, double resonance_margin) {
  (void)Tgamma;
  require(Tsharp > 0.0, "primitive period must be positive");
  if (!(detIminusP > resonance_margin)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "degenerate orbit: |det(I-P)|=%.3g is within the resonance margin", detIminusP);
    fail(ErrorKind::resonance, buf);
  }
  const cplx phase = eighth_root(m) * turn_phase(-static_cast<double>(N) * (S / kTwoPi));
  return Tsharp / (kTwoPi * std::sqrt(detIminusP)) * phase * phi_hat_at_T;
}

std::vector<KatokTerm> katok_terms(int N, double eps, const TestFunction& phi, const std::vector<int>& ks,
                                   double resonance_margin) {
  require(N >= 1, "N must be a positive integer");
  const double E = std::sqrt(2.0);
  const GeometrySpec geo = GeometrySpec::katok(eps);
  const ClosedOrbits orbits = closed_orbit_invariants(geo, E);
  const double e1 = 1.0 - eps * eps;
  std::vector<KatokTerm> out;
  for (int k : ks) {
    require(k != 0, "Katok terms need k != 0");
    for (Orientation o : {Orientation::plus, Orientation::minus}) {
      const int sg = sign_of(o);
      const double denom = 1.0 - sg * eps;
      const double sn = std::sin(kPi * k / denom);
      if (!(std::abs(sn) > resonance_margin)) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "resonant Katok term: k=%d, branch %c, |sin(pi k/(1%ceps))|=%.3g", k,
                      sg > 0 ? '+' : '-', sg > 0 ? '-' : '+', std::abs(sn));
        fail(ErrorKind::resonance, buf);
      }
      const MaslovResult mr = maslov_katok(k, eps, o, resonance_margin);
      const OrbitInvariants& orb = orbits.orbits[sg > 0 ? 0 : 1];
      const KatokPoincare an = katok_poincare_analytic(eps, E, o);

      KatokTerm t;
      t.k = k;
      t.branch = o;
      t.maslov = mr.m;
      // Closed form.
      const double xi = kTwoPi * std::sqrt(2.0) * k / e1;
      t.closed_form = 1.0 / (std::sqrt(2.0) * e1) * eighth_root(static_cast<long>(k) * mr.m) *
                      turn_phase(-static_cast<double>(N) * k / denom) / sn * phi.hat(xi);
      // Assembled from orbit data: k-th iterate of the primitive orbit.
      t.Tgamma = k * orb.Tsharp;
      t.S = k * orb.S;
      t.detIminusP = std::abs(det_I_minus(mat_pow(an.P, k)));
      const bool neg = std::sin(k * an.alpha / 2.0) < 0.0;
      t.m_assembled = k * mr.m + (neg ? 4 : 0);
      t.assembled = general_c0_nondegenerate(orb.Tsharp, t.m_assembled, t.S, t.detIminusP, t.Tgamma,
                                             phi.hat(t.Tgamma), N, resonance_margin);
      const double scale = std::max(std::abs(t.closed_form), 1e-300);
      t.rel_dev = std::abs(t.assembled - t.closed_form) / scale;
      out.push_back(t);
    }
  }
  return out;
}

KatokPrediction katok_c0(int N, double eps, const TestFunction& phi, const KSumControl& ctl) {
  require(N >= 1, "N must be a positive integer");
  require(std::isfinite(eps) && eps > 0.0 && eps < 1.0, "katok eps must lie in (0, 1)");
  const double E = std::sqrt(2.0);
  const double Tsharp = kTwoPi * std::sqrt(2.0) / (1.0 - eps * eps);
  const auto support = phi.hat_support();
  const bool zero_in = phi.hat_may_be_nonzero_in(0.0, 0.0);
  std::vector<int> ks;
  bool nonzero_in = false;
  if (!support) {
    nonzero_in = true;
  } else {
    const int klo = static_cast<int>(std::floor(support->first / Tsharp));
    const int khi = static_cast<int>(std::ceil(support->second / Tsharp));
    for (int k = klo; k <= khi; ++k) {
      if (k == 0) continue;
      if (phi.hat_may_be_nonzero_in(k * Tsharp, k * Tsharp)) ks.push_back(k);
    }
    nonzero_in = !ks.empty();
  }
  if (zero_in && nonzero_in) {
    fail(ErrorKind::validation,
         "mixed support: phihat is nonzero at the zero period and at a nonzero period; use a one-line window");
  }
  KatokPrediction out;
  out.pred.N = N;
  if (zero_in) {
    out.regime = "zero_period";
    out.pred.d = 1.0;
    out.pred.c0 = general_c0_volume(phi.hat(0.0), liouville_volume(GeometrySpec::katok(eps), E), 2);
    out.pred.c0_k0 = out.pred.c0;
    return out;
  }
  out.pred.d = 0.0;
  if (!nonzero_in) {
    out.regime = "empty";
    return out;
  }
  out.regime = "nonzero_period";
  out.terms = katok_terms(N, eps, phi, ks, ctl.resonance_margin);
  CompensatedComplexSum acc;
  CompensatedSum abs_acc;
  for (const auto& t : out.terms) {
    acc.add(t.closed_form);
    abs_acc.add(std::abs(t.closed_form));
    out.max_rel_dev = std::max(out.max_rel_dev, t.rel_dev);
  }
  out.pred.c0 = acc.value();
  out.pred.c0_abs_sum = abs_acc.value();
  out.pred.k_max = ks.empty() ? 0 : std::max(std::abs(ks.front()), std::abs(ks.back()));
  return out;
}

ResidualReport residual_report(const std::vector<TraceValue>& traces, const std::vector<CoefficientPrediction>& preds) {
  require(traces.size() == preds.size(), "residual report needs matched trace and prediction lists");
  require(traces.size() >= 5, "residual report needs at least five N values");
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  ResidualReport rep;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const auto& tv = traces[i];
    const auto& pr = preds[i];
    require(tv.N == pr.N, "residual report: N mismatch between traces and predictions");
    const double Nd = tv.N;
    const double a = std::pow(Nd, pr.d), b = std::pow(Nd, pr.d - 1.0);
    ResidualRow row;
    row.N = tv.N;
    row.Y = tv.value;
    row.c0 = pr.c0;
    row.c1 = pr.c1;
    row.r = tv.value - pr.c0 * a - pr.c1 * b;
    row.scaled = std::abs(row.r) * std::pow(Nd, 2.0 - pr.d);
    row.tail = tv.tail_bound + pr.c0_tail * a + pr.c1_tail * b;
    const double mag = std::abs(tv.value) + pr.c0_abs_sum * a + pr.c1_abs_sum * b;
    row.floor = std::max(1e-13, 64.0 * kEps * mag) + row.tail;
    if (std::abs(row.r) > row.floor) {
      xs.push_back(std::log(Nd));
      ys.push_back(std::log(std::abs(row.r)));
    }
    rep.rows.push_back(row);
  }
  std::vector<double> scaled;
  for (const auto& r : rep.rows) scaled.push_back(r.scaled);
  rep.max_scaled = *std::max_element(scaled.begin(), scaled.end());
  std::sort(scaled.begin(), scaled.end());
  const std::size_t n = scaled.size();
  rep.median_scaled = n % 2 ? scaled[n / 2] : 0.5 * (scaled[n / 2 - 1] + scaled[n / 2]);
  rep.fit_points = xs.size();
  if (xs.size() < 3) {
    rep.converged_below_tolerance = true;
    rep.status = "converged below tolerance";
    return rep;
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(xs.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  rep.slope = sxy / sxx;
  rep.status = "fit";
  return rep;
}

ClusterReport torus_cluster_check(const EnergyLevel& level, const std::vector<int>& N_list) {
  require(!N_list.empty(), "N list must be nonempty");
  const double E = level.E;
  const double mf = level.c2 / (4.0 * kPi);
  const int m = static_cast<int>(std::lround(mf));
  if (m < 1 || std::abs(mf - m) > 1e-12 * std::max(1.0, mf)) {
    fail(ErrorKind::validation, "cluster check needs E^2 - 1 = 4 pi m for a positive integer m");
  }
  ClusterReport rep;
  rep.m = m;
  rep.limit = -kPi * kPi / (2.0 * E * E * E);
  rep.exact = true;
  const double target_shift = kPi / E;
  for (int N : N_list) {
    const double Nd = N;
    ClusterRow row;
    row.N = N;
    row.jstar = static_cast<std::int64_t>(m) * N;
    const SpectrumEntry e = torus_levels(N, row.jstar);
    row.mult = e.mult;
    row.lambda = e.lambda;
    row.lambda_closed = std::sqrt(E * E * Nd * Nd + kTwoPi * Nd);
    row.rel_diff = std::abs(row.lambda - row.lambda_closed) / row.lambda_closed;
    row.scaled = Nd * std::abs(row.lambda - E * Nd - target_shift);
    const double dist = std::abs(row.lambda - E * Nd - target_shift);
    row.nearest = true;
    for (std::int64_t dj : {-1, 1}) {
      if (row.jstar + dj < 0) continue;
      const double other = std::abs(torus_levels(N, row.jstar + dj).lambda - E * Nd - target_shift);
      if (!(other > dist)) row.nearest = false;
    }
    if (!(row.rel_diff <= 1e-14) || !row.nearest) rep.exact = false;
    rep.max_scaled = std::max(rep.max_scaled, row.scaled);
    rep.rows.push_back(row);
  }
  rep.last_scaled = rep.rows.back().scaled;
  rep.bounded = rep.max_scaled <= 2.0 * rep.last_scaled + 1.0;
  return rep;
}

PoissonReport poisson_check(const TestFunction& f, double P, double t, double tol) {
  require(P > 0.0, "Poisson period must be positive");
  require(tol > 0.0, "Poisson tolerance must be positive");
  PoissonReport rep;
  // Direct side: all n with |nP + t| <= r.
  const double r = f.radius(tol * 1e-3);
  const long n_lo = static_cast<long>(std::floor((-r - t) / P));
  const long n_hi = static_cast<long>(std::ceil((r - t) / P));
  CompensatedComplexSum lhs;
  for (long n = n_lo; n <= n_hi; ++n) {
    lhs.add(f(n * P + t));
    ++rep.n_terms;
  }
  // Omitted points are at least r + jP away from the origin on each side.
  const double x0 = std::min(std::abs(n_lo * P + t), std::abs(n_hi * P + t));
  const double rr = std::max(x0, r);
  rep.lhs_tail = 2.0 * (f.envelope(rr + P) + f.tail_integral(rr, 0.0, 1.0, 0.0) / P);
  rep.lhs = lhs.value();

  const double h = kTwoPi / P;
  auto bound = [&](int k) { return f.hat_envelope(k * h, 0) / P; };
  int K = 1;
  while (series_tail(bound, K) > tol * 1e-3) {
    if (++K > 1000000) fail(ErrorKind::quadrature, "Poisson k truncation did not terminate");
  }
  CompensatedComplexSum rhs;
  for (int k = 0; k <= K; ++k) {
    for (int sg : {1, -1}) {
      if (k == 0 && sg < 0) continue;
      const int kk = sg * k;
      rhs.add(f.hat(kk * h) / P * turn_phase(kk * t / P));
      ++rep.k_terms;
    }
  }
  rep.rhs_tail = series_tail(bound, K);
  rep.rhs = rhs.value();
  rep.diff = std::abs(rep.lhs - rep.rhs);
  return rep;
}

}  // namespace magtrace
