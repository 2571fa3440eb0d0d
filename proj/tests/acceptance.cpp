// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "magtrace/asymptotics.hpp"
#include "magtrace/cli.hpp"
#include "magtrace/dynamics.hpp"
#include "magtrace/error.hpp"
#include "magtrace/tracesum.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace magtrace;

namespace {

const double kPi = std::numbers::pi;
const double kEps5 = 1.0 / std::sqrt(5.0);

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string f(const char* fmt, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, x);
  return buf;
}

std::vector<int> sweep() {
  std::vector<int> Ns;
  for (int N = 40; N <= 400; N += 40) Ns.push_back(N);
  return Ns;
}

ResidualReport residual_sweep(const Model& m, double E, std::vector<CoefficientPrediction>* preds_out = nullptr) {
  const auto lv = EnergyLevel::from_E(E);
  const auto phi = make_gaussian(1.0);
  const auto Ns = sweep();
  const auto traces = y_sequence(m, lv, phi, Ns, 1e-16, 4);
  std::vector<CoefficientPrediction> preds;
  for (int N : Ns) preds.push_back(predict(m, N, lv, phi, {}));
  if (preds_out) *preds_out = preds;
  return residual_report(traces, preds);
}

void residual_criteria(const ResidualReport& rep, Outcome& o) {
  const bool slope_ok = rep.converged_below_tolerance || (rep.slope >= -1.6 && rep.slope <= -0.6);
  const bool spread_ok = rep.converged_below_tolerance || rep.max_scaled <= 10.0 * rep.median_scaled;
  o.pass = o.pass && slope_ok && spread_ok;
  o.detail += "status=" + rep.status;
  if (!rep.converged_below_tolerance) o.detail += " slope=" + f("%.4f", rep.slope);
  o.detail += " max N|r|=" + f("%.4g", rep.max_scaled) + " median=" + f("%.4g", rep.median_scaled);
}

Outcome ac1() {
  Outcome o;
  residual_criteria(residual_sweep(Model{TorusModel{}}, 2.0), o);
  return o;
}

Outcome ac2() {
  Outcome o;
  std::vector<CoefficientPrediction> preds;
  residual_criteria(residual_sweep(Model{SphereModel(0.5)}, std::sqrt(2.0), &preds), o);
  const auto lv = EnergyLevel::from_E(std::sqrt(2.0));
  double worst = 0.0;
  for (const auto& p : preds) {
    const auto h = sphere_c01_half(p.N, lv, make_gaussian(1.0), {});
    worst = std::max(worst, std::abs(h.c0 - p.c0) / std::abs(p.c0));
    worst = std::max(worst, std::abs(h.c1 - p.c1) / std::abs(p.c1));
  }
  o.pass = o.pass && worst <= 1e-14;
  o.detail += " R=1/2 display rel dev=" + f("%.2g", worst);
  return o;
}

Outcome ac3() {
  Outcome o;
  std::vector<CoefficientPrediction> preds;
  const HyperbolicModel hm(1.0, 2);
  residual_criteria(residual_sweep(Model{hm}, 1.2, &preds), o);
  const cplx expect = std::pow(2.0 * kPi, -2.0) * make_gaussian(1.0).hat(0.0) * (4.0 * kPi * kPi) * 2.0 * 1.2;
  double worst = 0.0;
  for (const auto& p : preds) worst = std::max(worst, std::abs(p.c0_k0 - expect) / std::abs(expect));
  bool mane = false;
  try {
    hyperbolic_c01(40, hm, EnergyLevel::from_E(std::sqrt(2.0)), make_gaussian(1.0), {});
  } catch (const Error& e) {
    mane = e.kind() == ErrorKind::mane_level;
  }
  o.pass = o.pass && worst <= 1e-13 && mane;
  o.detail += " k=0 rel dev=" + f("%.2g", worst) + (mane ? " E=sqrt2 rejected" : " E=sqrt2 NOT rejected");
  return o;
}

Outcome ac4() {
  Outcome o;
  const double E = std::sqrt(2.0), tol = 1e-11;
  const double T = 2.0 * kPi * std::sqrt(2.0) / (1.0 - kEps5 * kEps5);
  const auto geo = GeometrySpec::katok(kEps5);
  double gap = 0.0, drift = 0.0, mono = 0.0, det = 0.0;
  for (Orientation orient : {Orientation::plus, Orientation::minus}) {
    const auto s0 = katok_equator_state(kEps5, E, orient);
    const auto r = integrate(geo, s0, E, T, tol);
    gap = std::max({gap, closure_gap(geo, s0, r.state), std::abs(r.state.p[0] - s0.p[0]),
                    std::abs(r.state.p[1] - s0.p[1])});
    drift = std::max({drift, r.energy_drift, r.integral_drift});
    const auto an = katok_poincare_analytic(kEps5, E, orient).P;
    const auto nu = katok_monodromy_numeric(kEps5, E, orient, tol);
    mono = std::max({mono, std::abs(nu.a - an.a), std::abs(nu.b - an.b), std::abs(nu.c - an.c), std::abs(nu.d - an.d)});
    const double expect = 4.0 * std::pow(std::sin(kPi / (1.0 - sign_of(orient) * kEps5)), 2);
    det = std::max(det, std::abs(std::abs(det_I_minus(nu)) - expect));
  }
  o.pass = gap < 1e-8 && drift < 1e-9 && mono < 1e-6 && det < 1e-8;
  o.detail = "closure=" + f("%.2g", gap) + " drift=" + f("%.2g", drift) + " monodromy=" + f("%.2g", mono) +
             " det(I-P)=" + f("%.2g", det);
  return o;
}

Outcome ac5() {
  Outcome o;
  const std::vector<int> ks{1, -1, 2, -2, 3, -3};
  double worst = 0.0;
  for (int N : {10, 20}) {
    for (const auto& t : katok_terms(N, kEps5, make_gaussian(1.0), ks)) worst = std::max(worst, t.rel_dev);
  }
  int bad = 0;
  for (int k : ks) {
    for (Orientation orient : {Orientation::plus, Orientation::minus}) {
      const auto m = maslov_katok(k, kEps5, orient);
      const double zc = 2.0 * k / (1.0 - sign_of(orient) * kEps5);
      const int closed = 2 * static_cast<int>(std::floor(zc)) + 2 * (k > 0 ? 1 : -1) + 1;
      if (m.sgnR + 2 * m.kappa != closed) ++bad;
    }
  }
  o.pass = worst <= 1e-12 && bad == 0;
  o.detail = "N=10,20 max rel dev=" + f("%.2g", worst) + " Maslov mismatches=" + std::to_string(bad);
  return o;
}

Outcome ac6() {
  Outcome o;
  struct Case {
    GeometrySpec g;
    double E;
  };
  double hol = 0.0, act = 0.0;
  for (const auto& [g, E] : {Case{GeometrySpec::torus(), 2.0}, Case{GeometrySpec::sphere(0.5), std::sqrt(2.0)},
                             Case{GeometrySpec::hyperbolic(1.0, 2), 1.2}, Case{GeometrySpec::katok(kEps5), std::sqrt(2.0)}}) {
    const double c = std::sqrt(E * E - 1.0);
    for (const auto& orb : closed_orbit_invariants(g, E).orbits) {
      const auto h = orbit_holonomy(g, orb.start, E, orb.T, 1e-11, 1e-12);
      hol = std::max(hol, std::abs(h.value - orb.hol));
      act = std::max(act, std::abs(std::remainder(orb.S - (orb.L * c + h.value), 2.0 * kPi)));
    }
  }
  o.pass = hol <= 1e-6 && act <= 1e-8;
  o.detail = "holonomy dev=" + f("%.2g", hol) + " action identity dev=" + f("%.2g", act);
  return o;
}

Outcome ac7() {
  Outcome o;
  const auto rep = poisson_check(make_gaussian(1.0), 2.0, 0.3, 1e-15);
  o.pass = rep.diff <= 1e-12;
  o.detail = "|lhs-rhs|=" + f("%.2g", rep.diff) + " tails=" + f("%.2g", rep.lhs_tail + rep.rhs_tail);
  return o;
}

Outcome ac8() {
  Outcome o;
  std::vector<int> Ns;
  for (int N = 10; N <= 200; ++N) Ns.push_back(N);
  const auto rep = torus_cluster_check(EnergyLevel::from_E(std::sqrt(1.0 + 4.0 * kPi)), Ns);
  bool jstar = true;
  for (const auto& r : rep.rows) jstar = jstar && r.jstar == r.N;
  o.pass = rep.exact && rep.bounded && jstar;
  o.detail = std::string(rep.exact ? "exact" : "NOT exact") + " max N|.|=" + f("%.4g", rep.max_scaled) +
             " at N=200: " + f("%.4g", rep.last_scaled);
  return o;
}

Outcome ac9() {
  Outcome o;
  std::mt19937_64 rng(20240901);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::uniform_int_distribution<int> Nd(1, 300);
  const auto phi = make_gaussian(1.0);
  double worst = 0.0;
  for (int i = 0; i < 5; ++i) {
    const int N = Nd(rng);
    const double E = 1.05 + 1.5 * U(rng);
    const double y = y_n(Model{TorusModel{}}, N, EnergyLevel::from_E(E), phi, 1e-16).value.real();
    const long double ref = oracle::torus_y(N, E, 1.0L);
    worst = std::max(worst, std::abs(double((y - ref) / ref)));
  }
  for (int i = 0; i < 5; ++i) {
    const int N = Nd(rng);
    const double E = 1.05 + 1.5 * U(rng), R = 0.3 + U(rng);
    const double y = y_n(Model{SphereModel(R)}, N, EnergyLevel::from_E(E), phi, 1e-16).value.real();
    const long double ref = oracle::sphere_y(N, R, E, 1.0L);
    worst = std::max(worst, std::abs(double((y - ref) / ref)));
  }
  for (int i = 0; i < 5; ++i) {
    const int N = Nd(rng);
    const double R = 0.5 + U(rng);
    const double E = 1.05 + (std::sqrt(1.0 / (R * R) + 1.0) - 1.1) * U(rng);
    const double y = y_n(Model{HyperbolicModel(R, 2)}, N, EnergyLevel::from_E(E), phi, 1e-16).value.real();
    const long double ref = oracle::hyperbolic_y(N, R, 2, E, 1.0L);
    worst = std::max(worst, std::abs(double((y - ref) / ref)));
  }
  o.pass = worst <= 1e-12;
  o.detail = "15 triples, max rel dev=" + f("%.2g", worst);
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "magtrace");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  return cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
}

Outcome ac10() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / ("magtrace_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const std::string cfgdir = std::string(MAGTRACE_SOURCE_DIR) + "/configs/";
  struct Job {
    const char* cmd;
    const char* cfg;
  };
  const Job jobs[] = {{"residual", "torus.json"}, {"residual", "sphere.json"}, {"residual", "hyperbolic.json"},
                      {"katok", "katok.json"},    {"dynamics", "katok.json"},  {"dynamics", "sphere.json"}};
  int compared = 0, differing = 0, failed = 0;
  for (const auto& job : jobs) {
    std::vector<fs::path> dirs;
    for (const char* threads : {"1", "8", "1", "8"}) {
      const fs::path d = root / (std::string(job.cmd) + "_" + job.cfg + "_" + std::to_string(dirs.size()));
      if (run_cli({job.cmd, "--config", cfgdir + job.cfg, "--threads", threads, "--out", d.string()}) != 0) ++failed;
      dirs.push_back(d);
    }
    for (const auto& e : fs::directory_iterator(dirs[0])) {
      const std::string ref = slurp(e.path());
      for (std::size_t i = 1; i < dirs.size(); ++i) {
        ++compared;
        if (!fs::exists(dirs[i] / e.path().filename()) || slurp(dirs[i] / e.path().filename()) != ref) ++differing;
      }
    }
  }
  fs::remove_all(root);
  o.pass = failed == 0 && differing == 0 && compared > 0;
  o.detail = std::to_string(compared) + " file comparisons, " + std::to_string(differing) + " differing, " +
             std::to_string(failed) + " failed runs";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    const char* name;
    Outcome (*fn)();
    double budget;  // seconds, 0 = none
  };
  const Criterion list[] = {
      {"AC1", "torus trace formula residual", ac1, 10.0},
      {"AC2", "sphere trace formula residual", ac2, 0.0},
      {"AC3", "hyperbolic trace formula residual", ac3, 0.0},
      {"AC4", "Katok closure, drift, monodromy", ac4, 5.0},
      {"AC5", "Katok term assembly and Maslov identity", ac5, 0.0},
      {"AC6", "holonomy and action quadrature", ac6, 0.0},
      {"AC7", "Poisson summation self-test", ac7, 0.0},
      {"AC8", "torus Bohr-Sommerfeld cluster", ac8, 0.0},
      {"AC9", "trace sum vs brute-force oracle", ac9, 0.0},
      {"AC10", "determinism across runs and thread counts", ac10, 0.0},
  };
  int failures = 0;
  for (const auto& c : list) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget > 0.0 && secs >= c.budget) {
      o.pass = false;
      o.detail += " (over the " + f("%.0f", c.budget) + " s budget)";
    }
    if (!o.pass) ++failures;
    std::printf("%-4s %s  %s: %s [%.2f s]\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(list)) - failures, std::size(list));
  return failures == 0 ? 0 : 1;
}
