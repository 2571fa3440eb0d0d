#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <numbers>
#include <thread>
#include <variant>

#include <CLI11.hpp>

#include "magtrace/cli.hpp"
#include "magtrace/error.hpp"
#include "magtrace/tracesum.hpp"

namespace magtrace::cli {

namespace {

using ojson = nlohmann::ordered_json;
using Cell = std::variant<double, std::int64_t, std::string>;

constexpr double kPi = std::numbers::pi;

struct Table {
  std::string name;
  std::vector<std::string> cols;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::string> trailer;  // CSV comment lines after the rows
};

std::string cell_text(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return fmt(*d);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

ojson cell_json(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&c)) return *i;
  return std::get<std::string>(c);
}

std::string render_csv(const Table& t) {
  std::string out = csv_join(t.cols);
  for (const auto& row : t.rows) {
    std::vector<std::string> cells;
    cells.reserve(row.size());
    for (const auto& c : row) cells.push_back(cell_text(c));
    out += csv_join(cells);
  }
  for (const auto& line : t.trailer) out += "# " + line + '\n';
  return out;
}

ojson table_json(const Table& t) {
  ojson arr = ojson::array();
  for (const auto& row : t.rows) {
    ojson obj = ojson::object();
    for (std::size_t i = 0; i < t.cols.size(); ++i) obj[t.cols[i]] = cell_json(row[i]);
    arr.push_back(std::move(obj));
  }
  return arr;
}

ojson config_echo(const RunConfig& cfg) {
  ojson j;
  j["schema"] = "magtrace/1";
  j["geometry"] = to_string(cfg.geometry.kind);
  j["R"] = cfg.geometry.R;
  j["genus"] = cfg.geometry.genus;
  j["eps"] = cfg.geometry.eps;
  j["E"] = cfg.E;
  j["test_function"] = cfg.phi.describe();
  j["tail_tol"] = cfg.tol.tail_tol;
  j["k_tol"] = cfg.tol.k_tol;
  j["k_max"] = cfg.tol.k_max;
  return j;
}

// CSV: one file per table plus any extra JSON documents. JSON: a single
// document holding every table and the extras.
CommandResult package(const std::string& command, const RunConfig& cfg, const std::vector<Table>& tables,
                      const ojson& extras = ojson::object()) {
  CommandResult res;
  if (cfg.format == Format::csv) {
    for (const auto& t : tables) res.files.push_back({t.name + ".csv", render_csv(t)});
    for (const auto& item : extras.items()) res.files.push_back({item.key() + ".json", dump_json(item.value())});
  } else {
    ojson doc;
    doc["command"] = command;
    doc["config"] = config_echo(cfg);
    for (const auto& t : tables) doc[t.name] = table_json(t);
    for (const auto& item : extras.items()) doc[item.key()] = item.value();
    res.files.push_back({command + ".json", dump_json(doc)});
  }
  return res;
}

const Model& spectral_model(const RunConfig& cfg, std::optional<Model>& holder, const char* command) {
  holder = cfg.model();
  if (!holder) {
    fail(ErrorKind::validation,
         std::string(command) + " needs a torus, sphere or hyperbolic geometry (katok has no spectral side here)");
  }
  return *holder;
}

void require_katok(const RunConfig& cfg, const char* command) {
  if (cfg.geometry.kind != GeometryKind::katok) fail(ErrorKind::validation, std::string(command) + " needs geometry katok");
  if (!(std::abs(cfg.E - std::sqrt(2.0)) < 1e-12)) {
    fail(ErrorKind::validation, std::string(command) + " is defined at E = sqrt(2) only");
  }
}

const char* branch_name(Orientation o) { return o == Orientation::plus ? "+" : "-"; }

}  // namespace

CommandResult cmd_spectrum(const RunConfig& cfg, unsigned threads) {
  std::optional<Model> holder;
  const Model& model = spectral_model(cfg, holder, "spectrum");
  const EnergyLevel level = EnergyLevel::from_E(cfg.E);
  std::vector<Window> windows(cfg.N.size());
  parallel_for(cfg.N.size(), threads, [&](std::size_t i) {
    windows[i] = enumerate_window(model, cfg.N[i], level, cfg.phi, cfg.tol.tail_tol);
  });
  Table t{"spectrum", {"N", "j", "nu", "lambda", "mult", "shift", "radius", "tail_bound"}, {}, {}};
  std::size_t count = 0;
  for (const auto& w : windows) {
    for (std::size_t k = 0; k < w.entries.size(); ++k) {
      const auto& e = w.entries[k];
      t.rows.push_back({std::int64_t{e.N}, e.j, e.nu, e.lambda, e.mult, w.shift[k], w.radius, w.tail_bound});
    }
    count += w.entries.size();
  }
  CommandResult res = package("spectrum", cfg, {t});
  res.summary = "spectrum: " + std::to_string(count) + " levels over " + std::to_string(cfg.N.size()) + " N values";
  return res;
}

CommandResult cmd_trace(const RunConfig& cfg, unsigned threads) {
  std::optional<Model> holder;
  const Model& model = spectral_model(cfg, holder, "trace");
  const EnergyLevel level = EnergyLevel::from_E(cfg.E);
  const auto ys = y_sequence(model, level, cfg.phi, cfg.N, cfg.tol.tail_tol, threads);
  Table t{"trace", {"N", "Y_re", "Y_im", "tail_bound", "terms"}, {}, {}};
  for (const auto& y : ys) {
    t.rows.push_back({std::int64_t{y.N}, y.value.real(), y.value.imag(), y.tail_bound, static_cast<std::int64_t>(y.terms)});
  }
  CommandResult res = package("trace", cfg, {t});
  res.summary = "trace: " + std::to_string(ys.size()) + " values";
  return res;
}

namespace {

std::vector<CoefficientPrediction> predictions(const RunConfig& cfg, unsigned threads, std::vector<std::string>* regime) {
  std::vector<CoefficientPrediction> out(cfg.N.size());
  if (regime) regime->assign(cfg.N.size(), "k_sum");
  const KSumControl ctl = cfg.ksum();
  if (cfg.geometry.kind == GeometryKind::katok) {
    require_katok(cfg, "predict");
    parallel_for(cfg.N.size(), threads, [&](std::size_t i) {
      const KatokPrediction kp = katok_c0(cfg.N[i], cfg.geometry.eps, cfg.phi, ctl);
      out[i] = kp.pred;
      if (regime) (*regime)[i] = kp.regime;
    });
    return out;
  }
  const Model model = *cfg.model();
  const EnergyLevel level = EnergyLevel::from_E(cfg.E);
  parallel_for(cfg.N.size(), threads, [&](std::size_t i) { out[i] = predict(model, cfg.N[i], level, cfg.phi, ctl); });
  return out;
}

}  // namespace

CommandResult cmd_predict(const RunConfig& cfg, unsigned threads) {
  std::vector<std::string> regime;
  const auto preds = predictions(cfg, threads, &regime);
  Table t{"predict",
          {"N", "regime", "d", "c0_re", "c0_im", "c1_re", "c1_im", "k_max", "c0_tail", "c1_tail", "c0_k0_re",
           "c0_k0_im"},
          {},
          {}};
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto& p = preds[i];
    t.rows.push_back({std::int64_t{p.N}, regime[i], p.d, p.c0.real(), p.c0.imag(), p.c1.real(), p.c1.imag(),
                      std::int64_t{p.k_max}, p.c0_tail, p.c1_tail, p.c0_k0.real(), p.c0_k0.imag()});
  }
  CommandResult res = package("predict", cfg, {t});
  res.summary = "predict: " + std::to_string(preds.size()) + " coefficient rows";
  return res;
}

CommandResult cmd_residual(const RunConfig& cfg, unsigned threads) {
  std::optional<Model> holder;
  const Model& model = spectral_model(cfg, holder, "residual");
  const EnergyLevel level = EnergyLevel::from_E(cfg.E);
  const auto ys = y_sequence(model, level, cfg.phi, cfg.N, cfg.tol.tail_tol, threads);
  const auto preds = predictions(cfg, threads, nullptr);
  const ResidualReport rep = residual_report(ys, preds);

  Table t{"residual",
          {"N", "Y_re", "Y_im", "c0_re", "c0_im", "c1_re", "c1_im", "r_re", "r_im", "scaled", "floor", "tail_bound"},
          {},
          {}};
  for (const auto& r : rep.rows) {
    t.rows.push_back({std::int64_t{r.N}, r.Y.real(), r.Y.imag(), r.c0.real(), r.c0.imag(), r.c1.real(), r.c1.imag(),
                      r.r.real(), r.r.imag(), r.scaled, r.floor, r.tail});
  }
  const bool slope_ok = rep.converged_below_tolerance || (rep.slope >= -1.6 && rep.slope <= -0.6);
  const bool spread_ok = rep.converged_below_tolerance || rep.max_scaled <= 10.0 * rep.median_scaled;
  t.trailer.push_back("slope=" + fmt(rep.slope) + ",max_scaled=" + fmt(rep.max_scaled) +
                      ",median_scaled=" + fmt(rep.median_scaled) + ",fit_points=" + std::to_string(rep.fit_points) +
                      ",status=" + rep.status);

  ojson summary;
  summary["slope"] = rep.slope;
  summary["max_scaled"] = rep.max_scaled;
  summary["median_scaled"] = rep.median_scaled;
  summary["fit_points"] = rep.fit_points;
  summary["status"] = rep.status;
  summary["slope_in_range"] = slope_ok;
  summary["spread_ok"] = spread_ok;
  ojson extras;
  if (cfg.format == Format::json) extras["summary"] = summary;
  CommandResult res = package("residual", cfg, {t}, extras);
  res.checks_passed = slope_ok && spread_ok;
  char buf[200];
  std::snprintf(buf, sizeof buf, "residual: slope=%.6g max_scaled=%.6g median_scaled=%.6g status=%s %s", rep.slope,
                rep.max_scaled, rep.median_scaled, rep.status.c_str(), res.checks_passed ? "PASS" : "FAIL");
  res.summary = buf;
  return res;
}

CommandResult cmd_dynamics(const RunConfig& cfg, unsigned threads) {
  const GeometrySpec& geo = cfg.geometry;
  const double E = cfg.E;
  const double c = std::sqrt(E * E - 1.0);
  const ClosedOrbits co = closed_orbit_invariants(geo, E);

  struct OrbitRun {
    std::vector<PathSample> path;
    IntegrationResult one_period;
    HolonomyResult hol;
    double gap = 0.0;
  };
  std::vector<OrbitRun> runs(co.orbits.size());
  parallel_for(co.orbits.size(), threads, [&](std::size_t i) {
    const auto& o = co.orbits[i];
    runs[i].path = integrate_path(geo, o.start, E, o.T, cfg.path_samples, cfg.tol.ode_tol);
    runs[i].one_period = integrate(geo, o.start, E, o.T, cfg.tol.ode_tol);
    runs[i].gap = closure_gap(geo, o.start, runs[i].one_period.state);
    runs[i].hol = orbit_holonomy(geo, o.start, E, o.T, cfg.tol.holonomy_tol, cfg.tol.ode_tol);
  });

  const bool katok = geo.kind == GeometryKind::katok;
  Table t{"orbits", {"orbit", "t", "q1", "q2", "p1", "p2", "chart", "H", "H_minus_E", "ode_tol"}, {}, {}};
  if (katok) t.cols.push_back("P");
  ojson inv;
  inv["geometry"] = to_string(geo.kind);
  inv["E"] = E;
  inv["closed"] = co.closed;
  if (!co.note.empty()) inv["note"] = co.note;
  ojson orbits = ojson::array();
  for (std::size_t i = 0; i < co.orbits.size(); ++i) {
    const auto& o = co.orbits[i];
    const auto& r = runs[i];
    for (const auto& s : r.path) {
      const double H = hamiltonian(geo, s.s);
      t.rows.push_back({static_cast<std::int64_t>(i), s.t, s.s.q[0], s.s.q[1], s.s.p[0], s.s.p[1],
                        std::int64_t{s.s.chart}, H, H - E, cfg.tol.ode_tol});
      if (katok) t.rows.back().push_back(katok_first_integral(geo.eps, s.s));
    }
    ojson oj;
    oj["orbit"] = i;
    oj["orientation"] = o.orientation;
    oj["orientation_label"] = o.orientation_label;
    oj["L"] = o.L;
    oj["T"] = o.T;
    oj["Tsharp"] = o.Tsharp;
    oj["S"] = o.S;
    oj["holonomy"] = o.hol;
    oj["holonomy_numeric"] = r.hol.value;
    oj["holonomy_deviation"] = std::abs(r.hol.value - o.hol);
    oj["holonomy_refinement_change"] = r.hol.change;
    oj["holonomy_samples"] = r.hol.samples;
    oj["action_identity_deviation"] = std::abs(std::remainder(o.L * c + r.hol.value - o.S, 2.0 * kPi));
    if (o.maslov) {
      oj["maslov"] = *o.maslov;
    } else {
      oj["maslov"] = "not provided";
    }
    oj["detIminusP"] = o.detIminusP;
    oj["closure_gap"] = r.gap;
    oj["energy_drift"] = r.one_period.energy_drift;
    oj["integral_drift"] = r.one_period.integral_drift;
    oj["steps"] = r.one_period.steps;
    oj["chart_switches"] = r.one_period.chart_switches;
    orbits.push_back(std::move(oj));
  }
  inv["orbits"] = std::move(orbits);
  const VolumeEstimate mc = liouville_volume_mc(geo, E, cfg.mc_samples, cfg.seed);
  ojson vol;
  vol["exact"] = liouville_volume(geo, E);
  vol["monte_carlo"] = mc.estimate;
  vol["monte_carlo_std_error"] = mc.std_error;
  vol["samples"] = mc.samples;
  vol["seed"] = cfg.seed;
  inv["liouville_volume"] = std::move(vol);

  ojson extras;
  extras["invariants"] = std::move(inv);
  CommandResult res = package("dynamics", cfg, {t}, extras);
  res.summary = "dynamics: " + std::to_string(co.orbits.size()) + " closed orbit(s)" +
                (co.closed ? std::string() : " (" + co.note + ")");
  return res;
}

CommandResult cmd_katok(const RunConfig& cfg, unsigned threads) {
  require_katok(cfg, "katok");
  const double eps = cfg.geometry.eps;
  const double E = cfg.E;
  const GeometrySpec geo = GeometrySpec::katok(eps);
  const Orientation branches[2] = {Orientation::plus, Orientation::minus};

  // Monodromy, closure and drift for both equators.
  struct BranchRun {
    KatokPoincare an;
    Mat2 num;
    IntegrationResult one_period;
    double gap = 0.0;
  };
  BranchRun br[2];
  parallel_for(2, threads, [&](std::size_t i) {
    br[i].an = katok_poincare_analytic(eps, E, branches[i]);
    br[i].num = katok_monodromy_numeric(eps, E, branches[i], cfg.tol.ode_tol);
    const PhaseState s0 = katok_equator_state(eps, E, branches[i]);
    const double T = 2.0 * kPi * E / (std::sqrt(E * E - 1.0) * (1.0 - eps * eps));
    br[i].one_period = integrate(geo, s0, E, T, cfg.tol.ode_tol);
    br[i].gap = closure_gap(geo, s0, br[i].one_period.state);
  });
  Table mono{"katok_monodromy",
             {"branch", "P_a", "P_b", "P_c", "P_d", "numeric_a", "numeric_b", "numeric_c", "numeric_d",
              "max_entry_deviation", "detIminusP", "detIminusP_numeric", "detIminusP_closed", "closure_gap",
              "energy_drift", "integral_drift", "ode_tol"},
             {},
             {}};
  double max_mono = 0.0, max_det = 0.0;
  for (int i = 0; i < 2; ++i) {
    const auto& b = br[i];
    const Mat2& P = b.an.P;
    const double dev = std::max({std::abs(P.a - b.num.a), std::abs(P.b - b.num.b), std::abs(P.c - b.num.c),
                                 std::abs(P.d - b.num.d)});
    const double sn = std::sin(kPi / (1.0 - sign_of(branches[i]) * eps));
    const double closed = 4.0 * sn * sn;
    max_mono = std::max(max_mono, dev);
    max_det = std::max(max_det, std::abs(b.an.detIminusP - closed));
    mono.rows.push_back({std::string(branch_name(branches[i])), P.a, P.b, P.c, P.d, b.num.a, b.num.b, b.num.c,
                         b.num.d, dev, b.an.detIminusP, std::abs(det_I_minus(b.num)), closed, b.gap,
                         b.one_period.energy_drift, b.one_period.integral_drift, cfg.tol.ode_tol});
  }

  Table mas{"katok_maslov", {"k", "branch", "rotation", "kappa", "sgnR", "m", "closed_form", "identity_holds"}, {}, {}};
  bool maslov_ok = true;
  for (int k : cfg.katok_k) {
    for (Orientation o : branches) {
      const MaslovResult m = maslov_katok(k, eps, o, cfg.tol.resonance_margin);
      const bool ok = m.sgnR + 2 * m.kappa == m.closed_form;
      maslov_ok = maslov_ok && ok;
      mas.rows.push_back({std::int64_t{k}, std::string(branch_name(o)), m.rotation, std::int64_t{m.kappa},
                          std::int64_t{m.sgnR}, std::int64_t{m.m}, std::int64_t{m.closed_form},
                          std::string(ok ? "true" : "false")});
    }
  }

  std::vector<std::vector<KatokTerm>> per_n(cfg.N.size());
  parallel_for(cfg.N.size(), threads, [&](std::size_t i) {
    per_n[i] = katok_terms(cfg.N[i], eps, cfg.phi, cfg.katok_k, cfg.tol.resonance_margin);
  });
  Table terms{"katok_terms",
              {"N", "k", "branch", "maslov", "m_assembled", "Tgamma", "S", "detIminusP", "closed_re", "closed_im",
               "assembled_re", "assembled_im", "rel_dev"},
              {},
              {}};
  double max_rel = 0.0;
  for (std::size_t i = 0; i < cfg.N.size(); ++i) {
    for (const auto& kt : per_n[i]) {
      max_rel = std::max(max_rel, kt.rel_dev);
      terms.rows.push_back({std::int64_t{cfg.N[i]}, std::int64_t{kt.k}, std::string(branch_name(kt.branch)),
                            std::int64_t{kt.maslov}, std::int64_t{kt.m_assembled}, kt.Tgamma, kt.S, kt.detIminusP,
                            kt.closed_form.real(), kt.closed_form.imag(), kt.assembled.real(), kt.assembled.imag(),
                            kt.rel_dev});
    }
  }
  terms.trailer.push_back("assembled=closed-form max_rel_dev=" + fmt(max_rel));

  ojson summary;
  summary["eps"] = eps;
  summary["max_monodromy_deviation"] = max_mono;
  summary["max_det_deviation"] = max_det;
  summary["maslov_identity_holds"] = maslov_ok;
  summary["max_assembled_rel_dev"] = max_rel;
  ojson extras;
  extras["katok_summary"] = summary;
  CommandResult res = package("katok", cfg, {mono, mas, terms}, extras);
  res.checks_passed = max_mono < 1e-6 && max_det < 1e-8 && maslov_ok && max_rel < 1e-12;
  char buf[200];
  std::snprintf(buf, sizeof buf, "katok: monodromy dev=%.3g det dev=%.3g maslov=%s assembled max rel dev=%.3g %s",
                max_mono, max_det, maslov_ok ? "ok" : "mismatch", max_rel, res.checks_passed ? "PASS" : "FAIL");
  res.summary = buf;
  return res;
}

CommandResult run_command(const std::string& name, const RunConfig& cfg, unsigned threads) {
  if (name == "spectrum") return cmd_spectrum(cfg, threads);
  if (name == "trace") return cmd_trace(cfg, threads);
  if (name == "predict") return cmd_predict(cfg, threads);
  if (name == "residual") return cmd_residual(cfg, threads);
  if (name == "dynamics") return cmd_dynamics(cfg, threads);
  if (name == "katok") return cmd_katok(cfg, threads);
  fail(ErrorKind::validation, "unknown command " + name);
}

namespace {

unsigned resolve_threads(int flag) {
  if (flag > 0) return static_cast<unsigned>(flag);
  if (const char* env = std::getenv("MAGTRACE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v <= 4096) return static_cast<unsigned>(v);
    fail(ErrorKind::validation, std::string("MAGTRACE_THREADS must be a positive integer, got \"") + env + "\"");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

int main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"magtrace: semiclassical magnetic trace formula checks"};
  app.require_subcommand(1, 1);
  std::string config_path, out_dir, format;
  int threads_flag = 0;
  const char* names[] = {"spectrum", "trace", "predict", "residual", "dynamics", "katok"};
  const char* help[] = {"dump the eigenvalue window for each N", "compute Y_N over the N sweep",
                        "compute the coefficients c0, c1", "residual report with log-log slope",
                        "closed-orbit invariants and sampled orbits", "Katok monodromy, Maslov and c0 assembly report"};
  for (int i = 0; i < 6; ++i) {
    auto* sub = app.add_subcommand(names[i], help[i]);
    sub->add_option("--config", config_path, "JSON config (schema magtrace/1)")->required();
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    sub->add_option("--format", format, "csv or json (overrides output.format)")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--threads", threads_flag, "worker threads (fallback: MAGTRACE_THREADS)")
        ->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error [validation]: " << e.what() << '\n';
    return 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    RunConfig cfg = load_config(config_path);
    if (!format.empty()) cfg.format = format == "json" ? Format::json : Format::csv;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    const unsigned threads = resolve_threads(threads_flag);
    const CommandResult res = run_command(command, cfg, threads);
    if (cfg.out_dir.empty()) {
      for (const auto& f : res.files) {
        if (res.files.size() > 1) out << "==> " << f.name << " <==\n";
        out << f.content;
      }
    } else {
      write_outputs(cfg.out_dir, res.files);
    }
    err << res.summary << '\n';
    return res.checks_passed ? 0 : 7;
  } catch (const Error& e) {
    err << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace magtrace::cli
