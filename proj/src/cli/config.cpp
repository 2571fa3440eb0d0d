#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

#include "magtrace/cli.hpp"
#include "magtrace/error.hpp"

namespace magtrace::cli {

namespace {

using json = nlohmann::json;

void only_keys(const json& obj, const char* where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(ErrorKind::validation, std::string(where) + " must be a JSON object");
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || item.key() == a;
    if (!ok) fail(ErrorKind::validation, "unknown key \"" + item.key() + "\" in " + where);
  }
}

double number(const json& obj, const char* key, const char* where) {
  if (!obj.contains(key)) fail(ErrorKind::validation, std::string(where) + "." + key + " is required");
  const json& v = obj.at(key);
  if (!v.is_number()) fail(ErrorKind::validation, std::string(where) + "." + key + " must be a number");
  return v.get<double>();
}

double number_or(const json& obj, const char* key, const char* where, double dflt) {
  return obj.contains(key) ? number(obj, key, where) : dflt;
}

std::int64_t integer(const json& v, const std::string& what) {
  if (!v.is_number_integer()) fail(ErrorKind::validation, what + " must be an integer");
  return v.get<std::int64_t>();
}

std::int64_t integer_or(const json& obj, const char* key, const char* where, std::int64_t dflt) {
  return obj.contains(key) ? integer(obj.at(key), std::string(where) + "." + key) : dflt;
}

cplx coefficient(const json& obj) {
  if (!obj.contains("coef")) return 1.0;
  const json& c = obj.at("coef");
  if (c.is_number()) return c.get<double>();
  if (c.is_array() && c.size() == 2 && c[0].is_number() && c[1].is_number()) {
    return {c[0].get<double>(), c[1].get<double>()};
  }
  fail(ErrorKind::validation, "test_function coef must be a number or [re, im]");
}

FnTerm parse_term(const json& obj) {
  if (!obj.is_object() || !obj.contains("kind") || !obj.at("kind").is_string()) {
    fail(ErrorKind::validation, "test_function term needs a string \"kind\"");
  }
  const std::string kind = obj.at("kind").get<std::string>();
  FnTerm t;
  if (kind == "gaussian") {
    only_keys(obj, "test_function", {"kind", "s", "coef"});
    t.kind = FnKind::gaussian;
    t.s = number_or(obj, "s", "test_function", 1.0);
  } else if (kind == "gaussian_modulated") {
    only_keys(obj, "test_function", {"kind", "s", "b", "coef"});
    t.kind = FnKind::gaussian_modulated;
    t.s = number_or(obj, "s", "test_function", 1.0);
    t.b = number(obj, "b", "test_function");
  } else if (kind == "fourier_bump") {
    only_keys(obj, "test_function", {"kind", "tau0", "w", "coef"});
    t.kind = FnKind::fourier_bump;
    t.tau0 = number(obj, "tau0", "test_function");
    t.w = number(obj, "w", "test_function");
  } else {
    fail(ErrorKind::validation, "unknown test_function kind \"" + kind + "\"");
  }
  t.coef = coefficient(obj);
  return t;
}

TestFunction parse_test_function(const json& j) {
  std::vector<FnTerm> terms;
  if (j.is_array()) {
    if (j.empty()) fail(ErrorKind::validation, "test_function term list is empty");
    for (const auto& item : j) terms.push_back(parse_term(item));
  } else {
    terms.push_back(parse_term(j));
  }
  // Route through the factories so their parameter checks apply.
  TestFunction out;
  bool first = true;
  for (const auto& t : terms) {
    TestFunction f;
    switch (t.kind) {
      case FnKind::gaussian: f = make_gaussian(t.s); break;
      case FnKind::gaussian_modulated: f = make_gaussian_modulated(t.s, t.b); break;
      case FnKind::fourier_bump: f = make_fourier_bump(t.tau0, t.w); break;
    }
    require(std::isfinite(t.coef.real()) && std::isfinite(t.coef.imag()), "test_function coef must be finite");
    f = f * t.coef;
    out = first ? f : out + f;
    first = false;
  }
  return out;
}

GeometrySpec parse_geometry(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    fail(ErrorKind::validation, "geometry needs a string \"kind\"");
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "torus") {
    only_keys(j, "geometry", {"kind"});
    return GeometrySpec::torus();
  }
  if (kind == "sphere") {
    only_keys(j, "geometry", {"kind", "R"});
    return GeometrySpec::sphere(number(j, "R", "geometry"));
  }
  if (kind == "hyperbolic") {
    only_keys(j, "geometry", {"kind", "R", "genus"});
    const std::int64_t g = integer_or(j, "genus", "geometry", 2);
    require(g >= 2 && g <= 1000000, "hyperbolic genus must be an integer >= 2");
    return GeometrySpec::hyperbolic(number_or(j, "R", "geometry", 1.0), static_cast<int>(g));
  }
  if (kind == "katok") {
    only_keys(j, "geometry", {"kind", "eps"});
    return GeometrySpec::katok(number(j, "eps", "geometry"));
  }
  fail(ErrorKind::validation, "unknown geometry kind \"" + kind + "\"");
}

std::vector<int> parse_N(const json& j) {
  std::vector<std::int64_t> raw;
  if (j.is_array()) {
    for (const auto& v : j) raw.push_back(integer(v, "N entry"));
  } else if (j.is_object()) {
    only_keys(j, "N", {"start", "stop", "step"});
    if (!j.contains("start") || !j.contains("stop")) fail(ErrorKind::validation, "N range needs start and stop");
    const std::int64_t a = integer(j.at("start"), "N.start");
    const std::int64_t b = integer(j.at("stop"), "N.stop");
    const std::int64_t s = integer_or(j, "step", "N", 1);
    require(s >= 1, "N.step must be positive");
    require(b >= a, "N.stop must not be below N.start");
    require((b - a) / s < 10000000, "N range is too long");
    for (std::int64_t n = a; n <= b; n += s) raw.push_back(n);
  } else {
    fail(ErrorKind::validation, "N must be a list or a {start, stop, step} range");
  }
  require(!raw.empty(), "N list is empty");
  std::vector<int> out;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    require(raw[i] >= 1 && raw[i] <= 100000000, "N values must be positive integers");
    require(i == 0 || raw[i] > raw[i - 1], "N values must be strictly ascending");
    out.push_back(static_cast<int>(raw[i]));
  }
  return out;
}

}  // namespace

std::optional<Model> RunConfig::model() const {
  switch (geometry.kind) {
    case GeometryKind::torus: return Model{TorusModel{}};
    case GeometryKind::sphere: return Model{SphereModel(geometry.R)};
    case GeometryKind::hyperbolic: return Model{HyperbolicModel(geometry.R, geometry.genus)};
    case GeometryKind::katok: return std::nullopt;
  }
  return std::nullopt;
}

KSumControl RunConfig::ksum() const {
  KSumControl c;
  c.k_max = tol.k_max;
  c.tol = tol.k_tol;
  c.resonance_margin = tol.resonance_margin;
  return c;
}

RunConfig parse_config(const json& j) {
  only_keys(j, "config",
            {"schema", "geometry", "E", "test_function", "N", "tolerances", "katok", "dynamics", "seed", "output"});
  if (!j.contains("schema") || j.at("schema") != "magtrace/1") {
    fail(ErrorKind::validation, "config must declare \"schema\": \"magtrace/1\"");
  }
  RunConfig cfg;
  if (!j.contains("geometry")) fail(ErrorKind::validation, "config.geometry is required");
  cfg.geometry = parse_geometry(j.at("geometry"));
  cfg.E = number(j, "E", "config");
  const EnergyLevel level = EnergyLevel::from_E(cfg.E);
  cfg.phi = j.contains("test_function") ? parse_test_function(j.at("test_function")) : make_gaussian(1.0);
  if (!j.contains("N")) fail(ErrorKind::validation, "config.N is required");
  cfg.N = parse_N(j.at("N"));

  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    only_keys(t, "tolerances", {"tail_tol", "ode_tol", "k_max", "k_tol", "resonance_margin", "holonomy_tol"});
    cfg.tol.tail_tol = number_or(t, "tail_tol", "tolerances", cfg.tol.tail_tol);
    cfg.tol.ode_tol = number_or(t, "ode_tol", "tolerances", cfg.tol.ode_tol);
    const std::int64_t km = integer_or(t, "k_max", "tolerances", 0);
    require(km >= 0 && km <= 100000, "tolerances.k_max must lie in [0, 100000]");
    cfg.tol.k_max = static_cast<int>(km);
    cfg.tol.k_tol = number_or(t, "k_tol", "tolerances", cfg.tol.k_tol);
    cfg.tol.resonance_margin = number_or(t, "resonance_margin", "tolerances", cfg.tol.resonance_margin);
    cfg.tol.holonomy_tol = number_or(t, "holonomy_tol", "tolerances", cfg.tol.holonomy_tol);
  }
  for (double v : {cfg.tol.tail_tol, cfg.tol.ode_tol, cfg.tol.k_tol, cfg.tol.resonance_margin, cfg.tol.holonomy_tol}) {
    require(std::isfinite(v) && v > 0.0, "tolerances must be positive and finite");
  }
  require(cfg.tol.ode_tol >= 1e-15, "tolerances.ode_tol must be at least 1e-15");

  if (j.contains("katok")) {
    const json& k = j.at("katok");
    only_keys(k, "katok", {"k"});
    if (k.contains("k")) {
      if (!k.at("k").is_array() || k.at("k").empty()) fail(ErrorKind::validation, "katok.k must be a nonempty list");
      cfg.katok_k.clear();
      for (const auto& v : k.at("k")) {
        const std::int64_t kk = integer(v, "katok.k entry");
        require(kk != 0 && std::abs(kk) <= 1000, "katok.k entries must be nonzero with |k| <= 1000");
        cfg.katok_k.push_back(static_cast<int>(kk));
      }
    }
  }
  if (j.contains("dynamics")) {
    const json& d = j.at("dynamics");
    only_keys(d, "dynamics", {"path_samples", "mc_samples"});
    const std::int64_t ps = integer_or(d, "path_samples", "dynamics", 256);
    const std::int64_t ms = integer_or(d, "mc_samples", "dynamics", 200000);
    require(ps >= 1 && ps <= 10000000, "dynamics.path_samples must lie in [1, 1e7]");
    require(ms >= 2 && ms <= 1000000000, "dynamics.mc_samples must lie in [2, 1e9]");
    cfg.path_samples = static_cast<std::size_t>(ps);
    cfg.mc_samples = static_cast<std::size_t>(ms);
  }
  if (j.contains("seed")) {
    const json& s = j.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
      fail(ErrorKind::validation, "seed must be a nonnegative integer");
    }
    cfg.seed = s.get<std::uint64_t>();
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    only_keys(o, "output", {"dir", "format"});
    if (o.contains("dir")) {
      if (!o.at("dir").is_string()) fail(ErrorKind::validation, "output.dir must be a string");
      cfg.out_dir = o.at("dir").get<std::string>();
    }
    if (o.contains("format")) {
      const json& f = o.at("format");
      if (f == "csv") {
        cfg.format = Format::csv;
      } else if (f == "json") {
        cfg.format = Format::json;
      } else {
        fail(ErrorKind::validation, "output.format must be \"csv\" or \"json\"");
      }
    }
  }

  // Cross-module preconditions, checked before any computation.
  if (const auto m = cfg.model()) check_energy(*m, level);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::validation, "cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    fail(ErrorKind::validation, std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace magtrace::cli
