#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "magtrace/asymptotics.hpp"
#include "magtrace/dynamics.hpp"
#include "magtrace/spectra.hpp"
#include "magtrace/testfn.hpp"

namespace magtrace::cli {

enum class Format { csv, json };

struct Tolerances {
  double tail_tol = 1e-16;
  double ode_tol = 1e-11;
  int k_max = 0;
  double k_tol = 1e-16;
  double resonance_margin = 1e-6;
  double holonomy_tol = 1e-9;
};

struct RunConfig {
  GeometrySpec geometry;
  double E = 0.0;
  TestFunction phi;
  std::vector<int> N;
  Tolerances tol;
  std::vector<int> katok_k{1, -1, 2, -2, 3, -3};
  std::uint64_t seed = 0;
  std::size_t path_samples = 256;
  std::size_t mc_samples = 200000;
  std::string out_dir;
  Format format = Format::csv;

  /// Model for the spectral side; nullopt for katok.
  std::optional<Model> model() const;
  KSumControl ksum() const;
};

/// Parses and validates a "magtrace/1" config. Throws Error(validation) on
/// malformed input or unknown keys, Error(mane_level) for a hyperbolic E at
/// or above the Mane level.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

struct OutputFile {
  std::string name;
  std::string content;
};

struct CommandResult {
  std::vector<OutputFile> files;
  std::string summary;  // one line for stderr
  bool checks_passed = true;
};

CommandResult cmd_spectrum(const RunConfig& cfg, unsigned threads);
CommandResult cmd_trace(const RunConfig& cfg, unsigned threads);
CommandResult cmd_predict(const RunConfig& cfg, unsigned threads);
CommandResult cmd_residual(const RunConfig& cfg, unsigned threads);
CommandResult cmd_dynamics(const RunConfig& cfg, unsigned threads);
CommandResult cmd_katok(const RunConfig& cfg, unsigned threads);

CommandResult run_command(const std::string& name, const RunConfig& cfg, unsigned threads);

// Fixed-format writers.
std::string fmt(double x);
std::string csv_join(const std::vector<std::string>& cells);
/// Serializes with every double at 17 significant digits, keys in insertion order.
std::string dump_json(const nlohmann::ordered_json& j);

/// Writes every file into dir; nothing is left behind if any write fails.
void write_outputs(const std::string& dir, const std::vector<OutputFile>& files);

int exit_code_for(const std::exception& e);

/// Entry point. Returns the process exit code.
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace magtrace::cli
