#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "magtrace/cli.hpp"
#include "magtrace/error.hpp"

namespace magtrace::cli {

namespace fs = std::filesystem;

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  out += '\n';
  return out;
}

namespace {

void escape(const std::string& s, std::string& out) {
  out += '"';
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", static_cast<unsigned>(static_cast<unsigned char>(ch)));
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  out += '"';
}

void emit(const nlohmann::ordered_json& j, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string pad_in(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case nlohmann::ordered_json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& item : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in;
        escape(item.key(), out);
        out += ": ";
        emit(item.value(), indent + 1, out);
      }
      out += '\n' + pad + '}';
      return;
    }
    case nlohmann::ordered_json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad_in;
        emit(j[i], indent + 1, out);
      }
      out += '\n' + pad + ']';
      return;
    }
    case nlohmann::ordered_json::value_t::number_float: {
      const double x = j.get<double>();
      if (std::isfinite(x)) {
        out += fmt(x);
      } else {
        escape(fmt(x), out);
      }
      return;
    }
    case nlohmann::ordered_json::value_t::string: escape(j.get<std::string>(), out); return;
    default: out += j.dump(); return;
  }
}

}  // namespace

std::string dump_json(const nlohmann::ordered_json& j) {
  std::string out;
  emit(j, 0, out);
  out += '\n';
  return out;
}

void write_outputs(const std::string& dir, const std::vector<OutputFile>& files) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
  std::vector<fs::path> staged;
  auto cleanup = [&] {
    for (const auto& p : staged) fs::remove(p, ec);
  };
  for (const auto& f : files) {
    const fs::path tmp = fs::path(dir) / ("." + f.name + ".tmp");
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    staged.push_back(tmp);
    out.write(f.content.data(), static_cast<std::streamsize>(f.content.size()));
    out.close();
    if (!out) {
      cleanup();
      throw std::runtime_error("cannot write " + tmp.string());
    }
  }
  for (std::size_t i = 0; i < files.size(); ++i) {
    fs::rename(staged[i], fs::path(dir) / files[i].name, ec);
    if (ec) {
      cleanup();
      throw std::runtime_error("cannot move output into place: " + ec.message());
    }
  }
}

int exit_code_for(const std::exception& e) {
  if (const auto* me = dynamic_cast<const Error*>(&e)) {
    switch (me->kind()) {
      case ErrorKind::validation: return 2;
      case ErrorKind::mane_level: return 3;
      case ErrorKind::resonance: return 4;
      case ErrorKind::integrator: return 5;
      case ErrorKind::quadrature: return 6;
    }
  }
  return 1;
}

}  // namespace magtrace::cli
