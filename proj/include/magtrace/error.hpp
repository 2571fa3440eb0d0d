#pragma once

#include <stdexcept>
#include <string>

namespace magtrace {

/// Error families. The CLI maps each family to a distinct exit code.
enum class ErrorKind {
  validation,   // bad parameters or configuration
  mane_level,   // hyperbolic energy at or above the Mane level
  resonance,    // near-resonant Katok parameters or degenerate orbit
  integrator,   // ODE step collapse, drift, chart failure
  quadrature,   // quadrature did not converge
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::validation: return "validation";
    case ErrorKind::mane_level: return "mane_level";
    case ErrorKind::resonance: return "resonance";
    case ErrorKind::integrator: return "integrator";
    case ErrorKind::quadrature: return "quadrature";
  }
  return "unknown";
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorKind::validation, what);
}

}  // namespace magtrace
