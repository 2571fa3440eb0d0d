#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "magtrace/testfn.hpp"

namespace magtrace {

/// E > 1, physical energy calE = c^2/2, speed parameter c = sqrt(E^2 - 1).
struct EnergyLevel {
  double E = 0.0;
  double calE = 0.0;
  double c = 0.0;
  double c2 = 0.0;

  static EnergyLevel from_E(double E);
};

struct TorusModel {
  double B = 2.0 * 3.14159265358979323846;
};

struct SphereModel {
  double R = 1.0;
  double B = 0.5;
  explicit SphereModel(double radius);
};

struct HyperbolicModel {
  double R = 1.0;
  int genus = 2;
  double B = 1.0;
  double maneE = 0.0;
  HyperbolicModel(double radius, int g);
};

using Model = std::variant<TorusModel, SphereModel, HyperbolicModel>;

std::string model_name(const Model& m);

struct SpectrumEntry {
  int N = 0;
  std::int64_t j = 0;
  double nu = 0.0;
  double lambda = 0.0;
  std::int64_t mult = 0;
};

SpectrumEntry torus_levels(int N, std::int64_t j);
SpectrumEntry sphere_levels(const SphereModel& model, int N, std::int64_t j);
SpectrumEntry hyperbolic_levels(const HyperbolicModel& model, int N, std::int64_t j);
/// Alternative closed form (1/R^2)((2j+1)N - j(j+1)) of the hyperbolic level.
double hyperbolic_nu_alt(const HyperbolicModel& model, int N, std::int64_t j);

/// Throws ErrorKind::mane_level when E is at or above the model's Mane level.
void check_energy(const Model& model, const EnergyLevel& level);

struct Window {
  std::vector<SpectrumEntry> entries;  // ascending j
  std::vector<double> shift;           // lambda - E N for each entry
  double radius = 0.0;
  double tail_bound = 0.0;             // bound on |sum over omitted entries of mult phi(lambda - EN)|
};

/// All levels with |lambda - EN| <= phi.radius(tail_tol) plus a certified
/// bound on the contribution of everything left out.
Window enumerate_window(const Model& model, int N, const EnergyLevel& level, const TestFunction& phi, double tail_tol);

}  // namespace magtrace
