#pragma once

#include <string>
#include <vector>

#include "magtrace/dynamics.hpp"
#include "magtrace/spectra.hpp"
#include "magtrace/testfn.hpp"
#include "magtrace/tracesum.hpp"

namespace magtrace {

/// k_max = 0 selects the smallest truncation whose certified tail is below tol.
struct KSumControl {
  int k_max = 0;
  double tol = 1e-16;
  double resonance_margin = 1e-6;
};

struct CoefficientPrediction {
  int N = 0;
  cplx c0 = 0.0;
  cplx c1 = 0.0;
  double d = 1.0;
  int k_max = 0;
  double c0_tail = 0.0;  // bound on the omitted k-terms of c0
  double c1_tail = 0.0;
  cplx c0_k0 = 0.0;      // k = 0 term of c0
  double c0_abs_sum = 0.0;  // sum of |terms| of c0
  double c1_abs_sum = 0.0;
};

CoefficientPrediction torus_c01(int N, const EnergyLevel& level, const TestFunction& phi, const KSumControl& ctl);
CoefficientPrediction sphere_c01(int N, const SphereModel& model, const EnergyLevel& level, const TestFunction& phi,
                                 const KSumControl& ctl);
/// Specialized R = 1/2 form of the sphere coefficients.
CoefficientPrediction sphere_c01_half(int N, const EnergyLevel& level, const TestFunction& phi,
                                      const KSumControl& ctl);
CoefficientPrediction hyperbolic_c01(int N, const HyperbolicModel& model, const EnergyLevel& level,
                                     const TestFunction& phi, const KSumControl& ctl);
CoefficientPrediction predict(const Model& model, int N, const EnergyLevel& level, const TestFunction& phi,
                              const KSumControl& ctl);

/// c0 = (2 pi)^{-n} phihat(0) Vol(X_E).
cplx general_c0_volume(cplx phi_hat_0, double volXE, int n);

/// c0 = Tsharp e^{i pi m/4} / (2 pi |I-P|^{1/2}) e^{-i N S} phihat(Tgamma).
cplx general_c0_nondegenerate(double Tsharp, int m, double S, double detIminusP, double Tgamma, cplx phi_hat_at_T,
                              int N, double resonance_margin = 1e-6);

struct KatokTerm {
  int k = 0;
  Orientation branch = Orientation::plus;
  int maslov = 0;        // m_{k,+-}
  int m_assembled = 0;   // index fed to the nondegenerate formula
  double Tgamma = 0.0;
  double S = 0.0;
  double detIminusP = 0.0;
  cplx closed_form = 0.0;
  cplx assembled = 0.0;
  double rel_dev = 0.0;
};

struct KatokPrediction {
  CoefficientPrediction pred;
  std::string regime;  // "zero_period", "nonzero_period" or "empty"
  std::vector<KatokTerm> terms;
  double max_rel_dev = 0.0;
};

/// Katok example at E = sqrt 2. For the zero-period window c0 comes from the
/// Liouville volume; otherwise every (k, branch) term is evaluated both from
/// the closed form and assembled from the orbit data.
KatokPrediction katok_c0(int N, double eps, const TestFunction& phi, const KSumControl& ctl);

/// Same assembly for an explicit k list, independent of phi's support.
std::vector<KatokTerm> katok_terms(int N, double eps, const TestFunction& phi, const std::vector<int>& ks,
                                   double resonance_margin = 1e-6);

struct ResidualRow {
  int N = 0;
  cplx Y = 0.0;
  cplx c0 = 0.0;
  cplx c1 = 0.0;
  cplx r = 0.0;
  double scaled = 0.0;  // |r| N^{2-d}
  double floor = 0.0;   // noise floor for this N
  double tail = 0.0;    // trace tail plus k-sum tails
};

struct ResidualReport {
  std::vector<ResidualRow> rows;
  double slope = 0.0;
  double max_scaled = 0.0;
  double median_scaled = 0.0;
  std::size_t fit_points = 0;
  bool converged_below_tolerance = false;
  std::string status;
};

ResidualReport residual_report(const std::vector<TraceValue>& traces, const std::vector<CoefficientPrediction>& preds);

struct ClusterRow {
  int N = 0;
  std::int64_t jstar = 0;
  std::int64_t mult = 0;
  double lambda = 0.0;
  double lambda_closed = 0.0;
  double rel_diff = 0.0;
  double scaled = 0.0;  // N |lambda - EN - pi/E|
  bool nearest = false;
};

struct ClusterReport {
  int m = 0;
  std::vector<ClusterRow> rows;
  double max_scaled = 0.0;
  double last_scaled = 0.0;
  double limit = 0.0;  // -pi^2/(2 E^3)
  bool exact = false;
  bool bounded = false;
};

/// E must satisfy E^2 - 1 = 4 pi m for a positive integer m.
ClusterReport torus_cluster_check(const EnergyLevel& level, const std::vector<int>& N_list);

struct PoissonReport {
  cplx lhs = 0.0;
  cplx rhs = 0.0;
  double lhs_tail = 0.0;
  double rhs_tail = 0.0;
  double diff = 0.0;
  int n_terms = 0;
  int k_terms = 0;
};

/// sum_n f(nP + t) against sum_k (1/P) fhat(2 pi k/P) e^{2 pi i k t/P}.
PoissonReport poisson_check(const TestFunction& f, double P, double t, double tol);

}  // namespace magtrace
