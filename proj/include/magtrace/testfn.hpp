#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace magtrace {

using cplx = std::complex<double>;

enum class FnKind { gaussian, gaussian_modulated, fourier_bump };

const char* to_string(FnKind kind);

/// One elementary Schwartz function with a complex weight.
///   gaussian            phi(x) = exp(-x^2/(2 s^2))
///   gaussian_modulated  phi(x) = exp(-x^2/(2 s^2)) exp(i b x)
///   fourier_bump        phihat(xi) = exp(-1/(1-t^2)), t = (xi - tau0)/w
struct FnTerm {
  FnKind kind = FnKind::gaussian;
  double s = 1.0;
  double b = 0.0;
  double tau0 = 0.0;
  double w = 1.0;
  cplx coef = 1.0;
};

/// A finite linear combination of elementary terms. Transform convention:
/// phihat(xi) = int phi(x) exp(-i xi x) dx, inverse with 1/(2 pi).
/// Immutable after construction; every evaluator is pure.
class TestFunction {
 public:
  TestFunction() = default;
  explicit TestFunction(std::vector<FnTerm> terms);

  cplx operator()(double x) const;
  cplx hat(double xi) const;
  /// order 0, 1 or 2 derivative of phihat.
  cplx hat_derivative(double xi, int order) const;

  /// Upper bound on |phi(y)| valid for every |y| >= x (nonincreasing in x).
  double envelope(double x) const;
  /// Smallest radius such that envelope(radius) <= tol.
  double radius(double tol) const;
  /// Upper bound on int_r^inf (A + B x + C x^2) d(-envelope)(x), the
  /// integration-by-parts form of a counting-weighted tail sum.
  double tail_integral(double r, double A, double B, double C) const;
  /// Upper bound on |phihat^(order)(xi)| valid for every |xi| >= x.
  double hat_envelope(double x, int order) const;

  bool is_real() const;
  /// Union hull of the open support of phihat; nullopt when unbounded.
  std::optional<std::pair<double, double>> hat_support() const;
  /// True when phihat may be nonzero somewhere in (lo, hi), or at lo when lo == hi.
  bool hat_may_be_nonzero_in(double lo, double hi) const;

  const std::vector<FnTerm>& terms() const { return terms_; }
  std::string describe() const;

  TestFunction operator*(cplx a) const;
  TestFunction operator+(const TestFunction& other) const;

 private:
  std::vector<FnTerm> terms_;
};

TestFunction make_gaussian(double s);
TestFunction make_gaussian_modulated(double s, double b);
TestFunction make_fourier_bump(double tau0, double w);

namespace bump {
/// g(t) = exp(-1/(1-t^2)) and its derivatives up to order 8 at t (zero for |t| >= 1).
void jet(double t, double* out, int max_order);
/// int_{-1}^{1} |g^(m)(t)| dt, m = 0..8, computed once.
double abs_integral(int m);
/// sup_t |g^(m)(t)|, m = 0..2.
double sup_abs(int m);
}  // namespace bump

struct PairReport {
  std::vector<double> grid;
  std::vector<double> deviation;
  double max_deviation = 0.0;
  double truncation_radius = 0.0;
  bool pass = false;
};

/// Compares f.hat on the grid against quadrature of int phi(x) e^{-i xi x} dx.
/// `hat_override`, when given, replaces f.hat (used to inject faults).
PairReport validate_pair(const TestFunction& f, const std::vector<double>& grid, double tol,
                         const std::function<cplx(double)>* hat_override = nullptr);

}  // namespace magtrace
