#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "magtrace/error.hpp"
#include "magtrace/kernels.hpp"
#include "magtrace/spectra.hpp"
#include "oracles.hpp"

using namespace magtrace;

namespace {
const double kPi = std::numbers::pi;
}

TEST_CASE("energy level bookkeeping") {
  const auto lv = EnergyLevel::from_E(2.0);
  CHECK(lv.c2 == 3.0);
  CHECK(lv.calE == 1.5);
  CHECK(std::abs(lv.c - std::sqrt(3.0)) < 1e-16);
  CHECK_THROWS_AS(EnergyLevel::from_E(1.0), Error);
  CHECK_THROWS_AS(EnergyLevel::from_E(NAN), Error);
}

TEST_CASE("torus Landau levels") {
  auto e = torus_levels(1, 0);
  CHECK(std::abs(e.nu - 2.0 * kPi) < 1e-15);
  CHECK(e.mult == 1);
  e = torus_levels(3, 2);
  CHECK(std::abs(e.nu - 30.0 * kPi) < 1e-13);
  CHECK(e.mult == 3);
  CHECK(std::abs(torus_levels(5, 0).lambda - 7.511053623553617819) < 1e-15);
}

TEST_CASE("sphere Landau levels") {
  const SphereModel half(0.5), unit(1.0);
  auto e = sphere_levels(half, 1, 0);
  CHECK(e.nu == 2.0);
  CHECK(e.mult == 2);
  e = sphere_levels(unit, 2, 1);
  CHECK(e.nu == 5.0);
  CHECK(e.mult == 5);
  CHECK(std::abs(sphere_levels(unit, 1, 0).lambda - std::sqrt(1.5)) < 1e-16);
  CHECK_THROWS_AS(SphereModel(0.0), Error);
}

TEST_CASE("hyperbolic Landau levels and range") {
  const HyperbolicModel hm(1.0, 2);
  auto e = hyperbolic_levels(hm, 2, 0);
  CHECK(e.nu == 2.0);
  CHECK(e.mult == 3);
  e = hyperbolic_levels(hm, 2, 1);
  CHECK(e.nu == 4.0);
  CHECK(e.mult == 1);
  CHECK_THROWS_AS(hyperbolic_levels(hm, 2, 2), Error);
  CHECK(std::abs(hm.maneE - std::sqrt(2.0)) < 1e-16);
  CHECK_THROWS_AS(HyperbolicModel(1.0, 1), Error);
}

TEST_CASE("property: hyperbolic closed forms agree") {
  for (double R : {0.5, 1.0, 2.3}) {
    const HyperbolicModel hm(R, 3);
    for (int N = 1; N <= 60; ++N) {
      for (std::int64_t j = 0; 2 * j + 1 < 2 * N; ++j) {
        const double a = hyperbolic_levels(hm, N, j).nu;
        const double b = hyperbolic_nu_alt(hm, N, j);
        CHECK(std::abs(a - b) <= 1e-13 * std::abs(b));
      }
    }
  }
}

TEST_CASE("property: monotone eigenvalues, lambda > N, positive multiplicities") {
  const SphereModel sm(0.7);
  for (int N : {1, 2, 17, 300}) {
    double prev_t = -1.0, prev_s = -1.0;
    for (std::int64_t j = 0; j <= 10000; ++j) {
      const auto t = torus_levels(N, j);
      const auto s = sphere_levels(sm, N, j);
      CHECK(t.nu > prev_t);
      CHECK(s.nu > prev_s);
      CHECK(t.lambda > N);
      CHECK(s.lambda > N);
      CHECK(t.mult >= 1);
      CHECK(s.mult >= 1);
      prev_t = t.nu;
      prev_s = s.nu;
    }
  }
  for (double R : {0.6, 1.0, 1.9}) {
    const HyperbolicModel hm(R, 2);
    for (int N : {1, 5, 64}) {
      double prev = -1.0;
      std::int64_t prev_mult = -1;
      const double cap = std::sqrt(double(N) * N + (double(N) * N + 0.25) / (R * R));
      for (std::int64_t j = 0; 2 * j + 1 < 2 * N; ++j) {
        const auto e = hyperbolic_levels(hm, N, j);
        CHECK(e.nu > prev);
        CHECK(e.lambda > N);
        CHECK(e.lambda < cap);
        CHECK(e.mult >= 1);
        if (prev_mult >= 0) CHECK(prev_mult - e.mult == 2 * (hm.genus - 1));
        prev = e.nu;
        prev_mult = e.mult;
      }
    }
  }
}

TEST_CASE("Mane level guard") {
  const HyperbolicModel hm(1.0, 2);
  const auto phi = make_gaussian(1.0);
  CHECK_NOTHROW(check_energy(Model{hm}, EnergyLevel::from_E(1.41)));
  try {
    enumerate_window(Model{hm}, 3, EnergyLevel::from_E(1.5), phi, 1e-14);
    FAIL("expected a Mane-level error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::mane_level);
    CHECK(std::string(e.what()).find("1.4142135623730951") != std::string::npos);
  }
  CHECK_THROWS_AS(check_energy(Model{hm}, EnergyLevel::from_E(std::sqrt(2.0))), Error);
}

TEST_CASE("hyperbolic window stays in the integrable range") {
  const auto w = enumerate_window(Model{HyperbolicModel(1.0, 2)}, 3, EnergyLevel::from_E(1.2), make_gaussian(1.0), 1e-14);
  CHECK(w.entries.size() <= 3);
  for (const auto& e : w.entries) CHECK(e.j <= 2);
}

TEST_CASE("torus window against a brute-force long sum") {
  const auto phi = make_gaussian(1.0);
  const auto w = enumerate_window(Model{TorusModel{}}, 10, EnergyLevel::from_E(2.0), phi, 1e-14);
  CHECK(w.tail_bound < 1e-12);
  for (std::size_t i = 0; i < w.entries.size(); ++i) CHECK(std::abs(w.shift[i]) <= w.radius);
  long double windowed = 0.0L;
  for (std::size_t i = 0; i < w.entries.size(); ++i) windowed += w.entries[i].mult * std::exp(-(long double)w.shift[i] * w.shift[i] / 2);
  const long double full = oracle::torus_y(10, 2.0L, 1.0L);
  CHECK(std::abs(double(full - windowed)) <= w.tail_bound + 1e-14);
}

TEST_CASE("property: window completeness across geometries") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 12; ++trial) {
    const int N = 1 + static_cast<int>(U(rng) * 120);
    const double s = 0.5 + U(rng);
    const auto phi = make_gaussian(s);
    const double tol = 1e-10;
    {
      const double E = 1.05 + 2.0 * U(rng);
      const auto w = enumerate_window(Model{TorusModel{}}, N, EnergyLevel::from_E(E), phi, tol);
      long double sum = 0.0L;
      for (std::size_t i = 0; i < w.entries.size(); ++i) sum += w.entries[i].mult * oracle::gauss(w.shift[i], s);
      CHECK(std::abs(double(oracle::torus_y(N, E, s, 200000) - sum)) <= w.tail_bound * (1 + 1e-9) + 1e-12 * double(sum));
    }
    {
      const double E = 1.05 + 2.0 * U(rng), R = 0.3 + U(rng);
      const auto w = enumerate_window(Model{SphereModel(R)}, N, EnergyLevel::from_E(E), phi, tol);
      long double sum = 0.0L;
      for (std::size_t i = 0; i < w.entries.size(); ++i) sum += w.entries[i].mult * oracle::gauss(w.shift[i], s);
      CHECK(std::abs(double(oracle::sphere_y(N, R, E, s, 200000) - sum)) <= w.tail_bound * (1 + 1e-9) + 1e-12 * double(sum));
    }
    {
      const double R = 0.5 + U(rng);
      const double mane = std::sqrt(1.0 / (R * R) + 1.0);
      const double E = 1.02 + (mane - 1.05) * U(rng);
      const auto w = enumerate_window(Model{HyperbolicModel(R, 2)}, N, EnergyLevel::from_E(E), phi, tol);
      long double sum = 0.0L;
      for (std::size_t i = 0; i < w.entries.size(); ++i) sum += w.entries[i].mult * oracle::gauss(w.shift[i], s);
      CHECK(std::abs(double(oracle::hyperbolic_y(N, R, 2, E, s) - sum)) <= w.tail_bound * (1 + 1e-9) + 1e-12 * double(sum));
    }
  }
}

TEST_CASE("scalar and AVX2 kernels are bit-identical") {
  if (!kernels::isa_available(kernels::Isa::avx2)) {
    MESSAGE("AVX2 not available on this CPU; equivalence test skipped");
    return;
  }
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> U(0.0, 1e7);
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 17u, 1000u, 4099u}) {
    std::vector<double> nu(n), l1(n), s1(n), l2(n), s2(n);
    for (auto& v : nu) v = U(rng);
    const double N = 1234.0;
    kernels::shifted_sqrt(kernels::Isa::scalar, nu.data(), n, N * N, 1.7 * N, l1.data(), s1.data());
    kernels::shifted_sqrt(kernels::Isa::avx2, nu.data(), n, N * N, 1.7 * N, l2.data(), s2.data());
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::memcmp(&l1[i], &l2[i], sizeof(double)) == 0);
      CHECK(std::memcmp(&s1[i], &s2[i], sizeof(double)) == 0);
    }
  }
}

TEST_CASE("kernel selection honours MAGTRACE_KERNEL") {
  const char* env = std::getenv("MAGTRACE_KERNEL");
  if (env && std::string(env) == "scalar") {
    CHECK(kernels::active_isa() == kernels::Isa::scalar);
  } else if (kernels::isa_available(kernels::Isa::avx2)) {
    CHECK(kernels::active_isa() == kernels::Isa::avx2);
  }
  CHECK(kernels::isa_available(kernels::Isa::scalar));
}
