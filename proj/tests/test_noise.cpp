#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <vector>

#include "ma1/integrate.hpp"
#include "ma1/noise.hpp"

using namespace ma1;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Quadrature cross-check of the standardized family moments: density at zero,
// mean absolute value and variance, integrating the standardized density
// directly on a compactified axis.
struct StdMoments {
  double f0;
  double mean_abs;
  double variance;
};

StdMoments standardized_moments(double raw_density_at0, double mean_abs_raw,
                                const std::function<double(double)>& raw_density) {
  // Standardized density: f(z) = m * raw(m z), with m = E|X| of the raw law.
  const double m = mean_abs_raw;
  auto f = [&](double z) { return m * raw_density(m * z); };
  auto transformed = [&](const std::function<double(double)>& h) {
    return adaptive_simpson(
        [&](double u) {
          if (u >= 1.0) return 0.0;
          const double z = u / (1.0 - u);
          const double jac = 1.0 / ((1.0 - u) * (1.0 - u));
          return h(z) * jac;
        },
        0.0, 1.0, 1e-12);
  };
  StdMoments out;
  out.f0 = m * raw_density_at0;
  out.mean_abs = 2.0 * transformed([&](double z) { return z * f(z); });
  out.variance = 2.0 * transformed([&](double z) { return z * z * f(z); });
  return out;
}

}  // namespace

TEST_CASE("laplace constants match the closed form exactly", "[noise]") {
  const auto [f0, c] = derive_constants(Family::Laplace);
  CHECK(f0 == 0.5);
  CHECK(c == 1.0);
}

TEST_CASE("gaussian constants: analytic oracle and quadrature", "[noise]") {
  const auto [f0, c] = derive_constants(Family::Gaussian);
  // Standardize N(0,1) by its mean absolute value sqrt(2/pi).
  CHECK(f0 == Catch::Approx(1.0 / kPi).epsilon(1e-12));
  CHECK(c == Catch::Approx(std::sqrt(kPi / 2.0 - 1.0)).epsilon(1e-12));

  const double mean_abs_raw = std::sqrt(2.0 / kPi);
  auto raw = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); };
  const StdMoments m = standardized_moments(raw(0.0), mean_abs_raw, raw);
  CHECK(m.mean_abs == Catch::Approx(1.0).margin(1e-9));
  CHECK(m.f0 == Catch::Approx(f0).margin(1e-10));
  CHECK(std::sqrt(m.variance - 1.0) == Catch::Approx(c).margin(1e-9));
}

TEST_CASE("uniform constants: analytic oracle and quadrature", "[noise]") {
  const auto [f0, c] = derive_constants(Family::Uniform);
  // Uniform(-a, a) has E|Z| = a/2, so the standardized support is (-2, 2).
  CHECK(f0 == Catch::Approx(0.25).epsilon(1e-14));
  CHECK(c == Catch::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
  // Direct moments of Uniform(-2, 2): mean abs 1, variance 4/3.
  const double var = 4.0 / 3.0;
  CHECK(c == Catch::Approx(std::sqrt(var - 1.0)).epsilon(1e-14));
}

TEST_CASE("t(5) constants: analytic oracle and quadrature", "[noise]") {
  const auto [f0, c] = derive_constants(Family::StudentT5);
  // Raw t(5): E|X| = 4 sqrt(5) / (3 pi), Var = 5/3, density at zero
  // 8 / (3 pi sqrt(5)); standardized f0 = 32/(9 pi^2), Var = 3 pi^2 / 16.
  const double mean_abs_raw = 4.0 * std::sqrt(5.0) / (3.0 * kPi);
  const double f0_expected = 32.0 / (9.0 * kPi * kPi);
  const double c_expected = std::sqrt(3.0 * kPi * kPi / 16.0 - 1.0);
  CHECK(f0 == Catch::Approx(f0_expected).margin(1e-10));
  CHECK(c == Catch::Approx(c_expected).margin(1e-10));

  auto raw = [](double x) {
    const double norm = 8.0 / (3.0 * kPi * std::sqrt(5.0));
    const double base = 1.0 + x * x / 5.0;
    return norm / (base * base * base);
  };
  const StdMoments m = standardized_moments(raw(0.0), mean_abs_raw, raw);
  CHECK(m.mean_abs == Catch::Approx(1.0).margin(1e-9));
  CHECK(m.f0 == Catch::Approx(f0).margin(1e-10));
  CHECK(std::sqrt(m.variance - 1.0) == Catch::Approx(c).margin(1e-8));
}

TEST_CASE("sampling is deterministic for a fixed stream", "[noise]") {
  for (Family fam : {Family::Laplace, Family::Gaussian, Family::Uniform, Family::StudentT5}) {
    const NoiseSpec spec = noise_spec(fam);
    Rng a = make_stream(42, 1, 2);
    Rng b = make_stream(42, 1, 2);
    const std::vector<double> za = sample_noise(spec, 3, a);
    const std::vector<double> zb = sample_noise(spec, 3, b);
    REQUIRE(za.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(za[i] == zb[i]);
  }
}

TEST_CASE("every family is standardized to mean absolute value one", "[noise]") {
  constexpr std::size_t kCount = 1000000;
  int purpose = 0;
  for (Family fam : {Family::Laplace, Family::Gaussian, Family::Uniform, Family::StudentT5}) {
    const NoiseSpec spec = noise_spec(fam);
    Rng rng = make_stream(7, 100 + purpose++, 0);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < kCount; ++i) {
      const double a = std::fabs(sample_one(spec, rng));
      sum += a;
      sum_sq += a * a;
    }
    const double mean = sum / kCount;
    const double var = sum_sq / kCount - mean * mean;
    const double se = std::sqrt(var / kCount);
    INFO(family_name(fam));
    CHECK(std::fabs(mean - 1.0) <= 4.0 * se);
    if (fam == Family::Gaussian) CHECK(std::fabs(mean - 1.0) <= 0.005);
  }
}

TEST_CASE("standardized uniform draws stay inside (-2, 2)", "[noise]") {
  const NoiseSpec spec = noise_spec(Family::Uniform);
  Rng rng = make_stream(11, 3, 0);
  for (std::size_t i = 0; i < 1000000; ++i) {
    const double z = sample_one(spec, rng);
    REQUIRE(z > -2.0);
    REQUIRE(z < 2.0);
  }
}

TEST_CASE("simulated paths reconstruct x = z_t - theta0 z_{t-1}", "[noise]") {
  for (double theta0 : {1.0, 0.0, 0.5, -0.8, 1.25}) {
    Rng rng = make_stream(5, 7, static_cast<std::uint64_t>(theta0 * 100 + 200));
    const Ma1Sample s = simulate_ma1({theta0, 64, 5}, noise_spec(Family::Laplace), rng);
    for (std::size_t t = 1; t <= 64; ++t) {
      const double expected = s.z[t] - theta0 * s.z[t - 1];
      REQUIRE(std::fabs(s.x[t - 1] - expected) <= 1e-12 * std::max(1.0, std::fabs(expected)));
    }
  }
}

TEST_CASE("theta0 = 0 reduces to the innovations themselves", "[noise]") {
  Rng rng = make_stream(9, 1, 0);
  const Ma1Sample s = simulate_ma1({0.0, 32, 9}, noise_spec(Family::Gaussian), rng);
  for (std::size_t t = 1; t <= 32; ++t) CHECK(s.x[t - 1] == s.z[t]);
}

TEST_CASE("unit root paths telescope: sum of x equals z_n - z_0", "[noise]") {
  Rng rng = make_stream(13, 2, 0);
  const Ma1Sample s = simulate_ma1({1.0, 128, 13}, noise_spec(Family::Uniform), rng);
  double sum = 0.0;
  for (double v : s.x) sum += v;
  CHECK(sum == Catch::Approx(s.z.back() - s.z.front()).margin(1e-10));
}
