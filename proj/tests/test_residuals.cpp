#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "ma1/asymptotics.hpp"
#include "ma1/noise.hpp"
#include "ma1/residuals.hpp"
#include "oracles.hpp"

using namespace ma1;

namespace {

std::vector<double> random_x(std::size_t n, std::uint64_t seed) {
  Rng rng = make_stream(seed, 400, 0);
  std::vector<double> x(n);
  for (auto& v : x) v = sample_one(noise_spec(Family::Laplace), rng);
  return x;
}

}  // namespace

TEST_CASE("forward recursion decouples at theta = 0", "[residuals]") {
  const std::vector<double> x = random_x(12, 1);
  const std::vector<double> z = residuals_forward(x, 0.0, 5.0);
  CHECK(z[0] == 5.0);
  for (std::size_t t = 1; t <= 12; ++t) CHECK(z[t] == x[t - 1]);
}

TEST_CASE("forward recursion matches the closed-form unrolling", "[residuals]") {
  const std::vector<double> x = random_x(24, 2);
  const std::vector<double> z = residuals_forward(x, 0.5, 0.3);
  const std::vector<double> expected = oracle::forward_unrolled(x, 0.5, 0.3);
  for (std::size_t t = 0; t < z.size(); ++t) {
    CHECK(z[t] == Catch::Approx(expected[t]).margin(1e-12));
  }
}

TEST_CASE("recursion domain checks", "[residuals]") {
  const std::vector<double> x = random_x(8, 3);
  CHECK_THROWS_AS(residuals_forward(x, 1.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(residuals_backward(x, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(residuals_backward(x, 0.5, 0.0), std::invalid_argument);
}

TEST_CASE("backward recursion on zero data is a pure geometric decay", "[residuals]") {
  const std::vector<double> x(10, 0.0);
  const std::vector<double> z = residuals_backward(x, 2.0, 8.0);
  for (std::size_t t = 0; t <= 10; ++t) {
    CHECK(z[t] == Catch::Approx(8.0 * std::pow(2.0, static_cast<double>(t) - 10.0))
                      .epsilon(1e-14));
  }
}

TEST_CASE("backward residuals invert to the observations", "[residuals]") {
  const std::vector<double> x = random_x(40, 4);
  const std::vector<double> z = residuals_backward(x, 1.5, 0.7);
  for (std::size_t t = 1; t <= 40; ++t) {
    const double rebuilt = z[t] - 1.5 * z[t - 1];
    CHECK(rebuilt == Catch::Approx(x[t - 1]).epsilon(1e-10).margin(1e-12));
  }
}

TEST_CASE("backward recursion at theta = 1 equals the forward one", "[residuals]") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const std::vector<double> x = random_x(30, 100 + seed);
    const double z_init = 0.3 * static_cast<double>(seed % 7) - 1.0;
    const std::vector<double> fwd = residuals_forward(x, 1.0, z_init);
    const std::vector<double> bwd = residuals_backward(x, 1.0, z_init);
    for (std::size_t t = 0; t < fwd.size(); ++t) {
      REQUIRE(bwd[t] == Catch::Approx(fwd[t]).margin(1e-9));
    }
  }
}

TEST_CASE("criterion at the truth recovers the innovation sum", "[residuals]") {
  Rng rng = make_stream(21, 0, 0);
  const Ma1Sample s = simulate_ma1({1.0, 80, 21}, noise_spec(Family::Laplace), rng);
  double sum_abs_z = 0.0;
  for (double z : s.z) sum_abs_z += std::fabs(z);
  const ObjectiveValue v = objective(s.x, 1.0, s.z[0]);
  CHECK(v.ell == Catch::Approx(sum_abs_z).epsilon(1e-12));
  CHECK(v.sigma_hat == Catch::Approx(sum_abs_z / 81.0).epsilon(1e-12));
}

TEST_CASE("zero data gives zero criterion on both branches", "[residuals]") {
  const std::vector<double> x(16, 0.0);
  for (double theta : {-0.7, 0.0, 0.3, 1.0, 1.4, 2.5}) {
    CHECK(objective(x, theta, 0.0).ell == 0.0);
  }
}

TEST_CASE("criterion is continuous across the unit root", "[residuals]") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const std::vector<double> x = random_x(25, 300 + seed);
    const double z_init = 0.1 * static_cast<double>(seed % 5);
    const double at_one = objective(x, 1.0, z_init).ell;
    // Branch agreement at the root itself.
    double bwd_sum = 0.0;
    for (double z : residuals_backward(x, 1.0, z_init)) bwd_sum += std::fabs(z);
    REQUIRE(std::fabs(bwd_sum - at_one) <= 1e-9 * std::max(1.0, at_one));
    // Approach from both sides.
    const double left = objective(x, 1.0 - 1e-9, z_init).ell;
    const double right = objective(x, 1.0 + 1e-9, z_init).ell;
    REQUIRE(std::fabs(left - at_one) <= 1e-6 * std::max(1.0, at_one));
    REQUIRE(std::fabs(right - at_one) <= 1e-6 * std::max(1.0, at_one));
  }
}

TEST_CASE("affine slopes are geometric", "[residuals]") {
  const std::vector<double> x = random_x(12, 5);
  const AffineResiduals fwd = affine_decomposition(x, 0.5);
  for (std::size_t t = 0; t <= 12; ++t) {
    CHECK(fwd.b[t] == Catch::Approx(std::pow(0.5, static_cast<double>(t))).epsilon(1e-14));
  }
  const AffineResiduals bwd = affine_decomposition(x, 2.0);
  for (std::size_t t = 0; t <= 12; ++t) {
    CHECK(bwd.b[t] ==
          Catch::Approx(std::pow(2.0, static_cast<double>(t) - 12.0)).epsilon(1e-14));
  }
}

TEST_CASE("affine decomposition reproduces the recursions at probe points", "[residuals]") {
  for (double theta : {0.7, -0.4, 1.0, 1.3, -1.8}) {
    const std::vector<double> x = random_x(20, 600 + static_cast<std::uint64_t>(theta * 10 + 30));
    const AffineResiduals aff = affine_decomposition(x, theta);
    for (double z_init : {-1.0, 0.0, 2.0}) {
      const std::vector<double> z = std::fabs(theta) <= 1.0
                                        ? residuals_forward(x, theta, z_init)
                                        : residuals_backward(x, theta, z_init);
      for (std::size_t t = 0; t < z.size(); ++t) {
        REQUIRE(aff.a[t] + aff.b[t] * z_init ==
                Catch::Approx(z[t]).epsilon(1e-10).margin(1e-12));
      }
    }
  }
}

TEST_CASE("criterion is convex in z_init", "[residuals]") {
  Rng rng = make_stream(31, 0, 0);
  for (int rep = 0; rep < 200; ++rep) {
    const std::vector<double> x = random_x(15, 900 + rep);
    const double theta = 2.0 * rng.uniform01() - 1.0;
    const double z1 = 6.0 * rng.uniform01() - 3.0;
    const double z2 = 6.0 * rng.uniform01() - 3.0;
    const double lhs = objective(x, theta, 0.5 * (z1 + z2)).ell;
    const double rhs = 0.5 * (objective(x, theta, z1).ell + objective(x, theta, z2).ell);
    REQUIRE(lhs <= rhs + 1e-10 * std::max(1.0, rhs));
  }
}

TEST_CASE("centered criterion vanishes identically at the origin", "[residuals]") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng = make_stream(seed, 41, 0);
    const Ma1Sample s = simulate_ma1({1.0, 40, seed}, noise_spec(Family::Laplace), rng);
    CHECK(objective_gap(0.0, 0.0, s) == 0.0);
  }
}

namespace {

// Distribution comparison between the finite-n centered criterion and the
// discretized limit criterion, at matching (f0, c).
struct MeanVar {
  double mean;
  double mean_se;
  double var;
  double var_se;
};

MeanVar mean_var(const std::vector<double>& v) {
  const std::size_t n = v.size();
  double mean = 0.0;
  for (double d : v) mean += d;
  mean /= static_cast<double>(n);
  double m2 = 0.0, m4 = 0.0;
  for (double d : v) {
    const double e = d - mean;
    m2 += e * e;
    m4 += e * e * e * e;
  }
  m2 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);
  MeanVar out;
  out.mean = mean;
  out.mean_se = std::sqrt(m2 / static_cast<double>(n));
  out.var = m2;
  out.var_se = std::sqrt(std::max(0.0, m4 - m2 * m2) / static_cast<double>(n));
  return out;
}

void check_gap_converges(double beta, double alpha) {
  constexpr std::size_t kReps = 3000;
  constexpr std::size_t kN = 8000;
  constexpr std::size_t kM = 2000;
  std::vector<double> finite(kReps), limit(kReps);
  const NoiseSpec spec = noise_spec(Family::Laplace);
  for (std::size_t r = 0; r < kReps; ++r) {
    Rng rng = make_stream(777, 1, r);
    const Ma1Sample s = simulate_ma1({1.0, kN, 777}, spec, rng);
    finite[r] = objective_gap(beta, alpha, s);
    Rng rng2 = make_stream(778, 2, r);
    const BrownianPair pair = simulate_brownian_pair(kM, rng2);
    limit[r] = limit_objective(beta, alpha, pair, spec.f0, spec.c);
  }
  const MeanVar a = mean_var(finite);
  const MeanVar b = mean_var(limit);
  INFO("beta=" << beta << " alpha=" << alpha << " means " << a.mean << " vs " << b.mean
               << ", vars " << a.var << " vs " << b.var);
  CHECK(std::fabs(a.mean - b.mean) <=
        3.0 * std::sqrt(a.mean_se * a.mean_se + b.mean_se * b.mean_se));
  CHECK(std::fabs(a.var - b.var) <=
        3.0 * std::sqrt(a.var_se * a.var_se + b.var_se * b.var_se));
}

}  // namespace

TEST_CASE("centered criterion converges to the limit criterion", "[residuals]") {
  check_gap_converges(-3.0, 1.0);
  check_gap_converges(2.0, 0.0);
}
