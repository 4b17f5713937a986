#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ma1/integrate.hpp"
#include "ma1/rng.hpp"

namespace ma1 {

// Noise families for the MA(1) driver. Every family is standardized so that
// E Z = 0 and E|Z| = 1; the scale parameter of the model is then exactly the
// mean absolute innovation.
enum class Family { Laplace, Gaussian, Uniform, StudentT5 };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::Laplace: return "laplace";
    case Family::Gaussian: return "gaussian";
    case Family::Uniform: return "uniform";
    case Family::StudentT5: return "t5";
  }
  return "?";
}

inline Family family_from_name(const std::string& name) {
  if (name == "laplace" || name == "lap") return Family::Laplace;
  if (name == "gaussian" || name == "gau" || name == "normal") return Family::Gaussian;
  if (name == "uniform" || name == "unif") return Family::Uniform;
  if (name == "t5" || name == "student-t5" || name == "studentt5") return Family::StudentT5;
  throw std::invalid_argument("unknown noise family: " + name);
}

// A noise family together with the two constants that drive the limit theory:
// f0 is the standardized density at zero and c = sqrt(Var(Z) - 1) measures the
// dispersion in excess of the E|Z| = 1 normalization.
struct NoiseSpec {
  Family family;
  double f0;
  double c;
};

namespace detail {

// Raw t(5) density and the standardizing moments, computed by quadrature on a
// compactified axis (x = u/(1-u)); no closed forms are hard-coded here.
inline double t5_raw_density(double x) {
  const double pi = 3.14159265358979323846;
  const double norm = 8.0 / (3.0 * pi * std::sqrt(5.0));  // Gamma(3)/(sqrt(5*pi)*Gamma(5/2))
  const double base = 1.0 + x * x / 5.0;
  return norm / (base * base * base);
}

inline std::pair<double, double> t5_abs_and_second_moment() {
  // E|X| = 2 * int_0^inf x f(x) dx, E X^2 = 2 * int_0^inf x^2 f(x) dx, with
  // the substitution x = u/(1-u) mapping (0,inf) to (0,1).
  auto moment = [](int power) {
    return 2.0 * adaptive_simpson(
                     [power](double u) {
                       if (u >= 1.0) return 0.0;
                       const double x = u / (1.0 - u);
                       const double jac = 1.0 / ((1.0 - u) * (1.0 - u));
                       return std::pow(x, power) * t5_raw_density(x) * jac;
                     },
                     0.0, 1.0, 1e-12);
  };
  return {moment(1), moment(2)};
}

}  // namespace detail

// (f0, c) of the standardized family. Laplace, Gaussian and uniform have
// closed forms; the t(5) constants are computed once by quadrature (absolute
// error below 1e-10) and cached.
inline std::pair<double, double> derive_constants(Family family) {
  const double pi = 3.14159265358979323846;
  switch (family) {
    case Family::Laplace:
      // Unit-scale double exponential: density 1/2 e^{-|z|}, Var = 2.
      return {0.5, 1.0};
    case Family::Gaussian: {
      // N(0, pi/2) has E|Z| = 1; density at zero 1/pi.
      return {1.0 / pi, std::sqrt(pi / 2.0 - 1.0)};
    }
    case Family::Uniform: {
      // Uniform(-2, 2) has E|Z| = 1; Var = 4/3.
      return {0.25, 1.0 / std::sqrt(3.0)};
    }
    case Family::StudentT5: {
      static const std::pair<double, double> cached = [] {
        const auto [m1, m2] = detail::t5_abs_and_second_moment();
        const double f0 = m1 * detail::t5_raw_density(0.0);
        const double c = std::sqrt(m2 / (m1 * m1) - 1.0);
        return std::pair<double, double>{f0, c};
      }();
      return cached;
    }
  }
  throw std::logic_error("unreachable");
}

inline NoiseSpec noise_spec(Family family) {
  const auto [f0, c] = derive_constants(family);
  return NoiseSpec{family, f0, c};
}

// One standardized draw. Sampler recipes are fixed so that a given stream
// state yields bitwise-identical output on any platform.
inline double sample_one(const NoiseSpec& spec, Rng& rng) {
  switch (spec.family) {
    case Family::Laplace: {
      const double u = rng.uniform01();
      return u < 0.5 ? std::log(2.0 * u) : -std::log(2.0 * (1.0 - u));
    }
    case Family::Gaussian:
      return rng.normal() * std::sqrt(3.14159265358979323846 / 2.0);
    case Family::Uniform:
      return 4.0 * rng.uniform01() - 2.0;
    case Family::StudentT5: {
      // t(5) as normal over sqrt(chi^2_5 / 5), then rescaled to E|Z| = 1.
      static const double inv_mean_abs = [] {
        const auto [m1, m2] = detail::t5_abs_and_second_moment();
        (void)m2;
        return 1.0 / m1;
      }();
      const double num = rng.normal();
      double chi2 = 0.0;
      for (int i = 0; i < 5; ++i) {
        const double g = rng.normal();
        chi2 += g * g;
      }
      return num / std::sqrt(chi2 / 5.0) * inv_mean_abs;
    }
  }
  throw std::logic_error("unreachable");
}

inline std::vector<double> sample_noise(const NoiseSpec& spec, std::size_t count, Rng& rng) {
  if (count == 0) throw std::invalid_argument("sample_noise: count must be >= 1");
  std::vector<double> out(count);
  for (auto& z : out) z = sample_one(spec, rng);
  return out;
}

struct Ma1Config {
  double theta0 = 1.0;
  std::size_t n = 50;
  std::uint64_t seed = 0;
};

// One simulated path: n observations plus the n+1 true innovations that
// generated them (kept for diagnostics such as the centered objective).
struct Ma1Sample {
  std::vector<double> x;  // x[i] = X_{i+1}, i = 0..n-1
  std::vector<double> z;  // z[t] = Z_t, t = 0..n
  double theta0;
  NoiseSpec spec;
};

inline Ma1Sample simulate_ma1(const Ma1Config& config, const NoiseSpec& spec, Rng& rng) {
  if (config.n < 2) throw std::invalid_argument("simulate_ma1: n must be >= 2");
  if (!std::isfinite(config.theta0)) throw std::invalid_argument("simulate_ma1: theta0 must be finite");
  Ma1Sample sample;
  sample.theta0 = config.theta0;
  sample.spec = spec;
  sample.z = sample_noise(spec, config.n + 1, rng);
  sample.x.resize(config.n);
  for (std::size_t t = 1; t <= config.n; ++t) {
    sample.x[t - 1] = sample.z[t] - config.theta0 * sample.z[t - 1];
  }
  return sample;
}

inline Ma1Sample simulate_ma1(const Ma1Config& config, const NoiseSpec& spec) {
  Rng rng = make_stream(config.seed, 0, 0);
  return simulate_ma1(config, spec, rng);
}

}  // namespace ma1
