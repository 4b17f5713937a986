#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace ma1 {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double binomial_se(double p, std::size_t n) {
  return n > 0 ? std::sqrt(p * (1.0 - p) / static_cast<double>(n)) : 0.0;
}

// Population moments (divide by count), so rmse^2 = bias^2 + sd^2 holds as an
// identity for estimator summaries.
struct Moments {
  std::size_t count = 0;
  double mean = 0.0;
  double sd = 0.0;
};

inline Moments moments_of(std::span<const double> values) {
  Moments m;
  m.count = values.size();
  if (m.count == 0) return m;
  for (double v : values) m.mean += v;
  m.mean /= static_cast<double>(m.count);
  double ss = 0.0;
  for (double v : values) ss += (v - m.mean) * (v - m.mean);
  m.sd = std::sqrt(ss / static_cast<double>(m.count));
  return m;
}

// 5%, 25%, 50%, 75%, 95% quantiles with linear interpolation.
inline std::array<double, 5> quantiles5(std::vector<double> values) {
  std::array<double, 5> out{};
  if (values.empty()) return out;
  std::sort(values.begin(), values.end());
  const std::array<double, 5> probs{0.05, 0.25, 0.5, 0.75, 0.95};
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double pos = probs[i] * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    out[i] = values[lo] + frac * (values[hi] - values[lo]);
  }
  return out;
}

// Two-sample Kolmogorov-Smirnov distance.
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) {
      ++i;
    } else {
      ++j;
    }
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

}  // namespace ma1
