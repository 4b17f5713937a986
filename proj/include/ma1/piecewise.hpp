#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace ma1 {

// Piecewise-linear representation of g(u) = sum_t |a_t + b_t u|. Terms with
// b_t = 0 contribute constants; every other term contributes a breakpoint at
// -a_t/b_t with weight |b_t|. On segment k (between knot k-1 and knot k) the
// function is p[k] + q[k] u, and q is strictly increasing across knots from
// -sum|b| to +sum|b|. This single structure serves both the inner minimizer
// (the weighted median of the breakpoints) and the closed-form integral of
// exp(-g(u)/sigma) over the real line.
class AbsSumSegments {
 public:
  static AbsSumSegments build(std::span<const double> a, std::span<const double> b) {
    AbsSumSegments s;
    const std::size_t n = a.size();
    struct Term {
      double u;
      double weight;
      double signed_a;  // sign(b) * a
    };
    std::vector<Term> terms;
    terms.reserve(n);
    double p0 = 0.0;
    double q0 = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      if (b[t] == 0.0) {
        p0 += std::fabs(a[t]);
        continue;
      }
      const double sb = b[t] > 0.0 ? 1.0 : -1.0;
      terms.push_back({-a[t] / b[t], std::fabs(b[t]), sb * a[t]});
      p0 -= sb * a[t];
      q0 -= std::fabs(b[t]);
    }
    if (terms.empty()) {
      throw std::logic_error("AbsSumSegments: no nonzero slopes");
    }
    std::sort(terms.begin(), terms.end(),
              [](const Term& lhs, const Term& rhs) { return lhs.u < rhs.u; });
    const std::size_t k = terms.size();
    s.knot_.resize(k);
    s.p_.resize(k + 1);
    s.q_.resize(k + 1);
    s.p_[0] = p0;
    s.q_[0] = q0;
    for (std::size_t i = 0; i < k; ++i) {
      s.knot_[i] = terms[i].u;
      s.p_[i + 1] = s.p_[i] + 2.0 * terms[i].signed_a;
      s.q_[i + 1] = s.q_[i] + 2.0 * terms[i].weight;
    }
    return s;
  }

  std::size_t knot_count() const { return knot_.size(); }

  // g evaluated through the linear forms (exact up to the accumulated p/q
  // rounding, which stays ~1e-13 relative for n up to 1e4).
  double value_linear(double u) const {
    const auto it = std::upper_bound(knot_.begin(), knot_.end(), u);
    const std::size_t k = static_cast<std::size_t>(it - knot_.begin());
    return p_[k] + q_[k] * u;
  }

  // Exact minimizer of g: the knot where the slope crosses zero, or the
  // midpoint of the flat segment when the slope hits zero exactly.
  double min_point() const {
    const auto it = std::lower_bound(q_.begin(), q_.end(), 0.0);
    const std::size_t k = static_cast<std::size_t>(it - q_.begin());
    // q_[0] < 0 and q_.back() > 0, so 1 <= k <= knot count.
    if (q_[k] > 0.0) return knot_[k - 1];
    return 0.5 * (knot_[k - 1] + knot_[k]);
  }

  // log of integral exp(-g(u)/sigma) du over the real line. Each segment is
  // an elementary exponential integral; segments are combined by a streaming
  // log-sum-exp so nothing ever leaves log space.
  double log_integral(double sigma) const {
    const std::size_t k = knot_.size();
    double lse_max = -std::numeric_limits<double>::infinity();
    double lse_sum = 0.0;
    auto push = [&](double log_term) {
      if (log_term == -std::numeric_limits<double>::infinity()) return;
      if (log_term <= lse_max) {
        lse_sum += std::exp(log_term - lse_max);
      } else {
        lse_sum = lse_sum * std::exp(lse_max - log_term) + 1.0;
        lse_max = log_term;
      }
    };

    // Left tail: slope q_[0] < 0, integrand decays toward -infinity.
    push(std::log(-sigma / q_[0]) - (p_[0] + q_[0] * knot_[0]) / sigma);
    // Right tail: slope q_[k] > 0.
    push(std::log(sigma / q_[k]) - (p_[k] + q_[k] * knot_[k - 1]) / sigma);

    for (std::size_t seg = 1; seg < k; ++seg) {
      const double lo = knot_[seg - 1];
      const double hi = knot_[seg];
      if (!(hi > lo)) continue;
      const double e_lo = -(p_[seg] + q_[seg] * lo) / sigma;
      const double e_hi = -(p_[seg] + q_[seg] * hi) / sigma;
      const double e_top = std::max(e_lo, e_hi);
      if (e_top == -std::numeric_limits<double>::infinity()) continue;
      const double drop = std::min(e_lo, e_hi) - e_top;  // <= 0
      if (q_[seg] == 0.0 || drop > -1e-12) {
        push(e_top + std::log(hi - lo));
      } else {
        push(std::log(sigma / std::fabs(q_[seg])) + e_top + std::log1p(-std::exp(drop)));
      }
    }
    return lse_max + std::log(lse_sum);
  }

 private:
  std::vector<double> knot_;
  std::vector<double> p_, q_;
};

}  // namespace ma1
