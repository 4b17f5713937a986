#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "ma1/optimize.hpp"
#include "ma1/parallel.hpp"
#include "ma1/rng.hpp"
#include "ma1/stats.hpp"

namespace ma1 {

// Coupled Brownian increments on a uniform grid of [0,1]. All functionals
// below use left-endpoint (Ito) sums: integral f dW ~ sum f(t_{j-1}) dW_j and
// integral f ds ~ sum f(t_{j-1})/m, with t_j = j/m.
struct BrownianPair {
  std::size_t m = 0;
  std::vector<double> dW;
  std::vector<double> dV;
};

inline void fill_brownian_pair(BrownianPair& pair, std::size_t m, Rng& rng) {
  pair.m = m;
  pair.dW.resize(m);
  pair.dV.resize(m);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (std::size_t j = 0; j < m; ++j) pair.dW[j] = rng.normal() * scale;
  for (std::size_t j = 0; j < m; ++j) pair.dV[j] = rng.normal() * scale;
}

inline BrownianPair simulate_brownian_pair(std::size_t m, Rng& rng) {
  if (m < 1) throw std::invalid_argument("simulate_brownian_pair: m must be >= 1");
  BrownianPair pair;
  fill_brownian_pair(pair, m, rng);
  return pair;
}

struct AsymptoticConfig {
  std::size_t m = 10000;     // grid size (desk runs use 2000)
  std::size_t reps = 100000; // replicates (desk runs use 20000)
  double f0 = 0.5;
  double c = 1.0;
  double beta_max = 25.0;
  double grid_step = 0.05;
  double refine_tol = 1e-6;
  std::uint64_t seed = 0;
  unsigned workers = 0;

  void validate() const {
    if (m < 1 || reps < 1) throw std::invalid_argument("AsymptoticConfig: m, reps must be >= 1");
    if (!(f0 > 0.0)) throw std::invalid_argument("AsymptoticConfig: f0 must be > 0");
    if (!(c >= 0.0)) throw std::invalid_argument("AsymptoticConfig: c must be >= 0");
  }
};

// The statistic whose (-1, 0) interval event is the limiting pile-up of the
// joint estimator: the left beta-derivative of the profiled limit criterion,
//   Y = int S dW - W(1) int S ds + (W(1)/(2 f0)) [int W ds - W(1)/2],
// with S = W + cV.
inline double pileup_statistic(const BrownianPair& pair, double f0, double c) {
  if (!(f0 > 0.0)) throw std::invalid_argument("pileup_statistic requires f0 > 0");
  const std::size_t m = pair.m;
  const double inv_m = 1.0 / static_cast<double>(m);
  double w = 0.0, s = 0.0;
  double sum_s_dw = 0.0, sum_s = 0.0, sum_w = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    sum_s_dw += s * pair.dW[j];
    sum_s += s;
    sum_w += w;
    w += pair.dW[j];
    s += pair.dW[j] + c * pair.dV[j];
  }
  const double w1 = w;
  return sum_s_dw - w1 * sum_s * inv_m + w1 / (2.0 * f0) * (sum_w * inv_m - 0.5 * w1);
}

// Laplace-noise representation of the same statistic as a single dV-integral:
//   Y = int [W(1) s - W(s)] dV(s) - 1/2.
// The terminal W(1) appears inside every summand; with V independent of W the
// estimator still targets the law of Y, which is all the Monte Carlo uses.
inline double pileup_statistic_laplace(const BrownianPair& pair) {
  const std::size_t m = pair.m;
  double w1 = 0.0;
  for (double d : pair.dW) w1 += d;
  double w = 0.0, acc = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double t = static_cast<double>(j) / static_cast<double>(m);
    acc += (w1 * t - w) * pair.dV[j];
    w += pair.dW[j];
  }
  return acc - 0.5;
}

// Conditional pile-up probability given a W path: with R = int [W(1)s-W(s)]^2 ds,
// the dV-integral is N(0, R) given W, so the interval probability is
// Phi(1/(2 sqrt R)) - Phi(-1/(2 sqrt R)). A degenerate path (R = 0) carries
// the full point mass, contributing 1.
inline double rb_pileup_term(std::span<const double> dW) {
  const std::size_t m = dW.size();
  double w1 = 0.0;
  for (double d : dW) w1 += d;
  double w = 0.0, r = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double t = static_cast<double>(j) / static_cast<double>(m);
    const double g = w1 * t - w;
    r += g * g;
    w += dW[j];
  }
  r /= static_cast<double>(m);
  if (r == 0.0) return 1.0;
  const double half = 0.5 / std::sqrt(r);
  return normal_cdf(half) - normal_cdf(-half);
}

struct PileupEstimate {
  double estimate;
  double std_error;
  std::size_t reps;
};

namespace detail {
// Stream purposes, so different operations never share replicate streams.
inline constexpr std::uint64_t kStreamPileupMc = 0x11;
inline constexpr std::uint64_t kStreamPileupRb = 0x12;
inline constexpr std::uint64_t kStreamLimitDist = 0x13;
}  // namespace detail

inline PileupEstimate pileup_prob_mc(const AsymptoticConfig& cfg) {
  cfg.validate();
  std::vector<char> hit(cfg.reps);
  parallel_for(cfg.reps, cfg.workers, [&](std::size_t rep) {
    thread_local BrownianPair pair;
    Rng rng = make_stream(cfg.seed, detail::kStreamPileupMc, rep);
    fill_brownian_pair(pair, cfg.m, rng);
    const double y = pileup_statistic(pair, cfg.f0, cfg.c);
    hit[rep] = (y > -1.0 && y < 0.0) ? 1 : 0;
  });
  std::size_t count = 0;
  for (char h : hit) count += h;
  const double p = static_cast<double>(count) / static_cast<double>(cfg.reps);
  return {p, binomial_se(p, cfg.reps), cfg.reps};
}

// Rao-Blackwellized Laplace pile-up estimate: averages the conditional normal
// probability over W paths only, cutting the Monte Carlo variance.
inline PileupEstimate pileup_prob_laplace_rb(const AsymptoticConfig& cfg) {
  cfg.validate();
  std::vector<double> term(cfg.reps);
  parallel_for(cfg.reps, cfg.workers, [&](std::size_t rep) {
    thread_local std::vector<double> dw;
    dw.resize(cfg.m);
    Rng rng = make_stream(cfg.seed, detail::kStreamPileupRb, rep);
    const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.m));
    for (auto& d : dw) d = rng.normal() * scale;
    term[rep] = rb_pileup_term(dw);
  });
  double mean = 0.0;
  for (double t : term) mean += t;
  mean /= static_cast<double>(cfg.reps);
  double var = 0.0;
  for (double t : term) var += (t - mean) * (t - mean);
  var /= static_cast<double>(cfg.reps);
  return {mean, std::sqrt(var / static_cast<double>(cfg.reps)), cfg.reps};
}

// The limit criterion U(beta, alpha) is quadratic in alpha with positive
// leading coefficient; the three coefficients support closed-form inner
// minimization and the integrated criterion.
struct LimitQuad {
  double q2, q1, q0;
  double value(double alpha) const { return (q2 * alpha + q1) * alpha + q0; }
  double alpha_star() const { return -q1 / (2.0 * q2); }
  double profiled() const { return q0 - q1 * q1 / (4.0 * q2); }
  // log integral exp(-U(beta, alpha)) d alpha, a Gaussian integral.
  double integrated() const {
    return -profiled() + 0.5 * std::log(3.14159265358979323846 / q2);
  }
};

// Discretized limit criterion coefficients. The inner kernels are computed by
// one multiply-add recursions: for beta <= 0, K(t_j) = beta * A_j with
// A_{j+1} = e^{beta/m}(A_j + dS_j); for beta > 0 the kernel runs backward and
// excludes the diagonal increment, so the product dS dW over the same cell
// never enters the cross term.
inline LimitQuad limit_objective_quad(double beta, const BrownianPair& pair, double f0,
                                      double c) {
  if (!(f0 > 0.0)) throw std::invalid_argument("limit_objective_quad requires f0 > 0");
  const std::size_t m = pair.m;
  const double inv_m = 1.0 / static_cast<double>(m);
  double s_kdw = 0.0, s_gdw = 0.0, s_kk = 0.0, s_kg = 0.0, s_gg = 0.0;
  if (beta <= 0.0) {
    const double decay = std::exp(beta * inv_m);
    double a = 0.0, g = 1.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double k = beta * a;
      const double dw = pair.dW[j];
      s_kdw += k * dw;
      s_gdw += g * dw;
      s_kk += k * k;
      s_kg += k * g;
      s_gg += g * g;
      a = decay * (a + dw + c * pair.dV[j]);
      g *= decay;
    }
  } else {
    const double decay = std::exp(-beta * inv_m);
    double b = 0.0, g = decay;  // g(t_{m-1}) = e^{-beta/m}
    for (std::size_t j = m; j-- > 0;) {
      const double k = -beta * b;
      const double dw = pair.dW[j];
      s_kdw += k * dw;
      s_gdw += g * dw;
      s_kk += k * k;
      s_kg += k * g;
      s_gg += g * g;
      b = decay * (b + dw + c * pair.dV[j]);
      g *= decay;
    }
  }
  LimitQuad quad;
  quad.q2 = f0 * s_gg * inv_m;
  quad.q1 = s_gdw + 2.0 * f0 * s_kg * inv_m;
  quad.q0 = s_kdw + f0 * s_kk * inv_m;
  return quad;
}

// Direct evaluation of U(beta, alpha); kept separate from the quadratic route
// so the two can be cross-checked.
inline double limit_objective(double beta, double alpha, const BrownianPair& pair,
                              double f0, double c) {
  if (!(f0 > 0.0)) throw std::invalid_argument("limit_objective requires f0 > 0");
  const std::size_t m = pair.m;
  const double inv_m = 1.0 / static_cast<double>(m);
  double s_hdw = 0.0, s_hh = 0.0;
  if (beta <= 0.0) {
    const double decay = std::exp(beta * inv_m);
    double a = 0.0, g = 1.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double h = beta * a + alpha * g;
      s_hdw += h * pair.dW[j];
      s_hh += h * h;
      a = decay * (a + pair.dW[j] + c * pair.dV[j]);
      g *= decay;
    }
  } else {
    const double decay = std::exp(-beta * inv_m);
    double b = 0.0, g = decay;
    for (std::size_t j = m; j-- > 0;) {
      const double h = -beta * b + alpha * g;
      s_hdw += h * pair.dW[j];
      s_hh += h * h;
      b = decay * (b + pair.dW[j] + c * pair.dV[j]);
      g *= decay;
    }
  }
  return s_hdw + f0 * s_hh * inv_m;
}

// log integral exp(-U(beta, alpha)) d alpha in closed form.
inline double limit_integrated_objective(double beta, const BrownianPair& pair, double f0,
                                         double c) {
  return limit_objective_quad(beta, pair, f0, c).integrated();
}

struct LimitMinimizer {
  double beta;
  double alpha;
  bool pileup;
};

// Local minimizer of U(beta, alpha_hat(beta)) nearest 0. The pile-up decision
// is the exact interval criterion on the statistic Y (not derivative signs);
// otherwise the sign of the one-sided limit derivative (Y on the left, Y+1 on
// the right) dictates the walk direction.
inline LimitMinimizer minimize_limit_objective(const BrownianPair& pair,
                                               const AsymptoticConfig& cfg) {
  cfg.validate();
  const double y = pileup_statistic(pair, cfg.f0, cfg.c);
  double w1 = 0.0;
  for (double d : pair.dW) w1 += d;
  if (y > -1.0 && y < 0.0) {
    return {0.0, -w1 / (2.0 * cfg.f0), true};
  }
  auto profiled = [&](double beta) {
    return limit_objective_quad(beta, pair, cfg.f0, cfg.c).profiled();
  };
  const GridSearch grid{cfg.beta_max, cfg.grid_step, cfg.refine_tol};
  const int dir = y <= -1.0 ? +1 : -1;
  const GridOptimum opt = detail::walk_refine(profiled, profiled(0.0), dir, grid);
  const double alpha = limit_objective_quad(opt.x, pair, cfg.f0, cfg.c).alpha_star();
  return {opt.x, alpha, false};
}

struct LimitMaximizer {
  double beta;
  bool pileup;
};

// Local maximizer of the integrated criterion nearest 0. Both one-sided
// limit derivatives equal -(Y + 1/2), so the criterion has no kink at 0 and
// the pile-up interval is empty; as with the minimizer, the decision comes
// from the exact characterization (never piled) rather than from
// finite-difference signs, whose discretization-scale kink artifacts would
// otherwise inject spurious mass at 0. The sign of Y + 1/2 dictates the walk.
inline LimitMaximizer maximize_limit_integrated(const BrownianPair& pair,
                                                const AsymptoticConfig& cfg) {
  cfg.validate();
  auto neg_ustar = [&](double beta) {
    return -limit_integrated_objective(beta, pair, cfg.f0, cfg.c);
  };
  const double y = pileup_statistic(pair, cfg.f0, cfg.c);
  const GridSearch grid{cfg.beta_max, cfg.grid_step, cfg.refine_tol};
  // d(-U*)/dbeta at 0 is Y + 1/2 from both sides: negative means -U* descends
  // to the right.
  const int dir = y + 0.5 < 0.0 ? +1 : -1;
  const GridOptimum opt = detail::walk_refine(neg_ustar, neg_ustar(0.0), dir, grid);
  return {opt.x, false};
}

struct LimitSample {
  double y = 0.0;
  double beta_J = 0.0;
  double beta_E = 0.0;
  double alpha_at_zero = 0.0;  // alpha_hat(0) = -W(1)/(2 f0)
  bool pileup_J = false;
  bool pileup_E = false;
  bool miss_J = false;
  bool miss_E = false;
};

inline LimitSample limit_sample(const BrownianPair& pair, const AsymptoticConfig& cfg) {
  LimitSample out;
  out.y = pileup_statistic(pair, cfg.f0, cfg.c);
  double w1 = 0.0;
  for (double d : pair.dW) w1 += d;
  out.alpha_at_zero = -w1 / (2.0 * cfg.f0);
  try {
    const LimitMinimizer j = minimize_limit_objective(pair, cfg);
    out.beta_J = j.beta;
    out.pileup_J = j.pileup;
  } catch (const WindowMissError&) {
    out.miss_J = true;
  }
  try {
    const LimitMaximizer e = maximize_limit_integrated(pair, cfg);
    out.beta_E = e.beta;
    out.pileup_E = e.pileup;
  } catch (const WindowMissError&) {
    out.miss_E = true;
  }
  return out;
}

struct LimitDistributionSummary {
  std::size_t reps = 0;
  std::size_t excluded_J = 0;
  std::size_t excluded_E = 0;
  double mean_beta_J = 0.0, sd_beta_J = 0.0;
  double mean_beta_E = 0.0, sd_beta_E = 0.0;
  double pileup_frac_J = 0.0;
  double pileup_frac_E = 0.0;
  std::array<double, 5> quantiles_J{};  // 5%, 25%, 50%, 75%, 95%
  std::array<double, 5> quantiles_E{};
};

// Tabulates the limit distributions of the two local estimators over
// independent replicates of the coupled Brownian paths.
inline LimitDistributionSummary limit_beta_distributions(const AsymptoticConfig& cfg) {
  cfg.validate();
  std::vector<LimitSample> samples(cfg.reps);
  parallel_for(cfg.reps, cfg.workers, [&](std::size_t rep) {
    thread_local BrownianPair pair;
    Rng rng = make_stream(cfg.seed, detail::kStreamLimitDist, rep);
    fill_brownian_pair(pair, cfg.m, rng);
    samples[rep] = limit_sample(pair, cfg);
  });

  LimitDistributionSummary out;
  out.reps = cfg.reps;
  std::vector<double> beta_j, beta_e;
  beta_j.reserve(cfg.reps);
  beta_e.reserve(cfg.reps);
  std::size_t pile_j = 0, pile_e = 0;
  for (const LimitSample& s : samples) {
    if (s.miss_J) {
      ++out.excluded_J;
    } else {
      beta_j.push_back(s.beta_J);
      pile_j += s.pileup_J ? 1 : 0;
    }
    if (s.miss_E) {
      ++out.excluded_E;
    } else {
      beta_e.push_back(s.beta_E);
      pile_e += s.pileup_E ? 1 : 0;
    }
  }
  const Moments mj = moments_of(beta_j);
  const Moments me = moments_of(beta_e);
  out.mean_beta_J = mj.mean;
  out.sd_beta_J = mj.sd;
  out.mean_beta_E = me.mean;
  out.sd_beta_E = me.sd;
  out.pileup_frac_J = beta_j.empty() ? 0.0 : static_cast<double>(pile_j) / beta_j.size();
  out.pileup_frac_E = beta_e.empty() ? 0.0 : static_cast<double>(pile_e) / beta_e.size();
  out.quantiles_J = quantiles5(std::move(beta_j));
  out.quantiles_E = quantiles5(std::move(beta_e));
  return out;
}

}  // namespace ma1
