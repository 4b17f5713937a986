#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>

#include "ma1/optimize.hpp"
#include "ma1/piecewise.hpp"
#include "ma1/residuals.hpp"

namespace ma1 {

enum class SearchMode { LocalNearestOne, Global };
enum class FitMethod { Joint, Exact, Lad };

inline const char* method_name(FitMethod m) {
  switch (m) {
    case FitMethod::Joint: return "joint";
    case FitMethod::Exact: return "exact";
    case FitMethod::Lad: return "lad";
  }
  return "?";
}

inline const char* mode_name(SearchMode m) {
  return m == SearchMode::LocalNearestOne ? "local" : "global";
}

struct SearchConfig {
  double beta_max = 25.0;       // half-width of the beta = n(theta-1) window
  double grid_step = 0.05;      // beta grid spacing
  double refine_tol = 1e-6;     // bracket refinement tolerance on beta
  SearchMode mode = SearchMode::LocalNearestOne;
  double sigma_profile_tol = 1e-8;

  void validate() const {
    if (!(beta_max > 0.0) || !(grid_step > 0.0) || grid_step >= beta_max ||
        !(refine_tol > 0.0) || !(sigma_profile_tol > 0.0)) {
      throw std::invalid_argument("invalid SearchConfig");
    }
  }
};

struct FitDiagnostics {
  bool degenerate = false;             // all-zero data convention applied
  bool tie_toward_invertible = false;  // equidistant local optima, theta < 1 chosen
};

struct FitResult {
  double theta_hat = 1.0;
  double z_init_hat = std::numeric_limits<double>::quiet_NaN();  // joint/LAD only
  double sigma_hat = 0.0;
  double objective = 0.0;  // criterion value at the optimum
  bool pileup = false;
  FitMethod method = FitMethod::Joint;
  SearchMode mode = SearchMode::LocalNearestOne;
  FitDiagnostics diag;
};

// Exact minimizer over z_init of the criterion at fixed theta: the weighted
// median of the breakpoints -a_t/b_t with weights |b_t|. Returns the
// minimizer and the profiled criterion value (|theta| factor included).
inline std::pair<double, double> inner_zinit(std::span<const double> x, double theta) {
  const AffineResiduals aff = affine_decomposition(x, theta);
  const AbsSumSegments segs = AbsSumSegments::build(aff.a, aff.b);
  const double z = segs.min_point();
  double sum_abs = 0.0;
  for (std::size_t t = 0; t < aff.a.size(); ++t) {
    sum_abs += std::fabs(aff.a[t] + aff.b[t] * z);
  }
  const double ell = std::fabs(theta) > 1.0 ? sum_abs * std::fabs(theta) : sum_abs;
  return {z, ell};
}

namespace detail {

inline bool all_zero(std::span<const double> x) {
  for (double v : x) {
    if (v != 0.0) return false;
  }
  return true;
}

inline FitResult degenerate_result(FitMethod method, SearchMode mode) {
  FitResult r;
  r.theta_hat = 1.0;
  r.z_init_hat = method == FitMethod::Exact ? std::numeric_limits<double>::quiet_NaN() : 0.0;
  r.sigma_hat = 0.0;
  r.objective = method == FitMethod::Exact ? std::numeric_limits<double>::infinity() : 0.0;
  r.pileup = true;
  r.method = method;
  r.mode = mode;
  r.diag.degenerate = true;
  return r;
}

// Shared outer search over theta = 1 + beta/n for a criterion to minimize.
template <class F>
GridOptimum outer_search(F&& phi, SearchMode mode, const GridSearch& grid,
                         bool* pileup_out) {
  const double at0 = phi(0.0);
  const ZeroDerivTest test = zero_derivative_test(phi, at0, kDerivStepCoarse, kDerivStepFine);
  if (mode == SearchMode::LocalNearestOne) {
    if (test.is_local_min) {
      *pileup_out = true;
      return {0.0, at0, true};
    }
    *pileup_out = false;
    GridOptimum opt = minimize_local_nearest_zero(phi, at0, test.derivs, grid);
    opt.at_zero = false;
    return opt;
  }
  GridOptimum opt = minimize_global(phi, at0, test.is_local_min, grid);
  *pileup_out = opt.at_zero;
  return opt;
}

}  // namespace detail

// One-sided derivative test of the profiled joint criterion at theta = 1:
// true iff the profile decreases from the left and increases to the right.
inline bool pileup_test_joint(std::span<const double> x) {
  if (detail::all_zero(x)) return true;
  const double n = static_cast<double>(x.size());
  auto phi = [&](double beta) { return inner_zinit(x, 1.0 + beta / n).second; };
  return zero_derivative_test(phi, phi(0.0), kDerivStepCoarse, kDerivStepFine).is_local_min;
}

// Joint Laplace fit: minimizes the profiled criterion phi(theta) =
// ell_n(theta, z_init(theta)) over the beta grid.
inline FitResult fit_joint(std::span<const double> x, const SearchConfig& cfg) {
  cfg.validate();
  if (detail::all_zero(x)) return detail::degenerate_result(FitMethod::Joint, cfg.mode);
  const double n = static_cast<double>(x.size());
  auto phi = [&](double beta) { return inner_zinit(x, 1.0 + beta / n).second; };
  const GridSearch grid{cfg.beta_max, cfg.grid_step, cfg.refine_tol};
  bool pileup = false;
  const GridOptimum opt = detail::outer_search(phi, cfg.mode, grid, &pileup);

  FitResult r;
  r.method = FitMethod::Joint;
  r.mode = cfg.mode;
  r.pileup = pileup;
  r.theta_hat = pileup ? 1.0 : 1.0 + opt.x / n;
  r.diag.tie_toward_invertible = opt.tie_toward_negative;
  const auto [z_star, ell] = inner_zinit(x, r.theta_hat);
  r.z_init_hat = z_star;
  r.objective = ell;
  // Concentrated scale; the |theta| factor of the noninvertible branch rides
  // along so the (theta, sigma) pair matches the sigma profile of the
  // log-likelihood across branches.
  r.sigma_hat = ell / (n + 1.0);
  return r;
}

// LAD fit: same outer search with z_init pinned at 0.
inline FitResult fit_lad(std::span<const double> x, const SearchConfig& cfg) {
  cfg.validate();
  if (detail::all_zero(x)) return detail::degenerate_result(FitMethod::Lad, cfg.mode);
  const double n = static_cast<double>(x.size());
  auto psi = [&](double beta) { return objective(x, 1.0 + beta / n, 0.0).ell; };
  const GridSearch grid{cfg.beta_max, cfg.grid_step, cfg.refine_tol};
  bool pileup = false;
  const GridOptimum opt = detail::outer_search(psi, cfg.mode, grid, &pileup);

  FitResult r;
  r.method = FitMethod::Lad;
  r.mode = cfg.mode;
  r.pileup = pileup;
  r.theta_hat = pileup ? 1.0 : 1.0 + opt.x / n;
  r.diag.tie_toward_invertible = opt.tie_toward_negative;
  r.z_init_hat = 0.0;
  r.objective = objective(x, r.theta_hat, 0.0).ell;
  r.sigma_hat = r.objective / (n + 1.0);
  return r;
}

// Exact Laplace log-likelihood: log integral of the joint density over the
// augmented initial value. The residual sum is piecewise linear in z_init, so
// the integral is a sum of elementary exponential pieces evaluated in log
// space; the -(n+1)log(2 sigma) and noninvertible -n log|theta| terms are
// included.
inline double exact_loglik(std::span<const double> x, double theta, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("exact_loglik requires sigma > 0");
  const double n = static_cast<double>(x.size());
  const AffineResiduals aff = affine_decomposition(x, theta);
  const AbsSumSegments segs = AbsSumSegments::build(aff.a, aff.b);
  double value = segs.log_integral(sigma) - (n + 1.0) * std::log(2.0 * sigma);
  if (std::fabs(theta) > 1.0) value -= n * std::log(std::fabs(theta));
  return value;
}

namespace detail {

struct SigmaProfile {
  double sigma;
  double loglik;
};

// Maximizes the exact log-likelihood over sigma on a fixed log-scale bracket.
inline SigmaProfile profile_sigma(const AbsSumSegments& segs, double n, double theta,
                                  double log_sigma_lo, double log_sigma_hi, double tol) {
  const double log_theta_term =
      std::fabs(theta) > 1.0 ? n * std::log(std::fabs(theta)) : 0.0;
  auto neg_loglik = [&](double log_sigma) {
    const double sigma = std::exp(log_sigma);
    return -(segs.log_integral(sigma) - (n + 1.0) * std::log(2.0 * sigma) - log_theta_term);
  };
  const auto [ls, nll] = brent_min(neg_loglik, log_sigma_lo, log_sigma_hi, tol, tol);
  return {std::exp(ls), -nll};
}

}  // namespace detail

// Exact Laplace fit: per grid theta the scale is profiled by bracketed search
// on log sigma over [sigma_J/20, 20 sigma_J], anchored at the joint fit's
// scale; the outer search then maximizes the profile likelihood.
inline FitResult fit_exact(std::span<const double> x, const SearchConfig& cfg) {
  cfg.validate();
  if (detail::all_zero(x)) return detail::degenerate_result(FitMethod::Exact, cfg.mode);
  const double n = static_cast<double>(x.size());
  const double sigma_anchor = fit_joint(x, cfg).sigma_hat;
  const double ls_lo = std::log(sigma_anchor / 20.0);
  const double ls_hi = std::log(sigma_anchor * 20.0);

  auto neg_profile = [&](double beta) {
    const double theta = 1.0 + beta / n;
    const AffineResiduals aff = affine_decomposition(x, theta);
    const AbsSumSegments segs = AbsSumSegments::build(aff.a, aff.b);
    return -detail::profile_sigma(segs, n, theta, ls_lo, ls_hi, cfg.sigma_profile_tol).loglik;
  };
  const GridSearch grid{cfg.beta_max, cfg.grid_step, cfg.refine_tol};
  bool pileup = false;
  const GridOptimum opt = detail::outer_search(neg_profile, cfg.mode, grid, &pileup);

  FitResult r;
  r.method = FitMethod::Exact;
  r.mode = cfg.mode;
  r.pileup = pileup;
  r.theta_hat = pileup ? 1.0 : 1.0 + opt.x / n;
  r.diag.tie_toward_invertible = opt.tie_toward_negative;
  const AffineResiduals aff = affine_decomposition(x, r.theta_hat);
  const AbsSumSegments segs = AbsSumSegments::build(aff.a, aff.b);
  const detail::SigmaProfile prof =
      detail::profile_sigma(segs, n, r.theta_hat, ls_lo, ls_hi, cfg.sigma_profile_tol);
  r.sigma_hat = prof.sigma;
  r.objective = prof.loglik;
  return r;
}

}  // namespace ma1
