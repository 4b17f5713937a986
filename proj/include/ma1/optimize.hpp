#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ma1 {

// Raised when a grid search runs out of window without bracketing a local
// optimum. Callers treat this as a loud per-replicate failure, never as a
// value to silently clamp.
class WindowMissError : public std::runtime_error {
 public:
  explicit WindowMissError(const char* what) : std::runtime_error(what) {}
};

struct GridSearch {
  double half_width = 25.0;  // search window is [-half_width, half_width]
  double step = 0.05;
  double refine_tol = 1e-6;
};

// Golden-section minimization on [lo, hi]; returns the best probed point.
template <class F>
std::pair<double, double> golden_min(F&& f, double lo, double hi, double tol) {
  static constexpr double kInv = 0.6180339887498949;  // 1/phi
  double x1 = hi - kInv * (hi - lo);
  double x2 = lo + kInv * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  while (hi - lo > tol) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInv * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInv * (hi - lo);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

// Brent minimization on [lo, hi] (parabolic steps with golden fallback).
template <class F>
std::pair<double, double> brent_min(F&& f, double lo, double hi, double rel_tol,
                                    double abs_tol, int max_iter = 120) {
  static constexpr double kCGold = 0.3819660112501051;
  double a = lo, b = hi;
  double x = a + kCGold * (b - a);
  double w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  for (int iter = 0; iter < max_iter; ++iter) {
    const double xm = 0.5 * (a + b);
    const double tol1 = rel_tol * std::fabs(x) + abs_tol;
    const double tol2 = 2.0 * tol1;
    if (std::fabs(x - xm) <= tol2 - 0.5 * (b - a)) break;
    bool take_golden = true;
    if (std::fabs(e) > tol1) {
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::fabs(q);
      const double e_old = e;
      e = d;
      if (std::fabs(p) < std::fabs(0.5 * q * e_old) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = xm > x ? tol1 : -tol1;
        take_golden = false;
      }
    }
    if (take_golden) {
      e = (x >= xm ? a : b) - x;
      d = kCGold * e;
    }
    const double u = std::fabs(d) >= tol1 ? x + d : x + (d > 0.0 ? tol1 : -tol1);
    const double fu = f(u);
    if (fu <= fx) {
      if (u >= x) a = x; else b = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return {x, fx};
}

// Finite-difference steps for the local-optimum tests at the unit root, in
// beta units (theta steps of 1e-4/n and 1e-5/n).
inline constexpr double kDerivStepCoarse = 1e-4;
inline constexpr double kDerivStepFine = 1e-5;

// One-sided finite-difference derivatives at 0.
struct OneSidedDerivs {
  double left;
  double right;
};

template <class F>
OneSidedDerivs one_sided_derivs(F&& f, double f_at0, double h) {
  return {(f_at0 - f(-h)) / h, (f(h) - f_at0) / h};
}

struct ZeroDerivTest {
  OneSidedDerivs derivs;   // from the step the agreement rule settled on
  bool is_local_min;       // left < 0 and right > 0
};

// Derivative sign test at 0 with two step sizes; when the signs disagree
// between steps the smaller step wins.
template <class F>
ZeroDerivTest zero_derivative_test(F&& f, double f_at0, double h_coarse, double h_fine) {
  const OneSidedDerivs d1 = one_sided_derivs(f, f_at0, h_coarse);
  const OneSidedDerivs d2 = one_sided_derivs(f, f_at0, h_fine);
  auto sign = [](double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); };
  OneSidedDerivs d = d1;
  if (sign(d1.left) != sign(d2.left)) d.left = d2.left;
  if (sign(d1.right) != sign(d2.right)) d.right = d2.right;
  return {d, d.left < 0.0 && d.right > 0.0};
}

struct GridOptimum {
  double x;
  double value;
  bool at_zero;                     // settled on the kink candidate at 0
  bool tie_toward_negative = false; // equidistant local minima, negative side chosen
};

namespace detail {

// Walk outward from 0 in direction dir while f decreases on the grid, then
// refine the bracketing triple by golden section.
template <class F>
GridOptimum walk_refine(F& f, double f_at0, int dir, const GridSearch& grid) {
  const std::size_t max_steps =
      static_cast<std::size_t>(std::llround(grid.half_width / grid.step));
  double prev_prev_x = 0.0;
  double prev_x = 0.0;
  double prev_val = f_at0;
  for (std::size_t j = 1; j <= max_steps; ++j) {
    const double x = dir * static_cast<double>(j) * grid.step;
    const double val = f(x);
    if (val >= prev_val) {
      const double lo = std::min(prev_prev_x, x);
      const double hi = std::max(prev_prev_x, x);
      auto [xr, vr] = golden_min(f, lo, hi, grid.refine_tol);
      if (vr <= prev_val) return {xr, vr, false};
      // Keep the result off the origin: 0 is the caller-owned kink candidate,
      // so a first-cell turn settles on the refined interior point instead.
      if (prev_x == 0.0) return {xr, vr, false};
      return {prev_x, prev_val, false};
    }
    prev_prev_x = prev_x;
    prev_x = x;
    prev_val = val;
  }
  throw WindowMissError("no interior local minimum inside the search window");
}

}  // namespace detail

// Local-mode search: the local minimum of f nearest 0, as directed by the
// one-sided derivative signs at 0. The pile-up case (0 itself is a local
// minimum) is decided by the caller before this is invoked.
template <class F>
GridOptimum minimize_local_nearest_zero(F&& f, double f_at0, const OneSidedDerivs& d,
                                        const GridSearch& grid) {
  const bool descend_right = d.right < 0.0 || (d.right == 0.0 && d.left < 0.0);
  const bool descend_left = d.left > 0.0 || (d.left == 0.0 && d.right > 0.0);
  if (descend_right && !descend_left) return detail::walk_refine(f, f_at0, +1, grid);
  if (descend_left && !descend_right) return detail::walk_refine(f, f_at0, -1, grid);
  if (!descend_left && !descend_right) {
    // Flat in both directions at the probe scale; report 0 without a pile-up claim.
    return {0.0, f_at0, true};
  }
  // Local maximum at 0: candidates on both sides, nearest wins, ties break
  // toward the invertible side.
  GridOptimum left_opt, right_opt;
  bool have_left = true, have_right = true;
  try {
    left_opt = detail::walk_refine(f, f_at0, -1, grid);
  } catch (const WindowMissError&) {
    have_left = false;
  }
  try {
    right_opt = detail::walk_refine(f, f_at0, +1, grid);
  } catch (const WindowMissError&) {
    have_right = false;
  }
  if (!have_left && !have_right) {
    throw WindowMissError("no interior local minimum inside the search window");
  }
  if (!have_right) return left_opt;
  if (!have_left) return right_opt;
  if (std::fabs(left_opt.x) < std::fabs(right_opt.x)) return left_opt;
  if (std::fabs(right_opt.x) < std::fabs(left_opt.x)) return right_opt;
  left_opt.tie_toward_negative = true;
  return left_opt;
}

// Global-mode search over the full grid. Every interior grid-local minimum is
// refined; the kink at 0 competes as a candidate only when the derivative
// test flags it as a local minimum. A global minimum sitting on the window
// boundary is reported as a window miss.
template <class F>
GridOptimum minimize_global(F&& f, double f_at0, bool zero_is_local_min,
                            const GridSearch& grid) {
  const long k_max = std::llround(grid.half_width / grid.step);
  const std::size_t count = static_cast<std::size_t>(2 * k_max + 1);
  std::vector<double> vals(count);
  const long center = k_max;
  for (long k = -k_max; k <= k_max; ++k) {
    vals[static_cast<std::size_t>(k + k_max)] =
        k == 0 ? f_at0 : f(static_cast<double>(k) * grid.step);
  }
  auto beta_at = [&](long idx) { return static_cast<double>(idx - k_max) * grid.step; };

  bool have_best = false;
  GridOptimum best{};
  auto consider = [&](const GridOptimum& cand) {
    if (!have_best || cand.value < best.value ||
        (cand.value == best.value && std::fabs(cand.x) < std::fabs(best.x))) {
      best = cand;
      have_best = true;
    }
  };

  if (zero_is_local_min) consider({0.0, f_at0, true});
  for (long idx = 1; idx + 1 < static_cast<long>(count); ++idx) {
    if (idx == center) continue;  // handled by the kink candidate
    if (vals[idx] <= vals[idx - 1] && vals[idx] <= vals[idx + 1]) {
      auto [xr, vr] = golden_min(f, beta_at(idx - 1), beta_at(idx + 1), grid.refine_tol);
      consider({xr, std::min(vr, vals[idx]), false});
    }
  }
  // The cell next to 0 can hide a minimum that is not a grid-local minimum
  // when 0 itself is the smaller grid value but not a kink minimum.
  if (!zero_is_local_min && vals[center] <= vals[center - 1] &&
      vals[center] <= vals[center + 1]) {
    auto [xl, vl] = golden_min(f, -grid.step, 0.0, grid.refine_tol);
    consider({xl, vl, false});
    auto [xr, vr] = golden_min(f, 0.0, grid.step, grid.refine_tol);
    consider({xr, vr, false});
  }
  if (!have_best) {
    throw WindowMissError("no interior local minimum inside the search window");
  }
  if (vals.front() < best.value || vals.back() < best.value) {
    throw WindowMissError("global minimum lies on the search window boundary");
  }
  return best;
}

}  // namespace ma1
