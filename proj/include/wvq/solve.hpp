#pragma once

// One-dimensional root finding and maximization on bounded intervals.

#include <cmath>
#include <cstddef>
#include <limits>

#include "wvq/errors.hpp"

namespace wvq::solve {

inline constexpr int kMaxBisectionIterations = 200;

/// Root of f on [lo, hi] by bisection, assuming f(lo) > 0 >= f(hi).
/// -inf is an acceptable (negative) value of f.
template <class F>
double bisect_decreasing(F&& f, double lo, double hi, double tol) {
  for (int it = 0; it < kMaxBisectionIterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= tol || mid <= lo || mid >= hi) return mid;
    if (f(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  throw ConvergenceFailure("bisection did not reach tolerance");
}

/// Outcome of the three-way equilibrium rule on [0, 1]:
/// 1 if f(1) >= 0, 0 if f(0) <= 0, otherwise the root of f.
struct EquilibriumRoot {
  double value = 0.0;
  bool monotone = true;   ///< f was nonincreasing on the check grid
  int sign_changes = 0;   ///< counted by the dense scan (0 when skipped)
};

template <class F>
EquilibriumRoot equilibrium_root(F&& f, double tol = 1e-14) {
  EquilibriumRoot out;
  const double f1 = f(1.0);
  if (f1 >= 0.0) {
    out.value = 1.0;
    return out;
  }
  const double f0 = f(0.0);
  if (f0 <= 0.0) {
    out.value = 0.0;
    return out;
  }

  constexpr int kCheckPoints = 100;
  double prev = f0;
  for (int i = 1; i <= kCheckPoints && out.monotone; ++i) {
    const double v = f(static_cast<double>(i) / kCheckPoints);
    if (v > prev + 1e-12 * (1.0 + std::abs(prev))) out.monotone = false;
    prev = v;
  }
  if (out.monotone) {
    out.sign_changes = 1;
    out.value = bisect_decreasing(f, 0.0, 1.0, tol);
    return out;
  }

  // Dense scan: bracket the first positive-to-nonpositive change.
  constexpr int kScanSteps = 1000;
  double lo = 0.0, hi = 1.0;
  bool bracketed = false;
  bool positive = true;
  for (int i = 1; i <= kScanSteps; ++i) {
    const double x = static_cast<double>(i) / kScanSteps;
    const bool now = f(x) > 0.0;
    if (now != positive) {
      ++out.sign_changes;
      if (!bracketed && !now) {
        lo = static_cast<double>(i - 1) / kScanSteps;
        hi = x;
        bracketed = true;
      }
      positive = now;
    }
  }
  out.value = bisect_decreasing(f, lo, hi, tol);
  return out;
}

/// Maximizer of a unimodal f on [lo, hi] by golden-section search.
template <class F>
double golden_section_max(F&& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 500 && (b - a) > tol; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

/// Grid argmax over [lo, hi] with `steps` intervals; the first maximizer wins.
template <class F>
double grid_argmax(F&& f, double lo, double hi, int steps) {
  double best_x = lo;
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= steps; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / steps;
    const double v = f(x);
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  return best_x;
}

}  // namespace wvq::solve
