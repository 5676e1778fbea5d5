#pragma once

// Deterministic one-dimensional optimizers: uniform grid scan followed by
// golden-section refinement around the best grid cell, and bisection on a
// boolean predicate.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>

#include "keyrate/errors.hpp"

namespace keyrate {

struct ScalarOptimum {
  double x = 0.0;
  double value = 0.0;
  std::size_t evaluations = 0;
};

namespace detail {

// Golden-section search for the maximum of f on [a, b]; stops when the
// bracket is narrower than tol. Returns the best interior point evaluated.
template <class F>
ScalarOptimum golden_maximize(F&& f, double a, double b, double tol) {
  constexpr double kInvPhi = std::numbers::phi - 1.0;  // 0.618...
  ScalarOptimum best{a, -std::numeric_limits<double>::infinity(), 0};
  if (!(b - a > tol)) return best;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  best.evaluations = 2;
  while (b - a > tol) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    }
    ++best.evaluations;
  }
  if (f1 >= f2) {
    best.x = x1;
    best.value = f1;
  } else {
    best.x = x2;
    best.value = f2;
  }
  return best;
}

}  // namespace detail

// Maximizes f over [lo, hi]: `grid_points` uniform samples, then golden
// section on the two cells adjacent to the best sample (one cell when the
// best sample is an endpoint). Ties keep the smallest x.
template <class F>
ScalarOptimum grid_golden_maximize(F&& f, double lo, double hi, std::size_t grid_points, double tol) {
  if (grid_points < 2) throw DomainError("grid_golden_maximize: need at least two grid points");
  if (!(hi >= lo)) throw DomainError("grid_golden_maximize: empty interval");
  if (hi == lo) return ScalarOptimum{lo, f(lo), 1};

  const double step = (hi - lo) / static_cast<double>(grid_points - 1);
  auto grid_x = [&](std::size_t i) { return i + 1 == grid_points ? hi : lo + step * static_cast<double>(i); };

  ScalarOptimum best{lo, -std::numeric_limits<double>::infinity(), 0};
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double x = grid_x(i);
    const double v = f(x);
    ++best.evaluations;
    if (v > best.value) {
      best.value = v;
      best.x = x;
      best_i = i;
    }
  }
  const double a = best_i == 0 ? lo : grid_x(best_i - 1);
  const double b = best_i + 1 == grid_points ? hi : grid_x(best_i + 1);
  const ScalarOptimum refined = detail::golden_maximize(f, a, b, tol);
  best.evaluations += refined.evaluations;
  if (refined.value > best.value) {
    best.x = refined.x;
    best.value = refined.value;
  }
  return best;
}

template <class F>
ScalarOptimum grid_golden_minimize(F&& f, double lo, double hi, std::size_t grid_points, double tol) {
  ScalarOptimum r = grid_golden_maximize([&](double x) { return -f(x); }, lo, hi, grid_points, tol);
  r.value = -r.value;
  return r;
}

struct BisectionResult {
  double x = 0.0;  // bracket midpoint
  double bracket_width = 0.0;
  std::size_t steps = 0;
};

// Finds where `holds` switches from true (at lo) to false (at hi), down to
// the given bracket width.
template <class Pred>
BisectionResult bisect_transition(Pred&& holds, double lo, double hi, double width) {
  if (!(width > 0.0)) throw DomainError("bisect_transition: width must be positive");
  if (!holds(lo)) throw NumericalError("bisection: predicate already false at the lower end of the bracket");
  if (holds(hi)) throw NumericalError("bisection: predicate still true at the upper end of the bracket");
  BisectionResult r;
  while (hi - lo > width) {
    const double mid = 0.5 * (lo + hi);
    if (holds(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
    ++r.steps;
  }
  r.x = 0.5 * (lo + hi);
  r.bracket_width = hi - lo;
  return r;
}

}  // namespace keyrate
