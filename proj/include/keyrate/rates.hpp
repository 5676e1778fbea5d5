#pragma once

// One-way secret-key rate S(U|E) - H(U|Y) for Bell-diagonal attack states
// with bitwise flip preprocessing U <- X, and the nested optimizations that
// turn it into lower/upper bounds and security thresholds.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "keyrate/bell.hpp"
#include "keyrate/errors.hpp"
#include "keyrate/optimize.hpp"
#include "keyrate/protocol.hpp"
#include "keyrate/qmat.hpp"

namespace keyrate {

// Alice flips each raw bit with probability q. Disabled pins q = 0.
class PreprocessingParams {
 public:
  PreprocessingParams() = default;
  explicit PreprocessingParams(double q, bool enabled = true) : q_(q), enabled_(enabled) {
    if (!(q >= 0.0 && q <= 0.5)) throw DomainError("preprocessing flip probability must lie in [0, 1/2]");
  }
  static PreprocessingParams disabled() { return PreprocessingParams(0.0, false); }

  double q() const { return enabled_ ? q_ : 0.0; }
  bool enabled() const { return enabled_; }

 private:
  double q_ = 0.0;
  bool enabled_ = true;
};

enum class BoundKind { kLower, kUpper };

inline const char* to_string(BoundKind k) { return k == BoundKind::kLower ? "lower" : "upper"; }

struct OptimizerSettings {
  std::size_t q_grid = 65;
  std::size_t parameter_grid = 129;
  double golden_tol = 1e-7;
  double bisection_width = 1e-5;
  // A bound counts as positive only above this value; the q = 1/2 end point
  // always evaluates to zero up to rounding.
  double positivity_floor = 1e-12;

  void validate() const {
    if (q_grid < 2 || parameter_grid < 2) throw DomainError("optimizer grids need at least two points");
    if (!(golden_tol > 0.0) || !(bisection_width > 0.0) || !(positivity_floor > 0.0)) {
      throw DomainError("optimizer tolerances must be positive");
    }
  }
};

struct RateReport {
  std::string protocol;
  std::string noise_name;
  double noise = 0.0;
  BoundKind bound = BoundKind::kLower;
  bool preprocessing = true;
  double rate = 0.0;  // secret bits per sifted bit
  double q_opt = 0.0;
  BellSpectrum worst;
  double worst_parameter = 0.0;  // free family parameter at the worst case (0 for k = 0)
  std::size_t evaluations = 0;
  double wall_seconds = 0.0;
  std::optional<double> overlap;  // B92
  std::optional<double> p_pass;   // B92
};

struct EveConditionals {
  DensityOperator given0;    // Eve's state when Alice measures x = 0
  DensityOperator given1;    // ... x = 1
  DensityOperator marginal;  // diag(lambda)
};

inline EveConditionals eve_conditionals(const BellSpectrum& lambda) {
  const PureState psi = purify(lambda);
  const auto amps = psi.amplitudes();
  auto conditional = [&](std::size_t x) {
    // <x|_A psi lives on B (x) E, amplitudes [x*8, x*8 + 8).
    std::vector<complex> v(amps.begin() + static_cast<std::ptrdiff_t>(8 * x),
                           amps.begin() + static_cast<std::ptrdiff_t>(8 * x + 8));
    return partial_trace(PureState::normalized({2, 4}, std::move(v)), {1});
  };
  DensityOperator e0 = conditional(0);
  DensityOperator e1 = conditional(1);
  DensityOperator marginal = partial_trace(psi, {2});
  return EveConditionals{std::move(e0), std::move(e1), std::move(marginal)};
}

// S(U|E) = S(rho_UE) - S(rho_E) with
// rho_UE = sum_u 1/2 |u><u| (x) [(1-q) rho_E^{x=u} + q rho_E^{x=1-u}].
inline double s_u_given_e(const EveConditionals& eve, const PreprocessingParams& p) {
  const double q = p.q();
  const ComplexMatrix& r0 = eve.given0.matrix();
  const ComplexMatrix& r1 = eve.given1.matrix();
  const ComplexMatrix m0 = r0 * complex(1.0 - q) + r1 * complex(q);
  const ComplexMatrix m1 = r1 * complex(1.0 - q) + r0 * complex(q);
  ComplexMatrix ue(8, 8);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      ue(i, j) = 0.5 * m0(i, j);
      ue(4 + i, 4 + j) = 0.5 * m1(i, j);
    }
  const DensityOperator rho_ue({2, 4}, std::move(ue));
  return von_neumann_entropy(rho_ue) - von_neumann_entropy(eve.marginal);
}

inline double s_u_given_e(const BellSpectrum& lambda, const PreprocessingParams& p) {
  return s_u_given_e(eve_conditionals(lambda), p);
}

// H(U|Y) = h(Q(1-q) + (1-Q)q): Bell-diagonal marginals are uniform, so only
// the effective U/Y disagreement matters.
inline double h_u_given_y(double qber, const PreprocessingParams& p) {
  constexpr double kSlack = 1e-12;
  if (!(qber >= -kSlack && qber <= 0.5 + kSlack)) throw DomainError("h_u_given_y: QBER outside [0, 1/2]");
  const double q = p.q();
  return binary_entropy(qber * (1.0 - q) + (1.0 - qber) * q);
}

inline double rate(const EveConditionals& eve, double qber, const PreprocessingParams& p) {
  return s_u_given_e(eve, p) - h_u_given_y(qber, p);
}

inline double rate(const BellSpectrum& lambda, const PreprocessingParams& p) {
  return rate(eve_conditionals(lambda), lambda.qber(), p);
}

struct InnerMinResult {
  double rate = 0.0;
  BellSpectrum worst;
  double parameter = 0.0;
  std::size_t evaluations = 0;
};

// inf over the family's attack parameter at fixed noise and preprocessing.
inline InnerMinResult inner_min(const FeasibleFamily& family, double noise, const PreprocessingParams& p,
                                const OptimizerSettings& settings = {}) {
  if (family.parameter_count == 0) {
    const BellSpectrum l = family.at(noise);
    return InnerMinResult{rate(l, p), l, 0.0, 1};
  }
  const auto [lo, hi] = family.bounds(noise);
  const ScalarOptimum best = grid_golden_minimize([&](double t) { return rate(family.at(noise, t), p); }, lo, hi,
                                                  settings.parameter_grid, settings.golden_tol);
  return InnerMinResult{best.value, family.at(noise, best.x), best.x, best.evaluations};
}

namespace detail {

inline RateReport start_report(const ProtocolSpec& spec, double noise, BoundKind kind, bool preprocessing) {
  spec.check_noise(noise);
  RateReport r;
  r.protocol = spec.name;
  r.noise_name = spec.noise_name;
  r.noise = noise;
  r.bound = kind;
  r.preprocessing = preprocessing;
  if (spec.kind == ProtocolKind::kB92 && spec.overlap) {
    r.overlap = *spec.overlap;
    r.p_pass = b92_state(*spec.overlap, noise).p_pass;
  }
  return r;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

// sup over q in [0, 1/2] of inner_min.
inline RateReport lower_bound(const ProtocolSpec& spec, double noise, bool preprocessing,
                              const OptimizerSettings& settings = {}) {
  settings.validate();
  const auto t0 = std::chrono::steady_clock::now();
  RateReport report = detail::start_report(spec, noise, BoundKind::kLower, preprocessing);

  std::size_t evaluations = 0;
  InnerMinResult at_best;
  if (!preprocessing) {
    at_best = inner_min(spec.family, noise, PreprocessingParams::disabled(), settings);
    evaluations = at_best.evaluations;
  } else {
    const ScalarOptimum best = grid_golden_maximize(
        [&](double q) {
          const InnerMinResult r = inner_min(spec.family, noise, PreprocessingParams(q), settings);
          evaluations += r.evaluations;
          return r.rate;
        },
        0.0, 0.5, settings.q_grid, settings.golden_tol);
    at_best = inner_min(spec.family, noise, PreprocessingParams(best.x), settings);
    evaluations += at_best.evaluations;
    report.q_opt = best.x;
  }
  report.rate = at_best.rate;
  report.worst = at_best.worst;
  report.worst_parameter = at_best.parameter;
  report.evaluations = evaluations;
  report.wall_seconds = detail::seconds_since(t0);
  return report;
}

// min over the attack parameter of sup over q: the bitwise-preprocessing
// restriction of the upper bound (V empty, classical flips only).
inline RateReport upper_bound_bitwise(const ProtocolSpec& spec, double noise, bool preprocessing = true,
                                      const OptimizerSettings& settings = {}) {
  settings.validate();
  const auto t0 = std::chrono::steady_clock::now();
  RateReport report = detail::start_report(spec, noise, BoundKind::kUpper, preprocessing);

  std::size_t evaluations = 0;
  auto best_over_q = [&](const BellSpectrum& l) {
    const EveConditionals eve = eve_conditionals(l);
    if (!preprocessing) {
      ++evaluations;
      return ScalarOptimum{0.0, rate(eve, l.qber(), PreprocessingParams::disabled()), 1};
    }
    ScalarOptimum r = grid_golden_maximize([&](double q) { return rate(eve, l.qber(), PreprocessingParams(q)); },
                                           0.0, 0.5, settings.q_grid, settings.golden_tol);
    evaluations += r.evaluations;
    return r;
  };

  double t_worst = 0.0;
  if (spec.family.parameter_count > 0) {
    const auto [lo, hi] = spec.family.bounds(noise);
    t_worst = grid_golden_minimize([&](double t) { return best_over_q(spec.family.at(noise, t)).value; }, lo, hi,
                                   settings.parameter_grid, settings.golden_tol)
                  .x;
  }
  const BellSpectrum worst = spec.family.at(noise, t_worst);
  const ScalarOptimum at_worst = best_over_q(worst);
  report.rate = at_worst.value;
  report.q_opt = at_worst.x;
  report.worst = worst;
  report.worst_parameter = t_worst;
  report.evaluations = evaluations;
  report.wall_seconds = detail::seconds_since(t0);
  return report;
}

inline RateReport evaluate_bound(const ProtocolSpec& spec, double noise, BoundKind kind, bool preprocessing,
                                 const OptimizerSettings& settings = {}) {
  return kind == BoundKind::kLower ? lower_bound(spec, noise, preprocessing, settings)
                                   : upper_bound_bitwise(spec, noise, preprocessing, settings);
}

struct ThresholdReport {
  std::string protocol;
  std::string noise_name;
  BoundKind bound = BoundKind::kLower;
  bool preprocessing = true;
  double threshold = 0.0;
  double bracket_width = 0.0;
  std::size_t steps = 0;
  std::optional<double> overlap;
};

// Search bracket for the noise parameter: QBER in [0, 0.25], B92 delta in [0, 0.2].
inline std::pair<double, double> threshold_bracket(const ProtocolSpec& spec) {
  return spec.kind == ProtocolKind::kB92 ? std::pair{0.0, 0.2} : std::pair{0.0, 0.25};
}

// Largest noise at which the chosen bound is still strictly positive.
inline ThresholdReport threshold(const ProtocolSpec& spec, BoundKind kind, bool preprocessing,
                                 const OptimizerSettings& settings = {},
                                 std::optional<std::pair<double, double>> bracket = std::nullopt) {
  settings.validate();
  const auto [lo, hi] = bracket.value_or(threshold_bracket(spec));
  if (!(lo < hi)) throw DomainError("threshold: bracket must satisfy lo < hi");
  spec.check_noise(lo);
  spec.check_noise(hi);
  const BisectionResult b = bisect_transition(
      [&](double noise) {
        return evaluate_bound(spec, noise, kind, preprocessing, settings).rate > settings.positivity_floor;
      },
      lo, hi, settings.bisection_width);
  ThresholdReport r;
  r.protocol = spec.name;
  r.noise_name = spec.noise_name;
  r.bound = kind;
  r.preprocessing = preprocessing;
  r.threshold = b.x;
  r.bracket_width = b.bracket_width;
  r.steps = b.steps;
  r.overlap = spec.overlap;
  return r;
}

// B92 overlaps <phi0|phi1> = cos(theta), theta uniform on [pi/16, 7pi/16].
inline std::vector<double> b92_overlap_grid(std::size_t points = 21) {
  if (points < 2) throw DomainError("overlap grid needs at least two points");
  std::vector<double> out;
  const double lo = std::numbers::pi / 16.0;
  const double hi = 7.0 * std::numbers::pi / 16.0;
  for (std::size_t i = 0; i < points; ++i) {
    out.push_back(std::cos(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1)));
  }
  return out;
}

struct OverlapThreshold {
  double overlap = 0.0;
  double with_preprocessing = 0.0;
  double without_preprocessing = 0.0;
};

inline std::vector<OverlapThreshold> b92_overlap_scan(const std::vector<double>& overlaps,
                                                      const OptimizerSettings& settings = {}) {
  std::vector<OverlapThreshold> rows;
  for (double c : overlaps) {
    const ProtocolSpec spec = b92(c);
    rows.push_back(OverlapThreshold{c, threshold(spec, BoundKind::kLower, true, settings).threshold,
                                    threshold(spec, BoundKind::kLower, false, settings).threshold});
  }
  return rows;
}

}  // namespace keyrate
