#pragma once

// Published security thresholds and the checks that compare this library's
// numbers against them.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "keyrate/protocol.hpp"
#include "keyrate/rates.hpp"

namespace keyrate {

enum class CheckStatus { kPass, kFail, kGap };

inline const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::kPass: return "pass";
    case CheckStatus::kFail: return "fail";
    case CheckStatus::kGap: return "gap";
  }
  return "fail";
}

struct ReferenceCheck {
  std::string item;
  double expected = 0.0;
  double tolerance = 0.0;
  double computed = 0.0;
  CheckStatus status = CheckStatus::kFail;
  std::string note;
};

namespace reference {

inline constexpr double kBB84Lower = 0.124;
inline constexpr double kBB84LowerTol = 0.001;
inline constexpr double kBB84NoPreprocessing = 0.1100;
inline constexpr double kBB84NoPreprocessingTol = 0.0005;
inline constexpr double kBB84Upper = 0.146;
inline constexpr double kBB84UpperTol = 0.003;
inline constexpr double kBB84UpperCeiling = 0.148;
inline constexpr double kSixStateLower = 0.1412;
inline constexpr double kSixStateNoPreprocessing = 0.127;
inline constexpr double kSixStateTol = 0.001;
inline constexpr double kSixStateUpper = 0.1623;
inline constexpr double kB92Lower = 0.0278;
inline constexpr double kB92NoPreprocessing = 0.0240;
inline constexpr double kB92Tol = 0.0015;
inline constexpr double kFeasibleDeviation = 6e-3;

}  // namespace reference

// The B92 overlap is not fixed by the reference table. It is calibrated on
// the overlap grid against the reference no-preprocessing threshold (0.0240); the
// preprocessing threshold at that overlap is then a prediction.
struct B92Calibration {
  std::vector<OverlapThreshold> scan;
  OverlapThreshold chosen;
  OverlapThreshold largest;  // grid point with the largest preprocessing threshold
};

inline B92Calibration calibrate_b92(const OptimizerSettings& settings = {}, std::size_t grid_points = 21) {
  B92Calibration cal;
  cal.scan = b92_overlap_scan(b92_overlap_grid(grid_points), settings);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& row : cal.scan) {
    const double d = std::abs(row.without_preprocessing - reference::kB92NoPreprocessing);
    if (d < best) {
      best = d;
      cal.chosen = row;
    }
    if (row.with_preprocessing > cal.largest.with_preprocessing) cal.largest = row;
  }
  return cal;
}

inline double max_feasible_deviation(const ProtocolSpec& spec, double qber, std::size_t samples, std::uint64_t seed,
                                     std::size_t* accepted = nullptr) {
  const auto spectra = sample_feasible_set(spec, qber, samples, seed);
  if (accepted) *accepted = spectra.size();
  double worst = 0.0;
  for (const auto& l : spectra) worst = std::max(worst, family_distance(spec.family, qber, l));
  return worst;
}

inline std::vector<ReferenceCheck> reference_checks(std::uint64_t seed, const OptimizerSettings& settings = {}) {
  using namespace reference;
  std::vector<ReferenceCheck> out;
  auto within = [](double computed, double expected, double tol) { return std::abs(computed - expected) <= tol; };
  auto add = [&](std::string item, double expected, double tol, double computed, bool gap_allowed, std::string note) {
    CheckStatus st = within(computed, expected, tol) ? CheckStatus::kPass
                                                     : (gap_allowed ? CheckStatus::kGap : CheckStatus::kFail);
    out.push_back(ReferenceCheck{std::move(item), expected, tol, computed, st, std::move(note)});
  };

  const ProtocolSpec bb = bb84();
  const ProtocolSpec six = six_state();
  const double bb_lower = threshold(bb, BoundKind::kLower, true, settings).threshold;
  add("bb84_lower_preprocessing", kBB84Lower, kBB84LowerTol, bb_lower, false, "");
  add("bb84_lower_no_preprocessing", kBB84NoPreprocessing, kBB84NoPreprocessingTol,
      threshold(bb, BoundKind::kLower, false, settings).threshold, false, "");
  const double bb_upper = threshold(bb, BoundKind::kUpper, true, settings).threshold;
  add("bb84_upper_bitwise", kBB84Upper, kBB84UpperTol, bb_upper, true,
      "bitwise flip preprocessing only; saddle point makes upper equal lower");
  add("six_state_lower_preprocessing", kSixStateLower, kSixStateTol,
      threshold(six, BoundKind::kLower, true, settings).threshold, false, "");
  add("six_state_lower_no_preprocessing", kSixStateNoPreprocessing, kSixStateTol,
      threshold(six, BoundKind::kLower, false, settings).threshold, false, "");
  add("six_state_upper_bitwise", kSixStateUpper, kSixStateTol,
      threshold(six, BoundKind::kUpper, true, settings).threshold, true,
      "0-parameter attack family forces upper equal lower");

  const B92Calibration cal = calibrate_b92(settings);
  const std::string at = "overlap " + std::to_string(cal.chosen.overlap);
  add("b92_lower_preprocessing", kB92Lower, kB92Tol, cal.chosen.with_preprocessing, false,
      at + " calibrated on the no-preprocessing value");
  add("b92_lower_no_preprocessing", kB92NoPreprocessing, kB92Tol, cal.chosen.without_preprocessing, false,
      at + " (calibration target)");

  for (const ProtocolSpec* spec : {&bb, &six}) {
    std::size_t accepted = 0;
    const double dev = max_feasible_deviation(*spec, 0.1, 100000, seed, &accepted);
    add(spec->name + "_feasible_set_deviation", 0.0, kFeasibleDeviation, dev, false,
        "QBER 0.1, " + std::to_string(accepted) + " accepted samples");
    if (accepted == 0) out.back().status = CheckStatus::kFail;
  }
  return out;
}

}  // namespace keyrate
