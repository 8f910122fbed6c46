#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "eqlab/population.hpp"

namespace eqlab {

enum class BinningMode { EqualWidth, Quantile };

struct Binning {
  BinningMode mode = BinningMode::Quantile;
  std::size_t bin_count = 10;
};

struct CalibrationPoint {
  std::size_t bin = 0;  // index before empty bins were dropped
  double mean_predicted = 0.0;
  double observed_rate = 0.0;
  std::size_t count = 0;
};

struct CalibrationCurve {
  std::string group;
  std::vector<CalibrationPoint> points;
  Binning binning;

  std::size_t total_count() const;
};

// One curve per group that has at least one scored person, in declared group
// order. Equal-width bins split [0, 1]; quantile bins split each group's
// persons ordered by (score, label) into near-equal runs.
std::vector<CalibrationCurve> calibration_curve(std::span<const double> scores,
                                                std::span<const std::uint8_t> labels,
                                                std::span<const GroupId> groups,
                                                const GroupSet& group_set,
                                                const Binning& binning);

// Count-weighted mean of |mean_predicted - observed_rate|.
double expected_calibration_error(const CalibrationCurve& curve);

// Count-weighted mean of (observed_rate - mean_predicted). Positive means the
// scores under-estimate the group's risk.
double signed_gap(const CalibrationCurve& curve);

}  // namespace eqlab
