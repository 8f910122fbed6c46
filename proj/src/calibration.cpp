#include "eqlab/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "eqlab/error.hpp"

namespace eqlab {

std::size_t CalibrationCurve::total_count() const {
  std::size_t total = 0;
  for (const auto& p : points) total += p.count;
  return total;
}

namespace {

struct Scored {
  double score;
  std::uint8_t label;
};

CalibrationPoint summarize(std::size_t bin, std::span<const Scored> members) {
  CalibrationPoint point;
  point.bin = bin;
  point.count = members.size();
  double score_sum = 0.0;
  std::size_t positives = 0;
  for (const auto& m : members) {
    score_sum += m.score;
    positives += m.label;
  }
  point.mean_predicted = score_sum / static_cast<double>(members.size());
  point.observed_rate = static_cast<double>(positives) / static_cast<double>(members.size());
  return point;
}

double weighted_mean(const CalibrationCurve& curve, bool absolute) {
  if (curve.points.empty()) throw ValidationError("calibration curve is empty");
  double total = 0.0;
  double weight = 0.0;
  for (const auto& p : curve.points) {
    const double gap = p.observed_rate - p.mean_predicted;
    total += static_cast<double>(p.count) * (absolute ? std::abs(gap) : gap);
    weight += static_cast<double>(p.count);
  }
  return total / weight;
}

}  // namespace

std::vector<CalibrationCurve> calibration_curve(std::span<const double> scores,
                                                std::span<const std::uint8_t> labels,
                                                std::span<const GroupId> groups,
                                                const GroupSet& group_set,
                                                const Binning& binning) {
  if (scores.size() != labels.size() || scores.size() != groups.size()) {
    throw ValidationError("calibration: scores, labels and groups differ in length");
  }
  if (binning.bin_count == 0) throw ValidationError("calibration: bin_count must be >= 1");

  std::vector<std::vector<Scored>> by_group(group_set.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (index(groups[i]) >= group_set.size()) {
      throw EncodingError("calibration: person " + std::to_string(i) + " has an undeclared group");
    }
    by_group[index(groups[i])].push_back({scores[i], labels[i]});
  }

  std::vector<CalibrationCurve> curves;
  for (std::size_t g = 0; g < by_group.size(); ++g) {
    auto& members = by_group[g];
    if (members.empty()) continue;
    CalibrationCurve curve;
    curve.group = group_set.labels()[g];
    curve.binning = binning;
    // Sorting on (score, label) makes the bins a function of the multiset of
    // pairs, so input order never matters.
    std::sort(members.begin(), members.end(), [](const Scored& a, const Scored& b) {
      return a.score != b.score ? a.score < b.score : a.label < b.label;
    });
    const std::size_t n = members.size();
    const std::size_t bins = binning.bin_count;
    if (binning.mode == BinningMode::Quantile) {
      if (n < bins) {
        throw ValidationError("calibration: group '" + curve.group + "' has " +
                              std::to_string(n) + " scored persons, fewer than " +
                              std::to_string(bins) + " quantile bins");
      }
      for (std::size_t b = 0; b < bins; ++b) {
        const std::size_t begin = b * n / bins;
        const std::size_t end = (b + 1) * n / bins;
        curve.points.push_back(
            summarize(b, std::span<const Scored>(members).subspan(begin, end - begin)));
      }
    } else {
      std::size_t begin = 0;
      for (std::size_t b = 0; b < bins; ++b) {
        std::size_t end = begin;
        while (end < n) {
          const double s = std::clamp(members[end].score, 0.0, 1.0);
          const auto slot = std::min(bins - 1, static_cast<std::size_t>(s * static_cast<double>(bins)));
          if (slot != b) break;
          ++end;
        }
        if (end > begin) {
          curve.points.push_back(
              summarize(b, std::span<const Scored>(members).subspan(begin, end - begin)));
        }
        begin = end;
      }
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

double expected_calibration_error(const CalibrationCurve& curve) {
  return weighted_mean(curve, true);
}

double signed_gap(const CalibrationCurve& curve) { return weighted_mean(curve, false); }

}  // namespace eqlab
