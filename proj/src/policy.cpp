#include "eqlab/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "eqlab/error.hpp"

namespace eqlab {
namespace {

void check_lengths(std::size_t scores, std::size_t other, const char* what) {
  if (scores != other) {
    throw ValidationError(std::string("policy: scores and ") + what + " differ in length");
  }
}

// Thresholds indexed by GroupId; throws when a present group has none.
std::vector<double> thresholds_by_id(const Policy& policy, std::span<const GroupId> groups,
                                     const GroupSet& group_set) {
  std::vector<double> thresholds(group_set.size(), kScreenNone);
  std::vector<bool> present(group_set.size(), false);
  for (const auto g : groups) {
    if (index(g) >= group_set.size()) throw EncodingError("policy: undeclared group id");
    present[index(g)] = true;
  }
  for (std::size_t g = 0; g < group_set.size(); ++g) {
    if (present[g]) thresholds[g] = policy.threshold(group_set.labels()[g]);
  }
  return thresholds;
}

std::vector<std::vector<std::size_t>> members_by_group(std::span<const GroupId> groups,
                                                       std::size_t group_count) {
  std::vector<std::vector<std::size_t>> members(group_count);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (index(groups[i]) >= group_count) throw EncodingError("policy: undeclared group id");
    members[index(groups[i])].push_back(i);
  }
  return members;
}

void validate_threshold(double t, const std::string& group) {
  if (!(t >= 0.0 && t <= 1.0) && t != kScreenNone) {
    throw ValidationError("policy: threshold for " + group + " must lie in [0,1]");
  }
}

}  // namespace

double Policy::threshold(std::string_view group) const {
  auto it = thresholds.find(std::string(group));
  if (it == thresholds.end()) {
    throw EncodingError("policy '" + label + "' has no threshold for group '" +
                        std::string(group) + "'");
  }
  return it->second;
}

Policy uniform_policy(double t, const GroupSet& groups, std::string label) {
  if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("uniform threshold must lie in [0,1]");
  Policy policy;
  policy.label = std::move(label);
  for (const auto& g : groups.labels()) policy.thresholds[g] = t;
  return policy;
}

bool screen(double score, const Policy& policy, std::string_view group) {
  return score >= policy.threshold(group);
}

Policy equalize_decision_rates(std::span<const double> scores, std::span<const GroupId> groups,
                               const GroupSet& group_set, double target_rate,
                               std::string label) {
  check_lengths(scores.size(), groups.size(), "groups");
  if (!(target_rate >= 0.0 && target_rate <= 1.0)) {
    throw ValidationError("target decision rate must lie in [0,1]");
  }
  if (scores.empty()) throw ValidationError("equal-rate policy: no scored persons");
  Policy policy;
  policy.label = std::move(label);
  auto members = members_by_group(groups, group_set.size());
  for (std::size_t g = 0; g < members.size(); ++g) {
    auto& idx = members[g];
    if (idx.empty()) continue;
    // Descending score, ties by position (ids are dense, so by id).
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    const auto k = static_cast<std::size_t>(
        std::llround(target_rate * static_cast<double>(idx.size())));
    const double t = k == 0 ? kScreenNone : scores[idx[k - 1]];
    validate_threshold(t, group_set.labels()[g]);
    policy.thresholds[group_set.labels()[g]] = t;
  }
  return policy;
}

Policy equalize_fnr(std::span<const double> scores, std::span<const std::uint8_t> labels,
                    std::span<const GroupId> groups, const GroupSet& group_set,
                    double target_fnr, std::string label) {
  check_lengths(scores.size(), labels.size(), "labels");
  check_lengths(scores.size(), groups.size(), "groups");
  if (!(target_fnr >= 0.0 && target_fnr < 1.0)) {
    throw ValidationError("target false negative rate must lie in [0,1)");
  }
  Policy policy;
  policy.label = std::move(label);
  auto members = members_by_group(groups, group_set.size());
  for (std::size_t g = 0; g < members.size(); ++g) {
    if (members[g].empty()) continue;
    std::vector<double> positives;
    for (const auto i : members[g]) {
      if (labels[i]) positives.push_back(scores[i]);
    }
    if (positives.empty()) {
      throw ValidationError("equal-FNR policy: group '" + group_set.labels()[g] +
                            "' has no true positives");
    }
    std::sort(positives.begin(), positives.end());
    const auto m = static_cast<std::size_t>(
        std::floor(target_fnr * static_cast<double>(positives.size())));
    const double t = positives[m];
    validate_threshold(t, group_set.labels()[g]);
    policy.thresholds[group_set.labels()[g]] = t;
  }
  return policy;
}

PolicyMetrics evaluate_policy(const Policy& policy, std::span<const double> scores,
                              std::span<const std::uint8_t> labels,
                              std::span<const GroupId> groups, const GroupSet& group_set,
                              const UtilityModel& utility,
                              std::span<const double> utility_risks) {
  check_lengths(scores.size(), labels.size(), "labels");
  check_lengths(scores.size(), groups.size(), "groups");
  if (utility_risks.empty()) utility_risks = scores;
  check_lengths(scores.size(), utility_risks.size(), "risks");

  const auto thresholds = thresholds_by_id(policy, groups, group_set);
  std::vector<GroupMetrics> per_group(group_set.size());
  std::vector<std::size_t> false_negatives(group_set.size(), 0);
  std::vector<std::size_t> false_positives(group_set.size(), 0);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const std::size_t g = index(groups[i]);
    auto& m = per_group[g];
    const bool screened = scores[i] >= thresholds[g];
    ++m.count;
    if (labels[i]) ++m.positives;
    if (screened) {
      ++m.screened_count;
      m.welfare += utility_risks[i] - utility.threshold;
      if (!labels[i]) ++false_positives[g];
    } else if (labels[i]) {
      ++false_negatives[g];
    }
  }

  PolicyMetrics metrics;
  metrics.policy = policy.label;
  for (std::size_t g = 0; g < per_group.size(); ++g) {
    auto& m = per_group[g];
    if (m.count == 0) continue;
    m.group = group_set.labels()[g];
    m.threshold = thresholds[g];
    const std::size_t negatives = m.count - m.positives;
    m.decision_rate = static_cast<double>(m.screened_count) / static_cast<double>(m.count);
    m.fnr = m.positives == 0 ? 0.0
                             : static_cast<double>(false_negatives[g]) /
                                   static_cast<double>(m.positives);
    m.fpr = negatives == 0 ? 0.0
                           : static_cast<double>(false_positives[g]) /
                                 static_cast<double>(negatives);
    metrics.welfare += m.welfare;
    metrics.groups.push_back(m);
  }
  return metrics;
}

std::vector<double> welfare_by_group(const Policy& policy, std::span<const double> scores,
                                     std::span<const double> risks,
                                     std::span<const GroupId> groups,
                                     const GroupSet& group_set, const UtilityModel& utility) {
  check_lengths(scores.size(), risks.size(), "risks");
  check_lengths(scores.size(), groups.size(), "groups");
  const auto thresholds = thresholds_by_id(policy, groups, group_set);
  std::vector<double> totals(group_set.size(), 0.0);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const std::size_t g = index(groups[i]);
    if (scores[i] >= thresholds[g]) totals[g] += risks[i] - utility.threshold;
  }
  return totals;
}

double welfare(const Policy& policy, std::span<const double> scores,
               std::span<const double> risks, std::span<const GroupId> groups,
               const GroupSet& group_set, const UtilityModel& utility) {
  const auto totals = welfare_by_group(policy, scores, risks, groups, group_set, utility);
  return std::accumulate(totals.begin(), totals.end(), 0.0);
}

BlindingReport blinding_cost(std::span<const double> blind_scores,
                             std::span<const double> aware_scores,
                             std::span<const GroupId> groups, const GroupSet& group_set,
                             const UtilityModel& utility) {
  check_lengths(blind_scores.size(), aware_scores.size(), "aware scores");
  check_lengths(blind_scores.size(), groups.size(), "groups");
  const double t = utility.threshold;
  std::vector<BlindingGroupCost> per_group(group_set.size());
  std::vector<std::size_t> under(group_set.size(), 0), over(group_set.size(), 0);
  for (std::size_t i = 0; i < blind_scores.size(); ++i) {
    const std::size_t g = index(groups[i]);
    if (g >= group_set.size()) throw EncodingError("blinding: undeclared group id");
    const bool blind = blind_scores[i] >= t;
    const bool aware = aware_scores[i] >= t;
    auto& c = per_group[g];
    ++c.count;
    if (!blind && aware) {
      ++under[g];
      c.welfare_delta -= aware_scores[i] - t;
    } else if (blind && !aware) {
      ++over[g];
      c.welfare_delta += aware_scores[i] - t;
    }
  }
  BlindingReport report;
  for (std::size_t g = 0; g < per_group.size(); ++g) {
    auto& c = per_group[g];
    if (c.count == 0) continue;
    c.group = group_set.labels()[g];
    c.under_screened_frac = static_cast<double>(under[g]) / static_cast<double>(c.count);
    c.over_screened_frac = static_cast<double>(over[g]) / static_cast<double>(c.count);
    report.welfare_delta += c.welfare_delta;
    report.groups.push_back(c);
  }
  return report;
}

BlindingReport blinding_cost(const FittedModel& blind_model, const FittedModel& aware_model,
                             const Dataset& data, const UtilityModel& utility) {
  const auto blind = predict_all(blind_model, data);
  const auto aware = predict_all(aware_model, data);
  const auto groups = data.group_ids();
  return blinding_cost(blind, aware, groups, data.groups(), utility);
}

}  // namespace eqlab
