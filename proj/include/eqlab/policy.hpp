#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eqlab/population.hpp"
#include "eqlab/riskmodel.hpp"

namespace eqlab {

// Threshold that screens nobody: every probability lies below it.
inline constexpr double kScreenNone = 1.0 + 0x1.0p-52;

// Screen iff score >= threshold(group).
struct Policy {
  std::map<std::string, double> thresholds;
  std::string label;

  double threshold(std::string_view group) const;
};

// Linear screening utility u = p - t*; not screening is worth 0.
struct UtilityModel {
  double threshold = 0.015;
};

Policy uniform_policy(double t, const GroupSet& groups, std::string label = "uniform");
bool screen(double score, const Policy& policy, std::string_view group);

// Per group, screens the round(target_rate * n_g) highest scores; ties at the
// cut-off are all screened.
Policy equalize_decision_rates(std::span<const double> scores, std::span<const GroupId> groups,
                               const GroupSet& group_set, double target_rate,
                               std::string label = "equal-rate");

// Per group, leaves exactly floor(target_fnr * n_pos_g) of the lowest-scored
// true positives below the threshold (absent score ties).
Policy equalize_fnr(std::span<const double> scores, std::span<const std::uint8_t> labels,
                    std::span<const GroupId> groups, const GroupSet& group_set,
                    double target_fnr, std::string label = "equal-fnr");

struct GroupMetrics {
  std::string group;
  double threshold = 0.0;
  std::size_t count = 0;
  std::size_t positives = 0;
  std::size_t screened_count = 0;
  // Rates with an empty denominator are reported as 0.
  double decision_rate = 0.0;
  double fnr = 0.0;
  double fpr = 0.0;
  double welfare = 0.0;
};

struct PolicyMetrics {
  std::string policy;
  std::vector<GroupMetrics> groups;  // groups with at least one person
  double welfare = 0.0;
};

// Decisions use `scores`; welfare is sum over screened persons of
// (risk - t*), where risk comes from `utility_risks`, or from `scores` when
// that span is empty.
PolicyMetrics evaluate_policy(const Policy& policy, std::span<const double> scores,
                              std::span<const std::uint8_t> labels,
                              std::span<const GroupId> groups, const GroupSet& group_set,
                              const UtilityModel& utility = {},
                              std::span<const double> utility_risks = {});

double welfare(const Policy& policy, std::span<const double> scores,
               std::span<const double> risks, std::span<const GroupId> groups,
               const GroupSet& group_set, const UtilityModel& utility = {});

// Per-group welfare in declared group order.
std::vector<double> welfare_by_group(const Policy& policy, std::span<const double> scores,
                                     std::span<const double> risks,
                                     std::span<const GroupId> groups,
                                     const GroupSet& group_set,
                                     const UtilityModel& utility = {});

struct BlindingGroupCost {
  std::string group;
  std::size_t count = 0;
  // Blind says no, aware says yes.
  double under_screened_frac = 0.0;
  // Blind says yes, aware says no.
  double over_screened_frac = 0.0;
  // Welfare of blind decisions minus aware decisions, on aware scores.
  double welfare_delta = 0.0;
};

struct BlindingReport {
  std::vector<BlindingGroupCost> groups;
  double welfare_delta = 0.0;
};

BlindingReport blinding_cost(std::span<const double> blind_scores,
                             std::span<const double> aware_scores,
                             std::span<const GroupId> groups, const GroupSet& group_set,
                             const UtilityModel& utility = {});

BlindingReport blinding_cost(const FittedModel& blind_model, const FittedModel& aware_model,
                             const Dataset& data, const UtilityModel& utility = {});

}  // namespace eqlab
