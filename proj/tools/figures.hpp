#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "eqlab/allocation.hpp"
#include "eqlab/calibration.hpp"
#include "eqlab/policy.hpp"

namespace eqlab::figures {

struct NamedCurves {
  std::string name;
  std::vector<CalibrationCurve> curves;
};

// One panel per model, one line per group, dashed identity diagonal.
std::string reliability(const std::vector<NamedCurves>& models, const GroupSet& groups,
                        const std::string& title);

// Score density per group, one panel per policy, threshold lines per group.
std::string risk_distribution(std::span<const double> scores, std::span<const GroupId> ids,
                              const GroupSet& groups, const std::vector<Policy>& policies,
                              double t_star);

std::string blinding(const BlindingReport& report);

std::string frontier(const std::vector<FrontierPoint>& points,
                     const AllocationResult& unconstrained);

}  // namespace eqlab::figures
