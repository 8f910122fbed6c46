#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eqlab/population.hpp"

namespace eqlab {

struct Claimant {
  std::int64_t id = 0;
  GroupId group{};
  // Probability of appearing without a voucher; a voucher makes it certain.
  double appear_prob = 0.0;
  // Voucher cost in dollars.
  double cost = 0.0;

  double benefit() const { return 1.0 - appear_prob; }
};

// Budget-constrained voucher allocation. The share constraint counts
// vouchers (sum of x_i) going to `focus_group`.
struct AllocationInstance {
  GroupSet groups;
  GroupId focus_group{};
  std::vector<Claimant> persons;
  double cost_per_mile = 5.0;
  double budget = 10000.0;

  // Throws ValidationError.
  void validate() const;
};

// Costs are cost_per_mile * distance_miles.
AllocationInstance make_instance(const Dataset& data, double budget, double cost_per_mile,
                                 std::string_view focus_group = "Black");

struct AllocationResult {
  std::vector<double> x;  // per person, in [0, 1]
  double objective = 0.0;  // expected additional appearances
  double spend = 0.0;
  std::vector<double> voucher_counts;  // per group, declared order
  double share = 0.0;  // focus vouchers / all vouchers; 0 when none
  std::vector<std::size_t> fractional;  // persons with 0 < x < 1

  double vouchers(const GroupSet& groups, std::string_view group) const;
};

AllocationResult summarize_allocation(const AllocationInstance& inst, std::vector<double> x);

// True when some nonzero allocation has focus share `share` (ignoring the
// budget). Persons with zero cost and zero benefit never receive vouchers.
bool share_feasible(const AllocationInstance& inst, double share);

// Fractional knapsack on benefit/cost, zero-cost persons first.
AllocationResult unconstrained_alloc(const AllocationInstance& inst);

// Maximizes sum b_i x_i subject to sum c_i x_i <= B,
// sum_{focus} x_i = share * sum x_i, 0 <= x_i <= 1. Returns a vertex
// solution that passed a primal/dual optimality certificate.
// Throws InfeasibleError or SolverError.
AllocationResult solve_constrained(const AllocationInstance& inst, double share);

struct OptimalityCertificate {
  double budget_dual = 0.0;
  double share_dual = 0.0;
  double primal_objective = 0.0;
  double dual_bound = 0.0;
  bool ok = false;
  std::string failure;
};

// Independent check of an allocation against the LP for `share`: primal
// feasibility, reduced-cost signs, and the duality gap.
OptimalityCertificate certify(const AllocationInstance& inst, double share,
                              const AllocationResult& result, double budget_dual,
                              double share_dual);

enum class PointStatus { Ok, Infeasible, SolverFailure };

struct FrontierPoint {
  double share = 0.0;
  PointStatus status = PointStatus::Ok;
  std::string message;
  AllocationResult result;

  bool ok() const { return status == PointStatus::Ok; }
  double value() const { return result.objective; }
};

// One point per grid value; failures are recorded on the point.
std::vector<FrontierPoint> frontier(const AllocationInstance& inst,
                                    std::span<const double> shares, unsigned threads = 0);

// Frontier for "focus share >= s": running max over feasible points with
// share >= s. Input order is preserved; infeasible points are dropped.
std::vector<FrontierPoint> at_least_frontier(const std::vector<FrontierPoint>& points);

// Evenly spaced shares 0, 1/(n-1), ..., 1.
std::vector<double> share_grid(std::size_t n);

struct OptionRow {
  std::string option;
  double share = 0.0;
  double total_appearances = 0.0;  // additional appearances
  double spend = 0.0;
  std::vector<double> appearance_gain;  // per group
  std::vector<double> missed;           // per group: size - expected appearances
};

// Rows labelled A, B, C, ... Shares missing from `points` are solved.
std::vector<OptionRow> option_table(const AllocationInstance& inst,
                                    const std::vector<FrontierPoint>& points,
                                    std::span<const double> shares);

}  // namespace eqlab
