#include "eqlab/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "eqlab/error.hpp"

namespace eqlab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTolerance = 1e-9;
constexpr double kReducedCostTolerance = 1e-11;
constexpr double kBoundSnap = 1e-12;
constexpr int kDegenerateStreakForBland = 50;

// Certificate tolerances, in original units.
constexpr double kCertBudgetRel = 1e-9;
constexpr double kCertShareRel = 1e-9;
constexpr double kCertReducedCost = 1e-8;
constexpr double kCertGapRel = 1e-9;

bool degenerate_person(const Claimant& c) { return c.cost == 0.0 && c.benefit() == 0.0; }

bool is_focus(const AllocationInstance& inst, const Claimant& c) {
  return c.group == inst.focus_group;
}

// Coefficient of x_i in  sum_focus x - share * sum x = 0.
double share_coefficient(const AllocationInstance& inst, const Claimant& c, double share) {
  return (is_focus(inst, c) ? 1.0 : 0.0) - share;
}

void check_share(double share) {
  if (!(share >= 0.0 && share <= 1.0)) throw ValidationError("share must lie in [0,1]");
}

// Bounded-variable primal simplex on the two-row LP
//   max c'x  s.t.  A x = rhs,  0 <= x <= upper.
// Row 0 is the (scaled) budget with an explicit slack column; row 1 is the
// share equality with a fixed-at-zero artificial column. x = 0 is feasible,
// so no phase one is needed.
class TwoRowSimplex {
 public:
  struct Column {
    double row0;
    double row1;
    double cost;
    double upper;
  };

  TwoRowSimplex(std::vector<Column> columns, double rhs0)
      : columns_(std::move(columns)), rhs0_(rhs0) {
    slack_ = columns_.size();
    columns_.push_back({1.0, 0.0, 0.0, kInf});
    artificial_ = columns_.size();
    columns_.push_back({0.0, 1.0, 0.0, 0.0});
    value_.assign(columns_.size(), 0.0);
    basic_.assign(columns_.size(), false);
    basis_[0] = slack_;
    basis_[1] = artificial_;
    basic_[slack_] = basic_[artificial_] = true;
  }

  void solve() {
    const std::size_t max_iterations = 50 * (columns_.size() + 10);
    int degenerate_streak = 0;
    for (std::size_t iteration = 0; iteration < max_iterations; ++iteration) {
      factor();
      const bool bland = degenerate_streak >= kDegenerateStreakForBland;

      std::size_t entering = columns_.size();
      double direction = 0.0;
      double best = 0.0;
      for (std::size_t j = 0; j < columns_.size(); ++j) {
        if (basic_[j] || j == artificial_) continue;
        const double d = reduced_cost(j);
        double dir = 0.0;
        if (value_[j] == 0.0 && d > kReducedCostTolerance) {
          dir = 1.0;
        } else if (value_[j] != 0.0 && d < -kReducedCostTolerance) {
          dir = -1.0;
        }
        if (dir == 0.0) continue;
        if (bland) {
          entering = j;
          direction = dir;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          entering = j;
          direction = dir;
        }
      }
      if (entering == columns_.size()) return;

      const Column& q = columns_[entering];
      const double alpha0 = inv_[0][0] * q.row0 + inv_[0][1] * q.row1;
      const double alpha1 = inv_[1][0] * q.row0 + inv_[1][1] * q.row1;
      const double delta[2] = {-direction * alpha0, -direction * alpha1};

      // Ratio test; the entering variable's own bound flip wins ties.
      double step = q.upper;
      int leaving = -1;
      bool leaves_at_upper = false;
      for (int i = 0; i < 2; ++i) {
        const std::size_t b = basis_[i];
        double limit = kInf;
        bool at_upper = false;
        if (delta[i] < -kPivotTolerance) {
          limit = std::max(0.0, basic_value_[i]) / -delta[i];
        } else if (delta[i] > kPivotTolerance && std::isfinite(columns_[b].upper)) {
          limit = std::max(0.0, columns_[b].upper - basic_value_[i]) / delta[i];
          at_upper = true;
        } else {
          continue;
        }
        const bool better =
            limit < step ||
            (limit == step && leaving >= 0 &&
             (bland ? b < basis_[leaving]
                    : std::abs(delta[i]) > std::abs(delta[leaving])));
        if (better) {
          step = limit;
          leaving = i;
          leaves_at_upper = at_upper;
        }
      }
      if (!std::isfinite(step)) throw SolverError("allocation LP reported unbounded");

      degenerate_streak = step <= kBoundSnap ? degenerate_streak + 1 : 0;
      if (leaving < 0) {
        value_[entering] = direction > 0.0 ? q.upper : 0.0;
      } else {
        const std::size_t out = basis_[leaving];
        basic_[out] = false;
        value_[out] = leaves_at_upper ? columns_[out].upper : 0.0;
        basis_[leaving] = entering;
        basic_[entering] = true;
        value_[entering] = 0.0;
      }
    }
    throw SolverError("allocation LP exceeded its iteration limit");
  }

  // Primal values of the first `count` (structural) columns.
  std::vector<double> primal(std::size_t count) {
    factor();
    std::vector<double> x(count);
    for (std::size_t j = 0; j < count; ++j) x[j] = value_[j];
    for (int i = 0; i < 2; ++i) {
      if (basis_[i] < count) x[basis_[i]] = basic_value_[i];
    }
    return x;
  }

  double dual0() const { return dual_[0]; }
  double dual1() const { return dual_[1]; }

 private:
  double reduced_cost(std::size_t j) const {
    const Column& c = columns_[j];
    return c.cost - dual_[0] * c.row0 - dual_[1] * c.row1;
  }

  // Basis inverse, basic values and duals for the current basis.
  void factor() {
    const Column& b0 = columns_[basis_[0]];
    const Column& b1 = columns_[basis_[1]];
    const double det = b0.row0 * b1.row1 - b1.row0 * b0.row1;
    if (std::abs(det) < 1e-14) throw SolverError("allocation LP basis became singular");
    inv_[0][0] = b1.row1 / det;
    inv_[0][1] = -b1.row0 / det;
    inv_[1][0] = -b0.row1 / det;
    inv_[1][1] = b0.row0 / det;

    double r0 = rhs0_;
    double r1 = 0.0;
    for (std::size_t j = 0; j < columns_.size(); ++j) {
      if (basic_[j] || value_[j] == 0.0) continue;
      r0 -= columns_[j].row0 * value_[j];
      r1 -= columns_[j].row1 * value_[j];
    }
    basic_value_[0] = inv_[0][0] * r0 + inv_[0][1] * r1;
    basic_value_[1] = inv_[1][0] * r0 + inv_[1][1] * r1;

    dual_[0] = inv_[0][0] * b0.cost + inv_[1][0] * b1.cost;
    dual_[1] = inv_[0][1] * b0.cost + inv_[1][1] * b1.cost;
  }

  std::vector<Column> columns_;
  double rhs0_;
  std::size_t slack_ = 0;
  std::size_t artificial_ = 0;
  std::vector<double> value_;  // nonbasic values
  std::vector<bool> basic_;
  std::size_t basis_[2] = {0, 0};
  double inv_[2][2] = {{1, 0}, {0, 1}};
  double basic_value_[2] = {0, 0};
  double dual_[2] = {0, 0};
};

double snap_unit(double v) {
  if (v < kBoundSnap) return 0.0;
  if (v > 1.0 - kBoundSnap) return 1.0;
  return v;
}

}  // namespace

void AllocationInstance::validate() const {
  if (index(focus_group) >= groups.size()) {
    throw ValidationError("allocation: focus group is not declared");
  }
  if (!(std::isfinite(budget) && budget >= 0.0)) {
    throw ValidationError("allocation: budget must be a finite value >= 0");
  }
  if (!(std::isfinite(cost_per_mile) && cost_per_mile >= 0.0)) {
    throw ValidationError("allocation: cost per mile must be a finite value >= 0");
  }
  for (const auto& c : persons) {
    if (!(std::isfinite(c.cost) && c.cost >= 0.0)) {
      throw ValidationError("allocation: person " + std::to_string(c.id) + " has invalid cost");
    }
    if (!(c.appear_prob >= 0.0 && c.appear_prob <= 1.0)) {
      throw ValidationError("allocation: person " + std::to_string(c.id) +
                            " has appear_prob outside [0,1]");
    }
    if (index(c.group) >= groups.size()) {
      throw ValidationError("allocation: person " + std::to_string(c.id) +
                            " has an undeclared group");
    }
  }
}

AllocationInstance make_instance(const Dataset& data, double budget, double cost_per_mile,
                                 std::string_view focus_group) {
  AllocationInstance inst;
  inst.groups = data.groups();
  const auto focus = data.groups().find(focus_group);
  if (!focus) {
    throw ValidationError("allocation: focus group '" + std::string(focus_group) +
                          "' is not declared");
  }
  inst.focus_group = *focus;
  inst.budget = budget;
  inst.cost_per_mile = cost_per_mile;
  inst.persons.reserve(data.size());
  for (const auto& p : data.persons()) {
    inst.persons.push_back({p.id, p.group, p.appear_prob, cost_per_mile * p.distance_miles});
  }
  inst.validate();
  return inst;
}

double AllocationResult::vouchers(const GroupSet& groups, std::string_view group) const {
  const auto id = groups.find(group);
  if (!id || index(*id) >= voucher_counts.size()) return 0.0;
  return voucher_counts[index(*id)];
}

AllocationResult summarize_allocation(const AllocationInstance& inst, std::vector<double> x) {
  AllocationResult result;
  result.voucher_counts.assign(inst.groups.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Claimant& c = inst.persons[i];
    result.objective += c.benefit() * x[i];
    result.spend += c.cost * x[i];
    result.voucher_counts[index(c.group)] += x[i];
    total += x[i];
    if (x[i] > 0.0 && x[i] < 1.0) result.fractional.push_back(i);
  }
  result.share = total > 0.0 ? result.voucher_counts[index(inst.focus_group)] / total : 0.0;
  result.x = std::move(x);
  return result;
}

bool share_feasible(const AllocationInstance& inst, double share) {
  bool focus = false;
  bool other = false;
  for (const auto& c : inst.persons) {
    if (degenerate_person(c)) continue;
    (is_focus(inst, c) ? focus : other) = true;
  }
  if (share > 0.0 && !focus) return false;
  if (share < 1.0 && !other) return false;
  return true;
}

AllocationResult unconstrained_alloc(const AllocationInstance& inst) {
  inst.validate();
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < inst.persons.size(); ++i) {
    if (!degenerate_person(inst.persons[i])) order.push_back(i);
  }
  // Zero-cost persons first, then benefit per dollar descending; stable by id.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Claimant& ca = inst.persons[a];
    const Claimant& cb = inst.persons[b];
    if ((ca.cost == 0.0) != (cb.cost == 0.0)) return ca.cost == 0.0;
    if (ca.cost == 0.0) return false;
    return ca.benefit() * cb.cost > cb.benefit() * ca.cost;
  });
  std::vector<double> x(inst.persons.size(), 0.0);
  double remaining = inst.budget;
  for (const auto i : order) {
    const double cost = inst.persons[i].cost;
    if (cost <= remaining) {
      x[i] = 1.0;
      remaining -= cost;
    } else {
      x[i] = remaining / cost;
      break;
    }
  }
  return summarize_allocation(inst, std::move(x));
}

AllocationResult solve_constrained(const AllocationInstance& inst, double share) {
  inst.validate();
  check_share(share);
  if (!share_feasible(inst, share)) {
    throw InfeasibleError("no allocation gives the focus group a voucher share of " +
                          std::to_string(share));
  }

  std::vector<std::size_t> active;
  double scale = std::max(1.0, inst.budget);
  for (std::size_t i = 0; i < inst.persons.size(); ++i) {
    if (degenerate_person(inst.persons[i])) continue;
    active.push_back(i);
    scale = std::max(scale, inst.persons[i].cost);
  }
  std::vector<TwoRowSimplex::Column> columns;
  columns.reserve(active.size());
  for (const auto i : active) {
    const Claimant& c = inst.persons[i];
    columns.push_back({c.cost / scale, share_coefficient(inst, c, share), c.benefit(), 1.0});
  }
  TwoRowSimplex lp(std::move(columns), inst.budget / scale);
  lp.solve();

  const auto values = lp.primal(active.size());
  std::vector<double> x(inst.persons.size(), 0.0);
  for (std::size_t k = 0; k < active.size(); ++k) x[active[k]] = snap_unit(values[k]);
  AllocationResult result = summarize_allocation(inst, std::move(x));

  const auto cert = certify(inst, share, result, lp.dual0() / scale, lp.dual1());
  if (!cert.ok) throw SolverError("allocation certificate failed: " + cert.failure);
  return result;
}

OptimalityCertificate certify(const AllocationInstance& inst, double share,
                              const AllocationResult& result, double budget_dual,
                              double share_dual) {
  OptimalityCertificate cert;
  cert.budget_dual = budget_dual;
  cert.share_dual = share_dual;
  cert.primal_objective = result.objective;
  auto fail = [&](std::string why) {
    cert.ok = false;
    cert.failure = std::move(why);
    return cert;
  };
  if (result.x.size() != inst.persons.size()) return fail("allocation has wrong length");

  double spend = 0.0;
  double total = 0.0;
  double share_residual = 0.0;
  double cost_scale = 0.0;
  for (std::size_t i = 0; i < inst.persons.size(); ++i) {
    const Claimant& c = inst.persons[i];
    const double xi = result.x[i];
    if (!(xi >= 0.0 && xi <= 1.0)) return fail("x outside [0,1]");
    spend += c.cost * xi;
    total += xi;
    share_residual += share_coefficient(inst, c, share) * xi;
    cost_scale = std::max(cost_scale, c.cost);
  }
  if (spend > inst.budget + kCertBudgetRel * std::max(1.0, inst.budget)) {
    return fail("spend exceeds budget");
  }
  if (std::abs(share_residual) > kCertShareRel * std::max(1.0, total)) {
    return fail("share constraint violated");
  }
  if (result.fractional.size() > 2) return fail("more than two fractional persons");

  // Dual feasibility: budget dual >= 0 and reduced-cost signs that match each
  // variable's position. The dual bound uses the clamped budget dual, so it
  // stays a valid upper bound on the LP value.
  const double y0 = std::max(0.0, budget_dual);
  if (budget_dual < -kCertReducedCost) return fail("negative budget dual");
  if (y0 > kCertReducedCost &&
      inst.budget - spend > 1e-7 * std::max(1.0, inst.budget)) {
    return fail("budget dual positive with slack budget");
  }
  double bound = y0 * inst.budget;
  const double rc_tol = kCertReducedCost * std::max(1.0, y0 * cost_scale);
  for (std::size_t i = 0; i < inst.persons.size(); ++i) {
    const Claimant& c = inst.persons[i];
    if (degenerate_person(c)) continue;
    const double d = c.benefit() - y0 * c.cost - share_dual * share_coefficient(inst, c, share);
    const double xi = result.x[i];
    if (xi == 0.0 && d > rc_tol) return fail("improving variable at lower bound");
    if (xi == 1.0 && d < -rc_tol) return fail("improving variable at upper bound");
    if (xi > 0.0 && xi < 1.0 && std::abs(d) > rc_tol) return fail("basic variable with nonzero reduced cost");
    bound += std::max(0.0, d);
  }
  cert.dual_bound = bound;
  if (bound - result.objective > kCertGapRel * std::max(1.0, std::abs(result.objective))) {
    return fail("duality gap too large");
  }
  cert.ok = true;
  return cert;
}

std::vector<FrontierPoint> frontier(const AllocationInstance& inst,
                                    std::span<const double> shares, unsigned threads) {
  inst.validate();
  std::vector<FrontierPoint> points(shares.size());
  auto solve_point = [&](std::size_t k) {
    FrontierPoint& point = points[k];
    point.share = shares[k];
    try {
      point.result = solve_constrained(inst, shares[k]);
    } catch (const InfeasibleError& e) {
      point.status = PointStatus::Infeasible;
      point.message = e.what();
    } catch (const ValidationError& e) {
      point.status = PointStatus::Infeasible;
      point.message = e.what();
    } catch (const std::exception& e) {
      point.status = PointStatus::SolverFailure;
      point.message = e.what();
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, shares.size()));
  if (threads <= 1) {
    for (std::size_t k = 0; k < shares.size(); ++k) solve_point(k);
    return points;
  }
  std::vector<std::thread> workers;
  for (unsigned t = 0; t < threads; ++t) {
    workers.emplace_back([&, t] {
      for (std::size_t k = t; k < shares.size(); k += threads) solve_point(k);
    });
  }
  for (auto& w : workers) w.join();
  return points;
}

std::vector<FrontierPoint> at_least_frontier(const std::vector<FrontierPoint>& points) {
  std::vector<FrontierPoint> out;
  for (const auto& p : points) {
    if (!p.ok()) continue;
    FrontierPoint best = p;
    for (const auto& q : points) {
      if (q.ok() && q.share >= p.share && q.value() > best.value()) {
        best.result = q.result;
      }
    }
    best.share = p.share;
    out.push_back(std::move(best));
  }
  return out;
}

std::vector<double> share_grid(std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {0.0};
  std::vector<double> grid(n);
  for (std::size_t k = 0; k < n; ++k) {
    grid[k] = static_cast<double>(k) / static_cast<double>(n - 1);
  }
  return grid;
}

std::vector<OptionRow> option_table(const AllocationInstance& inst,
                                    const std::vector<FrontierPoint>& points,
                                    std::span<const double> shares) {
  std::vector<std::size_t> sizes(inst.groups.size(), 0);
  std::vector<double> baseline(inst.groups.size(), 0.0);
  for (const auto& c : inst.persons) {
    ++sizes[index(c.group)];
    baseline[index(c.group)] += c.appear_prob;
  }

  std::vector<OptionRow> rows;
  for (std::size_t k = 0; k < shares.size(); ++k) {
    const double s = shares[k];
    const AllocationResult* found = nullptr;
    for (const auto& p : points) {
      if (p.ok() && p.share == s) {
        found = &p.result;
        break;
      }
    }
    AllocationResult solved;
    if (found == nullptr) {
      solved = solve_constrained(inst, s);
      found = &solved;
    }
    OptionRow row;
    row.option = k < 26 ? std::string(1, static_cast<char>('A' + k)) : "O" + std::to_string(k + 1);
    row.share = s;
    row.total_appearances = found->objective;
    row.spend = found->spend;
    row.appearance_gain.assign(inst.groups.size(), 0.0);
    for (std::size_t i = 0; i < inst.persons.size(); ++i) {
      const Claimant& c = inst.persons[i];
      row.appearance_gain[index(c.group)] += c.benefit() * found->x[i];
    }
    row.missed.resize(inst.groups.size());
    for (std::size_t g = 0; g < inst.groups.size(); ++g) {
      row.missed[g] = static_cast<double>(sizes[g]) - (baseline[g] + row.appearance_gain[g]);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace eqlab
