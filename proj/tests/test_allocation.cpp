#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "eqlab/allocation.hpp"
#include "eqlab/error.hpp"
#include "eqlab/rng.hpp"
#include "oracle/brute_force_alloc.hpp"

using namespace eqlab;

namespace {

const GroupSet kCourt({"Black", "White"});
const GroupId kBlack = group_id(0);
const GroupId kWhite = group_id(1);

AllocationInstance instance(std::vector<Claimant> persons, double budget) {
  AllocationInstance inst;
  inst.groups = kCourt;
  inst.focus_group = kBlack;
  inst.budget = budget;
  for (std::size_t i = 0; i < persons.size(); ++i) persons[i].id = static_cast<std::int64_t>(i);
  inst.persons = std::move(persons);
  return inst;
}

AllocationInstance random_instance(CounterStream& rng, std::size_t n) {
  std::vector<Claimant> persons(n);
  double total_cost = 0.0;
  const int flavour = static_cast<int>(rng.next_u64() % 8);
  for (auto& c : persons) {
    c.group = rng.uniform() < 0.45 ? kBlack : kWhite;
    if (flavour == 0) c.group = kWhite;  // no focus-group persons
    if (flavour == 1) c.group = kBlack;  // focus group only
    c.appear_prob = rng.uniform() < 0.1 ? 1.0 : rng.uniform();
    c.cost = rng.uniform() < 0.1 ? 0.0 : 5.0 * rng.lognormal(1.2, 0.5);
    total_cost += c.cost;
  }
  const double budget = rng.uniform() < 0.1 ? 0.0 : total_cost * rng.uniform() * 0.8;
  return instance(std::move(persons), budget);
}

}  // namespace

TEST(Unconstrained, WholeBudgetAndZeroBudget) {
  auto inst = instance({{0, kBlack, 0.2, 10}, {0, kWhite, 0.5, 4}, {0, kWhite, 0.9, 0}}, 1000);
  const auto all = unconstrained_alloc(inst);
  for (const double x : all.x) EXPECT_EQ(x, 1.0);
  EXPECT_NEAR(all.objective, 0.8 + 0.5 + 0.1, 1e-15);
  inst.budget = 0.0;
  const auto none = unconstrained_alloc(inst);
  EXPECT_NEAR(none.objective, 0.1, 1e-15);  // the free voucher still goes out
  EXPECT_EQ(none.spend, 0.0);
}

TEST(Unconstrained, AtMostOneFractional) {
  CounterStream rng(3, 0, 0, 0);
  for (int k = 0; k < 50; ++k) {
    const auto r = unconstrained_alloc(random_instance(rng, 40));
    EXPECT_LE(r.fractional.size(), 1u);
  }
}

TEST(BruteForce, SmallReferenceCases) {
  const auto one = instance({{0, kBlack, 0.3, 8}}, 10);
  const auto r1 = oracle::brute_force_alloc(one, 1.0);
  EXPECT_EQ(r1.x[0], 1.0);
  // Budget admits one full voucher; person 1 has the better benefit per dollar.
  const auto two = instance({{0, kWhite, 0.5, 10}, {0, kBlack, 0.2, 10}}, 10);
  const double s = unconstrained_alloc(two).share;
  const auto r2 = oracle::brute_force_alloc(two, s);
  EXPECT_EQ(r2.x[1], 1.0);
  EXPECT_EQ(r2.x[0], 0.0);
  std::vector<Claimant> many(13, {0, kWhite, 0.5, 1});
  EXPECT_THROW(oracle::brute_force_alloc(instance(many, 3), 0.0), std::invalid_argument);
}

TEST(Constrained, FourPersonHandcraftedMatchesOracle) {
  const auto inst = instance({{0, kBlack, 0.40, 20},
                              {0, kBlack, 0.10, 35},
                              {0, kWhite, 0.30, 12},
                              {0, kWhite, 0.60, 8}},
                             40);
  for (const double s : {0.0, 0.25, 1.0 / 3.0, 0.5, 0.75, 1.0}) {
    const auto lp = solve_constrained(inst, s);
    const auto bf = oracle::brute_force_alloc(inst, s);
    EXPECT_NEAR(lp.objective, bf.objective, 1e-9) << "share " << s;
    EXPECT_LE(lp.spend, inst.budget * (1 + 1e-9));
  }
  EXPECT_NEAR(unconstrained_alloc(inst).objective, oracle::brute_force_alloc(inst, unconstrained_alloc(inst).share).objective, 1e-9);
}

TEST(Constrained, MatchesOracleOnRandomInstances) {
  CounterStream rng(77, 0, 0, 0);
  int refused = 0;
  for (int k = 0; k < 200; ++k) {
    const auto inst = random_instance(rng, 1 + rng.next_u64() % 12);
    const double shares[] = {0.0, 1.0, rng.uniform(), std::round(rng.uniform() * 4) / 4};
    for (const double s : shares) {
      bool lp_refused = false, bf_refused = false;
      AllocationResult lp;
      oracle::BruteForceResult bf;
      try {
        lp = solve_constrained(inst, s);
      } catch (const InfeasibleError&) {
        lp_refused = true;
      }
      try {
        bf = oracle::brute_force_alloc(inst, s);
      } catch (const InfeasibleError&) {
        bf_refused = true;
      }
      ASSERT_EQ(lp_refused, bf_refused) << "instance " << k << " share " << s;
      if (lp_refused) {
        ++refused;
        continue;
      }
      EXPECT_NEAR(lp.objective, bf.objective, 1e-9) << "instance " << k << " share " << s;
      EXPECT_LE(lp.fractional.size(), 2u);
    }
  }
  EXPECT_GT(refused, 0);
}

TEST(Constrained, UnconstrainedShareReproducesOptimum) {
  CounterStream rng(12, 0, 0, 0);
  for (int k = 0; k < 30; ++k) {
    auto inst = random_instance(rng, 300);
    const auto free = unconstrained_alloc(inst);
    if (!share_feasible(inst, free.share)) continue;
    const auto fixed = solve_constrained(inst, free.share);
    EXPECT_NEAR(fixed.objective, free.objective, 1e-9 * std::max(1.0, free.objective));
  }
}

TEST(Constrained, ShareOneIsFocusOnlyKnapsack) {
  CounterStream rng(13, 0, 0, 0);
  const auto inst = random_instance(rng, 200);
  auto black_only = inst;
  black_only.persons.clear();
  for (const auto& c : inst.persons) {
    if (c.group == kBlack) black_only.persons.push_back(c);
  }
  const auto lp = solve_constrained(inst, 1.0);
  EXPECT_NEAR(lp.objective, unconstrained_alloc(black_only).objective, 1e-9);
  EXPECT_NEAR(lp.vouchers(kCourt, "White"), 0.0, 1e-12);
}

TEST(Constrained, ZeroBudget) {
  const auto inst = instance({{0, kBlack, 0.3, 8}, {0, kWhite, 0.4, 9}}, 0);
  const auto r = solve_constrained(inst, 0.5);
  EXPECT_EQ(r.objective, 0.0);
  EXPECT_EQ(r.spend, 0.0);
}

TEST(Constrained, InfeasibleAndInvalid) {
  const auto whites = instance({{0, kWhite, 0.3, 8}, {0, kWhite, 0.4, 9}}, 10);
  EXPECT_THROW(solve_constrained(whites, 0.5), InfeasibleError);
  EXPECT_NO_THROW(solve_constrained(whites, 0.0));
  EXPECT_THROW(solve_constrained(whites, 1.5), ValidationError);
  auto bad = whites;
  bad.persons[0].cost = -1;
  EXPECT_THROW(solve_constrained(bad, 0.0), ValidationError);
}

TEST(Constrained, DegeneratePersonsGetNothing) {
  const auto inst = instance({{0, kBlack, 1.0, 0}, {0, kBlack, 0.5, 10}, {0, kWhite, 0.5, 10}}, 10);
  const auto r = solve_constrained(inst, 0.5);
  EXPECT_EQ(r.x[0], 0.0);
  EXPECT_NEAR(r.objective, 0.5, 1e-12);
  // The only Black claimant with a benefit is ignored: share 1 still works.
  EXPECT_NO_THROW(solve_constrained(inst, 1.0));
  const auto only_degenerate = instance({{0, kBlack, 1.0, 0}, {0, kWhite, 0.5, 10}}, 10);
  EXPECT_THROW(solve_constrained(only_degenerate, 0.5), InfeasibleError);
}

TEST(Certificate, RejectsSuboptimalAllocation) {
  const auto inst = instance({{0, kBlack, 0.2, 5}, {0, kWhite, 0.2, 5}, {0, kWhite, 0.9, 5}}, 10);
  auto bad = summarize_allocation(inst, {1.0, 0.0, 1.0});
  const auto cert = certify(inst, 0.5, bad, 0.0, 0.0);
  EXPECT_FALSE(cert.ok);
}

TEST(Frontier, CeilingQuasiConcavityAndVertexStructure) {
  CounterStream rng(31, 0, 0, 0);
  for (int k = 0; k < 5; ++k) {
    const auto inst = random_instance(rng, 400);
    const auto free = unconstrained_alloc(inst);
    const auto grid = share_grid(51);
    const auto points = frontier(inst, grid, 4);
    ASSERT_EQ(points.size(), grid.size());
    std::vector<const FrontierPoint*> ok;
    for (const auto& p : points) {
      EXPECT_NE(p.status, PointStatus::SolverFailure) << p.message;
      if (!p.ok()) continue;
      ok.push_back(&p);
      EXPECT_LE(p.value(), free.objective + 1e-9);
      EXPECT_LE(p.result.fractional.size(), 2u);
      EXPECT_LE(p.result.spend, inst.budget * (1 + 1e-9) + 1e-12);
    }
    for (std::size_t a = 0; a < ok.size(); ++a) {
      for (std::size_t b = a + 2; b < ok.size(); ++b) {
        for (std::size_t m = a + 1; m < b; ++m) {
          EXPECT_GE(ok[m]->value(), std::min(ok[a]->value(), ok[b]->value()) - 1e-9);
        }
      }
    }
  }
}

TEST(Frontier, ThreadCountDoesNotMatter) {
  CounterStream rng(32, 0, 0, 0);
  const auto inst = random_instance(rng, 300);
  const auto grid = share_grid(21);
  const auto a = frontier(inst, grid, 1);
  const auto b = frontier(inst, grid, 8);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    EXPECT_EQ(a[k].status, b[k].status);
    EXPECT_EQ(a[k].result.x, b[k].result.x);
  }
}

TEST(Frontier, InfeasiblePointsFlagged) {
  const auto whites = instance({{0, kWhite, 0.3, 8}, {0, kWhite, 0.4, 9}}, 10);
  const std::vector<double> grid{0.0, 0.5};
  const auto points = frontier(whites, grid);
  EXPECT_TRUE(points[0].ok());
  EXPECT_EQ(points[1].status, PointStatus::Infeasible);
  EXPECT_EQ(at_least_frontier(points).size(), 1u);
}

TEST(Frontier, AtLeastIsRunningMax) {
  CounterStream rng(33, 0, 0, 0);
  const auto inst = random_instance(rng, 200);
  const auto grid = share_grid(11);
  const auto points = frontier(inst, grid);
  const auto upper = at_least_frontier(points);
  for (std::size_t k = 0; k + 1 < upper.size(); ++k) {
    EXPECT_GE(upper[k].value(), upper[k + 1].value());
    EXPECT_GE(upper[k].value(), points[k].value());
  }
}

TEST(Options, RowsMatchIndividualSolves) {
  CounterStream rng(34, 0, 0, 0);
  AllocationInstance inst = random_instance(rng, 300);
  const std::vector<double> shares{0.1, 0.3, 0.5, 0.5, 0.9};
  const auto grid = share_grid(11);
  const auto rows = option_table(inst, frontier(inst, grid), shares);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0].option, "A");
  EXPECT_EQ(rows[4].option, "E");
  EXPECT_EQ(rows[2].total_appearances, rows[3].total_appearances);
  EXPECT_EQ(rows[2].missed, rows[3].missed);
  double black_size = 0, black_base = 0;
  for (const auto& c : inst.persons) {
    if (c.group == kBlack) {
      black_size += 1;
      black_base += c.appear_prob;
    }
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto direct = solve_constrained(inst, shares[k]);
    EXPECT_NEAR(rows[k].total_appearances, direct.objective, 1e-9);
    EXPECT_NEAR(rows[k].spend, direct.spend, 1e-9);
    double black_gain = 0;
    for (std::size_t i = 0; i < inst.persons.size(); ++i) {
      if (inst.persons[i].group == kBlack) black_gain += inst.persons[i].benefit() * direct.x[i];
    }
    EXPECT_NEAR(rows[k].missed[0], black_size - black_base - black_gain, 1e-9);
  }
}

TEST(Options, AllFocusInstanceAtShareOne) {
  const auto inst = instance({{0, kBlack, 0.2, 10}, {0, kBlack, 0.6, 3}, {0, kBlack, 0.4, 7}}, 12);
  const std::vector<double> shares{1.0};
  const auto rows = option_table(inst, {}, shares);
  EXPECT_NEAR(rows[0].total_appearances, unconstrained_alloc(inst).objective, 1e-12);
}

TEST(ShareGrid, Endpoints) {
  const auto g = share_grid(51);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_EQ(g.back(), 1.0);
  EXPECT_EQ(g[25], 0.5);
}
