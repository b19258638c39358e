// Copyright 2026 The doseopt Authors.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "doseopt/alloc.h"

#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "doseopt/error.h"
#include "gtest/gtest.h"

namespace doseopt {
namespace {

AllocationProblem Toy(double budget) {
  AllocationProblem p;
  p.effects = Matrix(2, 3);
  const double t[2][3] = {{0, 0.4, 0.3}, {0, 0.1, 0.5}};
  for (int i = 0; i < 2; ++i) {
    for (int d = 0; d < 3; ++d) p.effects(i, d) = t[i][d];
  }
  p.doses = {0.0, 0.5, 1.0};
  p.costs = ProportionalCosts(2, p.doses);
  p.benefits = {1.0, 1.0};
  p.groups = {0, 1};
  p.budget = budget;
  return p;
}

// Independent exhaustive search: every assignment, feasibility written out
// directly from the constraint definitions.
struct Best {
  std::optional<double> value;
  std::vector<int> doses;
};

Best Enumerate(const AllocationProblem& p, bool use_dt, bool use_do) {
  const std::size_t n = p.entities();
  const int k = static_cast<int>(p.num_doses());
  std::vector<int> x(n, 0);
  Best best;
  for (;;) {
    double cost = 0, value = 0, n0 = 0, n1 = 0, s0 = 0, s1 = 0, e0 = 0, e1 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      cost += p.costs(i, x[i]);
      value += p.benefits[i] * p.effects(i, x[i]);
      if (p.groups[i] == 0) {
        n0 += 1; s0 += p.doses[x[i]]; e0 += p.effects(i, x[i]);
      } else {
        n1 += 1; s1 += p.doses[x[i]]; e1 += p.effects(i, x[i]);
      }
    }
    bool ok = cost <= p.budget + 1e-9;
    auto within = [](double g0, double g1, double eps) {
      return g0 >= (1 - eps) * g1 - 1e-9 && g0 <= (1 + eps) * g1 + 1e-9;
    };
    if (use_dt) ok = ok && within(s0 / n0, s1 / n1, *p.eps_dt);
    if (use_do) ok = ok && within(e0 / n0, e1 / n1, *p.eps_do);
    if (ok && (!best.value || value > *best.value + 1e-12)) {
      best.value = value;
      best.doses = x;
    }
    std::size_t i = 0;
    while (i < n && ++x[i] == k) x[i++] = 0;
    if (i == n) break;
  }
  return best;
}

AllocationProblem RandomProblem(std::mt19937_64& rng, int n, int delta,
                                bool unit_costs) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  AllocationProblem p;
  p.doses.resize(delta + 1);
  for (int d = 0; d <= delta; ++d) p.doses[d] = static_cast<double>(d) / delta;
  p.effects = Matrix(n, delta + 1);
  p.costs = unit_costs ? ProportionalCosts(n, p.doses) : Matrix(n, delta + 1);
  for (int i = 0; i < n; ++i) {
    for (int d = 1; d <= delta; ++d) {
      p.effects(i, d) = u(rng) - 0.3;
      if (!unit_costs) p.costs(i, d) = std::round(10 * u(rng)) / 10 + 0.1;
    }
    p.groups.push_back(i % 2);
  }
  p.benefits.assign(n, 1.0);
  p.budget = 0.25 * n * (unit_costs ? 1.0 : 1.5);
  return p;
}

TEST(AllocTest, ToyExactOptimum) {
  const AllocationProblem p = Toy(1.5);
  for (SolverKind kind :
       {SolverKind::kDp, SolverKind::kBnb, SolverKind::kBruteForce}) {
    const SolveReport r = Solve(p, kind);
    EXPECT_EQ(r.status, SolveStatus::kOptimal) << SolverKindName(kind);
    EXPECT_NEAR(r.objective, 0.9, 1e-12) << SolverKindName(kind);
    EXPECT_EQ(r.policy.dose_indices(), (std::vector<int>{1, 2}));
  }
}

TEST(AllocTest, ToyGreedyTakesLargestEffectFirst) {
  const SolveReport r = SolveGreedy(Toy(1.0));
  EXPECT_EQ(r.status, SolveStatus::kHeuristic);
  EXPECT_NEAR(r.objective, 0.5, 1e-12);
  EXPECT_EQ(r.policy.dose_indices(), (std::vector<int>{0, 2}));
  EXPECT_NEAR(SolveDp(Toy(1.0)).objective, 0.5, 1e-12);
}

TEST(AllocTest, ToyDoseParity) {
  AllocationProblem p = Toy(1.5);
  p.eps_dt = 0.0;
  const SolveReport r = SolveBnb(p);
  ASSERT_EQ(r.status, SolveStatus::kOptimal);
  EXPECT_NEAR(r.objective, 0.5, 1e-12);
  EXPECT_EQ(r.policy.dose(0), r.policy.dose(1));
  EXPECT_LE(ConstraintViolation(p, r.policy), kFeasibilityTolerance);
  EXPECT_THROW(SolveGreedy(p), Error);
  EXPECT_THROW(SolveDp(p), Error);
}

TEST(AllocTest, UnitEpsilonIsDroppedUnlessStrict) {
  AllocationProblem p = Toy(1.5);
  p.eps_dt = 1.0;
  EXPECT_FALSE(ResolveFairness(p).any());
  p.strict_fairness = true;
  EXPECT_TRUE(ResolveFairness(p).dose);
  p.groups = {1, 1};
  const ActiveFairness a = ResolveFairness(p);
  EXPECT_FALSE(a.any());
  EXPECT_EQ(a.warnings.size(), 1u);
}

TEST(AllocTest, ExactSolversMatchEnumeration) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const bool unit = trial % 2 == 0;
    const AllocationProblem p = RandomProblem(rng, 5 + trial % 3, 3, unit);
    const Best oracle = Enumerate(p, false, false);
    ASSERT_TRUE(oracle.value);
    const SolveReport bnb = SolveBnb(p);
    EXPECT_EQ(bnb.status, SolveStatus::kOptimal);
    EXPECT_NEAR(bnb.objective, *oracle.value, 1e-9) << trial;
    if (unit) {
      EXPECT_NEAR(SolveDp(p).objective, *oracle.value, 1e-9) << trial;
    } else {
      EXPECT_NEAR(SolveDp(p, 10).objective, *oracle.value, 1e-9) << trial;
    }
    const SolveReport greedy = SolveGreedy(p);
    EXPECT_LE(greedy.objective, *oracle.value + 1e-12);
    EXPECT_LE(PolicyCost(greedy.policy, p.costs), p.budget + 1e-9);
  }
}

TEST(AllocTest, FairBnbMatchesEnumeration) {
  std::mt19937_64 rng(5);
  int checked = 0;
  for (int trial = 0; trial < 24; ++trial) {
    AllocationProblem p = RandomProblem(rng, 6, 2, true);
    const double eps_values[] = {0.0, 0.2, 0.5};
    if (trial % 3 != 2) p.eps_dt = eps_values[trial % 3];
    if (trial % 2 == 0) p.eps_do = eps_values[(trial / 2) % 3];
    const ActiveFairness a = ResolveFairness(p);
    const Best oracle = Enumerate(p, a.dose, a.outcome);
    const SolveReport r = SolveBnb(p);
    if (!oracle.value) {
      EXPECT_EQ(r.status, SolveStatus::kInfeasible) << trial;
      continue;
    }
    ++checked;
    ASSERT_EQ(r.status, SolveStatus::kOptimal) << trial;
    EXPECT_NEAR(r.objective, *oracle.value, 1e-9) << trial;
    EXPECT_LE(ConstraintViolation(p, r.policy), kFeasibilityTolerance);
  }
  EXPECT_GT(checked, 10);
}

TEST(AllocTest, ZeroBudgetWithParity) {
  AllocationProblem p = Toy(0.0);
  p.eps_dt = 0.0;
  const SolveReport r = SolveBnb(p);
  EXPECT_EQ(r.status, SolveStatus::kOptimal);
  EXPECT_EQ(r.objective, 0.0);
  EXPECT_EQ(r.policy, Policy::AllZero(2, 3));
}

TEST(AllocTest, BnbLimitsReportBound) {
  std::mt19937_64 rng(9);
  AllocationProblem p = RandomProblem(rng, 30, 4, true);
  p.eps_dt = 0.05;
  p.eps_do = 0.05;
  BnbOptions opt;
  opt.node_limit = 1;
  const SolveReport r = SolveBnb(p, opt);
  if (r.status == SolveStatus::kLimit) {
    ASSERT_TRUE(r.best_bound.has_value());
    EXPECT_GE(*r.best_bound, r.objective - 1e-9);
  } else {
    EXPECT_EQ(r.status, SolveStatus::kOptimal);
  }
  EXPECT_LE(ConstraintViolation(p, r.policy), kFeasibilityTolerance);
}

TEST(AllocTest, StartPoliciesAreUsedWhenFeasible) {
  const AllocationProblem p = Toy(1.5);
  BnbOptions opt;
  opt.start_policies.push_back(Policy({1, 2}, 3));
  opt.start_policies.push_back(Policy({2, 2}, 3));  // Over budget; ignored.
  const SolveReport r = SolveBnb(p, opt);
  EXPECT_NEAR(r.objective, 0.9, 1e-12);
}

TEST(AllocTest, RelaxationBoundsIntegerOptimum) {
  std::mt19937_64 rng(3);
  const AllocationProblem p = RandomProblem(rng, 6, 3, true);
  const LpProblem lp = BuildRelaxation(p);
  EXPECT_EQ(lp.num_vars(), 6u * 4u);
  const LpSolution s = SolveLp(lp);
  ASSERT_EQ(s.status, LpStatus::kOptimal);
  EXPECT_GE(s.objective, *Enumerate(p, false, false).value - 1e-9);
}

TEST(AllocTest, PolicyMatrixRoundTrip) {
  const Policy p({0, 2, 1}, 3);
  const Matrix m = p.ToMatrix();
  EXPECT_EQ(m(1, 2), 1.0);
  EXPECT_EQ(m(1, 0), 0.0);
  EXPECT_EQ(Policy::FromMatrix(m), p);
  Matrix bad = m;
  bad(0, 1) = 1.0;
  EXPECT_THROW(Policy::FromMatrix(bad), Error);
  EXPECT_THROW(Policy({3}, 3), Error);
}

TEST(AllocTest, GroupMeans) {
  const AllocationProblem p = Toy(2.0);
  const GroupMeans m =
      ComputeGroupMeans(Policy({1, 2}, 3), p.effects, p.doses, p.groups);
  EXPECT_DOUBLE_EQ(m.dose_g0, 0.5);
  EXPECT_DOUBLE_EQ(m.dose_g1, 1.0);
  EXPECT_DOUBLE_EQ(m.effect_g0, 0.4);
  EXPECT_DOUBLE_EQ(m.effect_g1, 0.5);
}

TEST(AllocTest, BenefitsWeightObjective) {
  AllocationProblem p = Toy(1.0);
  p.benefits = {3.0, 1.0};
  const SolveReport r = SolveBnb(p);
  EXPECT_NEAR(r.objective, 1.3, 1e-12);  // 3 * 0.4 + 0.1
  EXPECT_EQ(r.policy.dose_indices(), (std::vector<int>{1, 1}));
}

TEST(AllocTest, ValidateRejectsBadProblems) {
  AllocationProblem p = Toy(1.0);
  p.costs(0, 0) = 0.1;
  EXPECT_THROW(p.Validate(), Error);
  p = Toy(1.0);
  p.budget = -1;
  EXPECT_THROW(p.Validate(), Error);
  p = Toy(1.0);
  p.groups = {0, 2};
  EXPECT_THROW(p.Validate(), Error);
  p = Toy(1.0);
  p.eps_do = 1.5;
  EXPECT_THROW(p.Validate(), Error);
}

TEST(AllocTest, DpApplicability) {
  AllocationProblem p = Toy(1.0);
  EXPECT_TRUE(DpApplicable(p));
  p.costs(0, 1) = 0.33;
  EXPECT_FALSE(DpApplicable(p));
  EXPECT_EQ(Solve(p, SolverKind::kAuto).status, SolveStatus::kOptimal);
}

TEST(AllocTest, SolverNames) {
  EXPECT_EQ(ParseSolverKind("auto"), SolverKind::kAuto);
  EXPECT_EQ(ParseSolverKind("brute"), SolverKind::kBruteForce);
  EXPECT_STREQ(SolverKindName(SolverKind::kBnb), "bnb");
  EXPECT_THROW(ParseSolverKind("simplex"), Error);
}

TEST(AllocTest, ProblemFilesRoundTrip) {
  AllocationProblem p = Toy(1.25);
  p.eps_dt = 0.2;
  const auto dir = std::filesystem::temp_directory_path() / "doseopt_alloc";
  WriteProblemFiles(p, dir.string());
  const AllocationProblem q =
      ReadProblemFiles((dir / "cade.csv").string(), (dir / "cost.csv").string(),
                       (dir / "meta.csv").string());
  EXPECT_EQ(q.effects, p.effects);
  EXPECT_EQ(q.costs, p.costs);
  EXPECT_EQ(q.budget, p.budget);
  EXPECT_EQ(q.eps_dt, p.eps_dt);
  EXPECT_FALSE(q.eps_do.has_value());
  EXPECT_EQ(q.groups, p.groups);
}

TEST(AllocTest, CsvOutputs) {
  const AllocationProblem p = Toy(1.5);
  const SolveReport r = SolveDp(p);
  EXPECT_EQ(PolicyToCsv(r.policy, p.doses),
            "entity,dose_index,dose\n0,1,0.5\n1,2,1.0\n");
  EXPECT_EQ(SolveReportCsvHeader(), "status,objective,cost,nodes,bound,wall_ms");
  EXPECT_EQ(SolveReportCsvRow(r, p).rfind("optimal,0.9", 0), 0u);
}

}  // namespace
}  // namespace doseopt
