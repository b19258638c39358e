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

#include "doseopt/lp.h"

#include <cmath>
#include <random>
#include <vector>

#include "doseopt/error.h"
#include "gtest/gtest.h"
#include "tableau_oracle.h"

namespace doseopt {
namespace {

LpProblem Make(std::vector<double> c, std::vector<std::vector<double>> a,
               std::vector<RowSense> senses, std::vector<double> b,
               std::vector<double> lo, std::vector<double> hi) {
  LpProblem p;
  p.objective = std::move(c);
  p.constraints = Matrix(a.size(), p.objective.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a[i].size(); ++j) p.constraints(i, j) = a[i][j];
  }
  p.senses = std::move(senses);
  p.rhs = std::move(b);
  p.lower = std::move(lo);
  p.upper = std::move(hi);
  return p;
}

TEST(LpTest, TwoVariableTextbook) {
  // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 (optimum 36 at (2, 6)).
  const LpProblem p =
      Make({3, 5}, {{1, 0}, {0, 2}, {3, 2}},
           {RowSense::kLessEqual, RowSense::kLessEqual, RowSense::kLessEqual},
           {4, 12, 18}, {0, 0}, {100, 100});
  const LpSolution s = SolveLp(p);
  ASSERT_EQ(s.status, LpStatus::kOptimal);
  EXPECT_NEAR(s.objective, 36.0, 1e-9);
  EXPECT_NEAR(s.primal[0], 2.0, 1e-9);
  EXPECT_NEAR(s.primal[1], 6.0, 1e-9);
}

TEST(LpTest, EqualityAndGreaterRows) {
  // max x + 2y s.t. x + y = 1, x - y >= 0.5.
  const LpProblem p = Make({1, 2}, {{1, 1}, {1, -1}},
                           {RowSense::kEqual, RowSense::kGreaterEqual}, {1, 0.5},
                           {0, 0}, {1, 1});
  const LpSolution s = SolveLp(p);
  ASSERT_EQ(s.status, LpStatus::kOptimal);
  EXPECT_NEAR(s.primal[0], 0.75, 1e-9);
  EXPECT_NEAR(s.primal[1], 0.25, 1e-9);
  EXPECT_NEAR(s.objective, 1.25, 1e-9);
}

TEST(LpTest, DetectsInfeasible) {
  const LpProblem p = Make({1, 1}, {{1, 1}}, {RowSense::kGreaterEqual}, {3},
                           {0, 0}, {1, 1});
  EXPECT_EQ(SolveLp(p).status, LpStatus::kInfeasible);
}

TEST(LpTest, BoundOverridesAndFixedVariables) {
  const LpProblem p = Make({1, 1, 1}, {{1, 1, 1}}, {RowSense::kLessEqual}, {2},
                           {0, 0, 0}, {1, 1, 1});
  const std::vector<double> lo = {1, 0, 0};
  const std::vector<double> hi = {1, 0, 1};
  const LpSolution s = SolveLp(p, lo, hi);
  ASSERT_EQ(s.status, LpStatus::kOptimal);
  EXPECT_EQ(s.primal[0], 1.0);
  EXPECT_EQ(s.primal[1], 0.0);
  EXPECT_NEAR(s.primal[2], 1.0, 1e-12);
  const std::vector<double> lo2 = {1, 1, 1};
  EXPECT_EQ(SolveLp(p, lo2, std::vector<double>{1, 1, 1}).status,
            LpStatus::kInfeasible);
}

TEST(LpTest, NegativeLowerBounds) {
  // max -x s.t. x + y >= -1 with x in [-2, 3], y in [-3, 0.5].
  const LpProblem p = Make({-1, 0}, {{1, 1}}, {RowSense::kGreaterEqual}, {-1},
                           {-2, -3}, {3, 0.5});
  const LpSolution s = SolveLp(p);
  ASSERT_EQ(s.status, LpStatus::kOptimal);
  EXPECT_NEAR(s.primal[0], -1.5, 1e-9);
  EXPECT_NEAR(s.objective, 1.5, 1e-9);
}

TEST(LpTest, ValidateRejectsBadInput) {
  LpProblem p = Make({1}, {{1}}, {RowSense::kLessEqual}, {1}, {0}, {1});
  p.upper[0] = -1;
  EXPECT_THROW(p.Validate(), Error);
  p.upper[0] = INFINITY;
  EXPECT_THROW(p.Validate(), Error);
  p.upper[0] = 1;
  p.rhs.push_back(2);
  EXPECT_THROW(p.Validate(), Error);
}

TEST(LpTest, MaxViolation) {
  const LpProblem p = Make({1, 1}, {{1, 1}}, {RowSense::kLessEqual}, {1},
                           {0, 0}, {1, 1});
  EXPECT_NEAR(MaxViolation(p, std::vector<double>{0.5, 0.5}), 0.0, 1e-15);
  EXPECT_NEAR(MaxViolation(p, std::vector<double>{1.0, 0.7}), 0.7, 1e-12);
  EXPECT_NEAR(MaxViolation(p, std::vector<double>{-0.2, 0.0}), 0.2, 1e-12);
}

// Random LPs shaped like the allocation relaxation plus a few dense rows.
LpProblem RandomLp(std::mt19937_64& rng, int n, int m) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> sense(0, 2);
  LpProblem p;
  p.objective.resize(n);
  for (double& c : p.objective) c = u(rng);
  p.constraints = Matrix(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      p.constraints(i, j) = std::abs(u(rng)) < 0.3 ? 0.0 : u(rng);
    }
    const int k = sense(rng);
    p.senses.push_back(k == 0   ? RowSense::kLessEqual
                       : k == 1 ? RowSense::kGreaterEqual
                                : RowSense::kEqual);
    p.rhs.push_back(0.5 * u(rng));
  }
  for (int j = 0; j < n; ++j) {
    const double lo = std::floor(2.0 * u(rng));
    p.lower.push_back(lo);
    p.upper.push_back(lo + 1.0 + std::abs(u(rng)));
  }
  return p;
}

TEST(LpTest, AgreesWithTableauOracleOnRandomProblems) {
  std::mt19937_64 rng(2024);
  int feasible = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + trial % 7;
    const int m = 1 + trial % 5;
    const LpProblem p = RandomLp(rng, n, m);
    const LpSolution s = SolveLp(p);
    const auto oracle = testing::SolveByTableau(p);
    SCOPED_TRACE(trial);
    if (!oracle.feasible) {
      EXPECT_EQ(s.status, LpStatus::kInfeasible);
      continue;
    }
    ++feasible;
    ASSERT_EQ(s.status, LpStatus::kOptimal);
    EXPECT_NEAR(s.objective, oracle.objective, 1e-7);
    EXPECT_LE(MaxViolation(p, s.primal), 1e-7);
  }
  EXPECT_GT(feasible, 50);
}

TEST(LpTest, AssignmentRelaxationMatchesOracle) {
  // n entities x k doses, one-hot rows plus a budget row.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 8, k = 4;
  LpProblem p;
  p.objective.assign(n * k, 0.0);
  p.constraints = Matrix(n + 1, n * k);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < k; ++d) {
      p.objective[i * k + d] = d == 0 ? 0.0 : u(rng) - 0.2;
      p.constraints(i, i * k + d) = 1.0;
      p.constraints(n, i * k + d) = d * (0.5 + u(rng));
    }
    p.senses.push_back(RowSense::kEqual);
    p.rhs.push_back(1.0);
  }
  p.senses.push_back(RowSense::kLessEqual);
  p.rhs.push_back(4.0);
  p.lower.assign(n * k, 0.0);
  p.upper.assign(n * k, 1.0);
  const LpSolution s = SolveLp(p);
  const auto oracle = testing::SolveByTableau(p);
  ASSERT_TRUE(oracle.feasible);
  ASSERT_EQ(s.status, LpStatus::kOptimal);
  EXPECT_NEAR(s.objective, oracle.objective, 1e-9);
}

TEST(LpTest, IterationLimitIsReported) {
  std::mt19937_64 rng(3);
  LpProblem p = RandomLp(rng, 12, 6);
  for (auto& s : p.senses) s = RowSense::kLessEqual;
  for (auto& b : p.rhs) b = 5.0;
  LpOptions opt;
  opt.max_iterations = 1;
  const LpSolution s = SolveLp(p, opt);
  EXPECT_TRUE(s.status == LpStatus::kIterationLimit ||
              s.status == LpStatus::kOptimal);
  EXPECT_STREQ(LpStatusName(LpStatus::kIterationLimit), "iteration-limit");
}

}  // namespace
}  // namespace doseopt
