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

#ifndef DOSEOPT_ALLOC_H_
#define DOSEOPT_ALLOC_H_

// Dose allocation: pick exactly one grid dose per entity to maximize the
// (benefit-weighted) sum of dose effects under a budget and optional
// group-fairness constraints on mean dose and mean effect.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "doseopt/estimators.h"
#include "doseopt/lp.h"
#include "doseopt/matrix.h"

namespace doseopt {

struct AllocationProblem {
  Matrix effects;  // T, N x (delta + 1); column 0 is the zero dose.
  std::vector<double> doses;
  Matrix costs;                  // C; column 0 must be 0.
  std::vector<double> benefits;  // b; all ones gives the uplift objective.
  double budget = 0.0;
  std::vector<int> groups;  // Protected attribute, 0 or 1 per entity.
  // Slack on relative disparity in mean dose (eps_dt) and mean effect
  // (eps_do). nullopt disables the pair; eps >= 1 also drops it unless
  // strict_fairness is set, in which case the inequalities are kept as
  // written.
  std::optional<double> eps_dt;
  std::optional<double> eps_do;
  bool strict_fairness = false;

  std::size_t entities() const { return effects.rows(); }
  std::size_t num_doses() const { return effects.cols(); }

  void Validate() const;
};

// Which fairness pairs actually enter the model after the dropping rules.
struct ActiveFairness {
  bool dose = false;
  bool outcome = false;
  std::vector<std::string> warnings;

  bool any() const { return dose || outcome; }
};

ActiveFairness ResolveFairness(const AllocationProblem& problem);

// c_{i,d} = D_d for every entity.
Matrix ProportionalCosts(std::size_t entities, std::span<const double> doses);

// Uplift instance: proportional costs, unit benefits, fairness disabled.
AllocationProblem MakeUpliftProblem(const CadeMatrix& effects,
                                    std::vector<int> groups, double budget);

// One dose index per entity. Equivalent to a binary N x (delta + 1) matrix
// with unit row sums.
class Policy {
 public:
  Policy() = default;
  Policy(std::vector<int> dose_index, int num_doses);

  static Policy AllZero(std::size_t entities, int num_doses);
  // Throws unless every row is binary with exactly one 1.
  static Policy FromMatrix(const Matrix& assignment);

  Matrix ToMatrix() const;
  int dose(std::size_t entity) const { return dose_index_[entity]; }
  std::size_t entities() const { return dose_index_.size(); }
  int num_doses() const { return num_doses_; }
  const std::vector<int>& dose_indices() const { return dose_index_; }

  bool operator==(const Policy& other) const = default;

 private:
  std::vector<int> dose_index_;
  int num_doses_ = 0;
};

double PolicyCost(const Policy& policy, const Matrix& costs);
double PolicyValue(const Policy& policy, const Matrix& effects,
                   std::span<const double> benefits);

// Group means used by the fairness constraints.
struct GroupMeans {
  double dose_g0 = 0.0;
  double dose_g1 = 0.0;
  double effect_g0 = 0.0;
  double effect_g1 = 0.0;
};

GroupMeans ComputeGroupMeans(const Policy& policy, const Matrix& effects,
                             std::span<const double> doses,
                             std::span<const int> groups);

// Largest violation of the budget and active fairness inequalities (0 when
// all hold).
double ConstraintViolation(const AllocationProblem& problem,
                           const Policy& policy);

// Policies are accepted as feasible up to this violation.
inline constexpr double kFeasibilityTolerance = 1e-9;

enum class SolveStatus { kOptimal, kInfeasible, kHeuristic, kLimit };

const char* SolveStatusName(SolveStatus status);

struct SolveReport {
  SolveStatus status = SolveStatus::kInfeasible;
  double objective = 0.0;
  Policy policy;
  std::int64_t nodes = 0;
  std::optional<double> root_bound;
  std::optional<double> best_bound;  // Upper bound when status == kLimit.
  double wall_ms = 0.0;
  std::vector<std::string> warnings;
};

// Rank entities by the value of their best dose and hand out best doses in
// that order while the budget lasts. Refuses active fairness constraints.
SolveReport SolveGreedy(const AllocationProblem& problem);

// Exact multiple-choice knapsack DP over integer-scaled costs. The
// resolution defaults to delta (exact for proportional costs). Refuses
// non-representable costs and active fairness constraints.
SolveReport SolveDp(const AllocationProblem& problem,
                    std::optional<int> cost_resolution = std::nullopt);

bool DpApplicable(const AllocationProblem& problem,
                  std::optional<int> cost_resolution = std::nullopt);

struct BnbOptions {
  std::int64_t node_limit = 1'000'000;
  double time_limit_seconds = 0.0;  // 0 disables the clock.
  double integrality_tolerance = 1e-6;
  // Nodes whose bound is within relative_gap * |incumbent| of the incumbent
  // are pruned. 0 proves optimality up to the absolute prune tolerance.
  double relative_gap = 0.0;
  // Candidate incumbents; infeasible ones are ignored.
  std::vector<Policy> start_policies;
  LpOptions lp;
};

// Exact branch-and-bound on the ILP using LP relaxations from SolveLp.
SolveReport SolveBnb(const AllocationProblem& problem,
                     const BnbOptions& options = {});

// The LP relaxation that SolveBnb starts from.
LpProblem BuildRelaxation(const AllocationProblem& problem);

// Exhaustive search; ties go to the lexicographically smallest dose vector.
SolveReport BruteForce(const AllocationProblem& problem);

enum class SolverKind { kGreedy, kDp, kBnb, kAuto, kBruteForce };

SolverKind ParseSolverKind(const std::string& name);
const char* SolverKindName(SolverKind kind);

// kAuto picks the DP when it applies and branch-and-bound otherwise.
SolveReport Solve(const AllocationProblem& problem, SolverKind kind,
                  const BnbOptions& options = {});

// "status,objective,cost,nodes,bound,wall_ms"
std::string SolveReportCsvHeader();
std::string SolveReportCsvRow(const SolveReport& report,
                              const AllocationProblem& problem);

std::string PolicyToCsv(const Policy& policy, std::span<const double> doses);

// Problem files: cade.csv and cost.csv share the CADE layout; meta.csv has
// columns entity,b,a,budget,eps_dt,eps_do where the last three repeat on
// every row and an eps cell may read "disabled".
void WriteProblemFiles(const AllocationProblem& problem,
                       const std::string& directory);
AllocationProblem ReadProblemFiles(const std::string& cade_path,
                                   const std::string& cost_path,
                                   const std::string& meta_path);

}  // namespace doseopt

#endif  // DOSEOPT_ALLOC_H_
