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

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

#include "doseopt/csv.h"
#include "doseopt/error.h"

namespace doseopt {
namespace {

using Clock = std::chrono::steady_clock;

double ElapsedMs(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

void CheckShape(const Policy& policy, const Matrix& m, const char* what) {
  if (policy.entities() != m.rows() ||
      static_cast<std::size_t>(policy.num_doses()) != m.cols()) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("policy shape does not match ") + what);
  }
}

double EntityValue(const AllocationProblem& p, std::size_t i, int d) {
  return p.effects(i, d) * p.benefits[i];
}

}  // namespace

void AllocationProblem::Validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, "allocation problem: " + what);
  };
  const std::size_t n = entities();
  const std::size_t k = num_doses();
  if (k < 2) fail("need at least two doses (zero and one more)");
  if (doses.size() != k) fail("dose grid size mismatch");
  if (doses.front() != 0.0) fail("first dose must be 0");
  if (costs.rows() != n || costs.cols() != k) fail("cost matrix shape");
  if (benefits.size() != n) fail("benefit vector length");
  if (groups.size() != n) fail("group label length");
  if (!(budget >= 0.0) || !std::isfinite(budget)) fail("budget must be >= 0");
  for (std::size_t i = 0; i < n; ++i) {
    if (costs(i, 0) != 0.0) fail("zero dose must cost 0");
    if (groups[i] != 0 && groups[i] != 1) fail("group labels must be 0/1");
    if (!std::isfinite(benefits[i])) fail("non-finite benefit");
    for (std::size_t d = 0; d < k; ++d) {
      if (!(costs(i, d) >= 0.0) || !std::isfinite(costs(i, d))) {
        fail("costs must be finite and non-negative");
      }
      if (!std::isfinite(effects(i, d))) fail("non-finite effect");
    }
  }
  for (const auto& eps : {eps_dt, eps_do}) {
    if (eps && !(*eps >= 0.0 && *eps <= 1.0)) {
      fail("fairness slack must lie in [0, 1]");
    }
  }
}

ActiveFairness ResolveFairness(const AllocationProblem& problem) {
  ActiveFairness active;
  auto on = [&](const std::optional<double>& eps) {
    return eps.has_value() && (problem.strict_fairness || *eps < 1.0);
  };
  active.dose = on(problem.eps_dt);
  active.outcome = on(problem.eps_do);
  if (active.any()) {
    const auto ones = std::count(problem.groups.begin(), problem.groups.end(), 1);
    const auto zeros = static_cast<std::ptrdiff_t>(problem.groups.size()) - ones;
    if (ones == 0 || zeros == 0) {
      active.dose = active.outcome = false;
      active.warnings.push_back(
          "a protected group is empty; fairness constraints skipped");
    }
  }
  return active;
}

Matrix ProportionalCosts(std::size_t entities, std::span<const double> doses) {
  Matrix costs(entities, doses.size());
  for (std::size_t i = 0; i < entities; ++i) {
    std::copy(doses.begin(), doses.end(), costs.row(i).begin());
  }
  return costs;
}

AllocationProblem MakeUpliftProblem(const CadeMatrix& effects,
                                    std::vector<int> groups, double budget) {
  AllocationProblem p;
  p.effects = effects.values;
  p.doses = effects.doses;
  p.costs = ProportionalCosts(effects.entities(), effects.doses);
  p.benefits.assign(effects.entities(), 1.0);
  p.budget = budget;
  p.groups = std::move(groups);
  return p;
}

Policy::Policy(std::vector<int> dose_index, int num_doses)
    : dose_index_(std::move(dose_index)), num_doses_(num_doses) {
  for (int d : dose_index_) {
    if (d < 0 || d >= num_doses_) {
      throw Error(ErrorCode::kInvalidArgument, "dose index out of range");
    }
  }
}

Policy Policy::AllZero(std::size_t entities, int num_doses) {
  return Policy(std::vector<int>(entities, 0), num_doses);
}

Policy Policy::FromMatrix(const Matrix& assignment) {
  std::vector<int> index(assignment.rows(), -1);
  for (std::size_t i = 0; i < assignment.rows(); ++i) {
    int ones = 0;
    for (std::size_t d = 0; d < assignment.cols(); ++d) {
      const double v = assignment(i, d);
      if (v == 1.0) {
        ++ones;
        index[i] = static_cast<int>(d);
      } else if (v != 0.0) {
        throw Error(ErrorCode::kValidation,
                    "policy entry is not binary at entity " +
                        std::to_string(i));
      }
    }
    if (ones != 1) {
      throw Error(ErrorCode::kValidation,
                  "policy row " + std::to_string(i) +
                      " does not select exactly one dose");
    }
  }
  return Policy(std::move(index), static_cast<int>(assignment.cols()));
}

Matrix Policy::ToMatrix() const {
  Matrix m(entities(), num_doses_, 0.0);
  for (std::size_t i = 0; i < entities(); ++i) m(i, dose_index_[i]) = 1.0;
  return m;
}

double PolicyCost(const Policy& policy, const Matrix& costs) {
  CheckShape(policy, costs, "cost matrix");
  double total = 0.0;
  for (std::size_t i = 0; i < policy.entities(); ++i) {
    total += costs(i, policy.dose(i));
  }
  return total;
}

double PolicyValue(const Policy& policy, const Matrix& effects,
                   std::span<const double> benefits) {
  CheckShape(policy, effects, "effect matrix");
  if (benefits.size() != policy.entities()) {
    throw Error(ErrorCode::kInvalidArgument,
                "benefit vector length does not match policy");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < policy.entities(); ++i) {
    total += effects(i, policy.dose(i)) * benefits[i];
  }
  return total;
}

GroupMeans ComputeGroupMeans(const Policy& policy, const Matrix& effects,
                             std::span<const double> doses,
                             std::span<const int> groups) {
  CheckShape(policy, effects, "effect matrix");
  if (groups.size() != policy.entities() ||
      doses.size() != static_cast<std::size_t>(policy.num_doses())) {
    throw Error(ErrorCode::kInvalidArgument, "group/dose vector length");
  }
  GroupMeans means;
  std::array<double, 2> count{0.0, 0.0};
  std::array<double, 2> dose_sum{0.0, 0.0};
  std::array<double, 2> effect_sum{0.0, 0.0};
  for (std::size_t i = 0; i < policy.entities(); ++i) {
    const int g = groups[i];
    count[g] += 1.0;
    dose_sum[g] += doses[policy.dose(i)];
    effect_sum[g] += effects(i, policy.dose(i));
  }
  if (count[0] > 0) {
    means.dose_g0 = dose_sum[0] / count[0];
    means.effect_g0 = effect_sum[0] / count[0];
  }
  if (count[1] > 0) {
    means.dose_g1 = dose_sum[1] / count[1];
    means.effect_g1 = effect_sum[1] / count[1];
  }
  return means;
}

double ConstraintViolation(const AllocationProblem& problem,
                           const Policy& policy) {
  double worst =
      std::max(0.0, PolicyCost(policy, problem.costs) - problem.budget);
  const ActiveFairness active = ResolveFairness(problem);
  if (!active.any()) return worst;
  const GroupMeans m = ComputeGroupMeans(policy, problem.effects,
                                         problem.doses, problem.groups);
  auto pair = [&](double g0, double g1, double eps) {
    worst = std::max(worst, (1.0 - eps) * g1 - g0);
    worst = std::max(worst, g0 - (1.0 + eps) * g1);
  };
  if (active.dose) pair(m.dose_g0, m.dose_g1, *problem.eps_dt);
  if (active.outcome) pair(m.effect_g0, m.effect_g1, *problem.eps_do);
  return worst;
}

const char* SolveStatusName(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kInfeasible:
      return "infeasible";
    case SolveStatus::kHeuristic:
      return "heuristic";
    case SolveStatus::kLimit:
      return "limit";
  }
  return "unknown";
}

SolveReport SolveGreedy(const AllocationProblem& problem) {
  const auto start = Clock::now();
  problem.Validate();
  const ActiveFairness active = ResolveFairness(problem);
  if (active.any()) {
    throw Error(ErrorCode::kUnsupported,
                "greedy heuristic cannot honor fairness constraints");
  }
  const std::size_t n = problem.entities();
  const int k = static_cast<int>(problem.num_doses());
  std::vector<int> best(n, 0);
  std::vector<double> best_value(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double v = EntityValue(problem, i, 0);
    int arg = 0;
    for (int d = 1; d < k; ++d) {
      const double cand = EntityValue(problem, i, d);
      if (cand > v) {
        v = cand;
        arg = d;
      }
    }
    best[i] = arg;
    best_value[i] = v;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return best_value[a] > best_value[b];
                   });
  std::vector<int> assignment(n, 0);
  double remaining = problem.budget;
  for (std::size_t i : order) {
    if (!(best_value[i] > 0.0)) break;  // Sorted: the rest are <= 0 too.
    const double cost = problem.costs(i, best[i]);
    if (cost <= remaining + kFeasibilityTolerance) {
      assignment[i] = best[i];
      remaining -= cost;
    }
  }
  SolveReport report;
  report.status = SolveStatus::kHeuristic;
  report.policy = Policy(std::move(assignment), k);
  report.objective =
      PolicyValue(report.policy, problem.effects, problem.benefits);
  report.warnings = active.warnings;
  report.wall_ms = ElapsedMs(start);
  return report;
}

namespace {

// Scaled integer costs, or nullopt if some cost is not an integer multiple
// of 1/resolution.
std::optional<std::vector<std::int64_t>> ScaledCosts(
    const AllocationProblem& problem, int resolution) {
  std::vector<std::int64_t> scaled(problem.entities() * problem.num_doses());
  for (std::size_t i = 0; i < problem.entities(); ++i) {
    for (std::size_t d = 0; d < problem.num_doses(); ++d) {
      const double c = problem.costs(i, d) * resolution;
      const double r = std::round(c);
      if (std::abs(c - r) > 1e-9 * std::max(1.0, std::abs(c))) {
        return std::nullopt;
      }
      scaled[i * problem.num_doses() + d] = static_cast<std::int64_t>(r);
    }
  }
  return scaled;
}

int DefaultResolution(const AllocationProblem& problem,
                      std::optional<int> cost_resolution) {
  return cost_resolution.value_or(static_cast<int>(problem.num_doses()) - 1);
}

constexpr double kMaxDpCells = 2e8;

}  // namespace

bool DpApplicable(const AllocationProblem& problem,
                  std::optional<int> cost_resolution) {
  if (ResolveFairness(problem).any()) return false;
  const int resolution = DefaultResolution(problem, cost_resolution);
  if (resolution < 1 || !ScaledCosts(problem, resolution)) return false;
  const double width = std::floor(problem.budget * resolution + 1e-9) + 1.0;
  return width * static_cast<double>(problem.entities()) <= kMaxDpCells;
}

SolveReport SolveDp(const AllocationProblem& problem,
                    std::optional<int> cost_resolution) {
  const auto start = Clock::now();
  problem.Validate();
  const ActiveFairness active = ResolveFairness(problem);
  if (active.any()) {
    throw Error(ErrorCode::kUnsupported,
                "dynamic program cannot honor fairness constraints; use bnb");
  }
  const int resolution = DefaultResolution(problem, cost_resolution);
  if (resolution < 1) {
    throw Error(ErrorCode::kInvalidArgument, "cost resolution must be >= 1");
  }
  const auto scaled = ScaledCosts(problem, resolution);
  if (!scaled) {
    throw Error(ErrorCode::kUnsupported,
                "costs are not integer multiples of 1/" +
                    std::to_string(resolution) + "; use the bnb solver");
  }
  const std::size_t n = problem.entities();
  const std::size_t k = problem.num_doses();
  const auto capacity = static_cast<std::int64_t>(
      std::floor(problem.budget * resolution + 1e-9));
  const std::size_t width = static_cast<std::size_t>(capacity) + 1;
  if (static_cast<double>(width) * static_cast<double>(n) > kMaxDpCells) {
    throw Error(ErrorCode::kUnsupported,
                "DP table too large for this budget; use the bnb solver");
  }

  // best[w]: max value with total scaled cost <= w over entities so far.
  std::vector<double> best(width, 0.0);
  std::vector<double> next(width);
  std::vector<std::uint16_t> choice(n * width, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t* c = &(*scaled)[i * k];
    std::uint16_t* pick = &choice[i * width];
    for (std::size_t w = 0; w < width; ++w) {
      double v = best[w] + EntityValue(problem, i, 0);
      std::uint16_t arg = 0;
      for (std::size_t d = 1; d < k; ++d) {
        if (c[d] > static_cast<std::int64_t>(w)) continue;
        const double cand = best[w - c[d]] + EntityValue(problem, i, d);
        if (cand > v) {
          v = cand;
          arg = static_cast<std::uint16_t>(d);
        }
      }
      next[w] = v;
      pick[w] = arg;
    }
    best.swap(next);
  }
  std::vector<int> assignment(n, 0);
  std::int64_t w = capacity;
  for (std::size_t i = n; i-- > 0;) {
    const int d = choice[i * width + static_cast<std::size_t>(w)];
    assignment[i] = d;
    w -= (*scaled)[i * k + d];
  }
  SolveReport report;
  report.status = SolveStatus::kOptimal;
  report.policy = Policy(std::move(assignment), static_cast<int>(k));
  report.objective =
      PolicyValue(report.policy, problem.effects, problem.benefits);
  report.warnings = active.warnings;
  report.wall_ms = ElapsedMs(start);
  return report;
}

LpProblem BuildRelaxation(const AllocationProblem& problem) {
  problem.Validate();
  const ActiveFairness active = ResolveFairness(problem);
  const std::size_t n = problem.entities();
  const std::size_t k = problem.num_doses();
  const std::size_t vars = n * k;
  const std::size_t rows =
      n + 1 + (active.dose ? 2 : 0) + (active.outcome ? 2 : 0);

  LpProblem lp;
  lp.objective.resize(vars);
  lp.lower.assign(vars, 0.0);
  lp.upper.assign(vars, 1.0);
  lp.constraints = Matrix(rows, vars, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < k; ++d) {
      const std::size_t v = i * k + d;
      lp.objective[v] = EntityValue(problem, i, static_cast<int>(d));
      lp.constraints(i, v) = 1.0;                 // Exactly one dose.
      lp.constraints(n, v) = problem.costs(i, d);  // Budget.
    }
    lp.senses.push_back(RowSense::kEqual);
    lp.rhs.push_back(1.0);
  }
  lp.senses.push_back(RowSense::kLessEqual);
  lp.rhs.push_back(problem.budget);

  const double n1 = static_cast<double>(
      std::count(problem.groups.begin(), problem.groups.end(), 1));
  const double n0 = static_cast<double>(n) - n1;
  std::size_t row = n + 1;
  // mean_0(w) >= (1 - eps) mean_1(w)  and  mean_0(w) <= (1 + eps) mean_1(w)
  auto add_pair = [&](double eps, auto weight) {
    for (int side = 0; side < 2; ++side) {
      const double factor = side == 0 ? 1.0 - eps : 1.0 + eps;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < k; ++d) {
          const double w = weight(i, d);
          lp.constraints(row, i * k + d) =
              problem.groups[i] == 0 ? w / n0 : -factor * w / n1;
        }
      }
      lp.senses.push_back(side == 0 ? RowSense::kGreaterEqual
                                    : RowSense::kLessEqual);
      lp.rhs.push_back(0.0);
      ++row;
    }
  };
  if (active.dose) {
    add_pair(*problem.eps_dt,
             [&](std::size_t, std::size_t d) { return problem.doses[d]; });
  }
  if (active.outcome) {
    add_pair(*problem.eps_do, [&](std::size_t i, std::size_t d) {
      return problem.effects(i, d);
    });
  }
  return lp;
}

namespace {

constexpr double kPruneTolerance = 1e-9;

// Running sums that decide feasibility and value of a policy in O(1) per
// single-entity change.
class Totals {
 public:
  explicit Totals(const AllocationProblem& problem)
      : p_(problem), active_(ResolveFairness(problem)) {
    n1_ = static_cast<double>(
        std::count(problem.groups.begin(), problem.groups.end(), 1));
    n0_ = static_cast<double>(problem.entities()) - n1_;
  }

  struct Sums {
    double cost = 0.0;
    double value = 0.0;
    std::array<double, 2> dose{0.0, 0.0};
    std::array<double, 2> effect{0.0, 0.0};
  };

  void Add(Sums& s, std::size_t i, int d, double sign) const {
    const int g = p_.groups[i];
    s.cost += sign * p_.costs(i, d);
    s.value += sign * EntityValue(p_, i, d);
    s.dose[g] += sign * p_.doses[d];
    s.effect[g] += sign * p_.effects(i, d);
  }

  Sums Of(const std::vector<int>& assignment) const {
    Sums s;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
      Add(s, i, assignment[i], 1.0);
    }
    return s;
  }

  bool Feasible(const Sums& s) const {
    if (s.cost > p_.budget + kFeasibilityTolerance) return false;
    if (active_.dose && !PairHolds(s.dose, *p_.eps_dt)) return false;
    if (active_.outcome && !PairHolds(s.effect, *p_.eps_do)) return false;
    return true;
  }

 private:
  bool PairHolds(const std::array<double, 2>& sum, double eps) const {
    const double m0 = sum[0] / n0_;
    const double m1 = sum[1] / n1_;
    return (1.0 - eps) * m1 - m0 <= kFeasibilityTolerance &&
           m0 - (1.0 + eps) * m1 <= kFeasibilityTolerance;
  }

  const AllocationProblem& p_;
  ActiveFairness active_;
  double n0_ = 0.0;
  double n1_ = 0.0;
};

struct Fixing {
  int var;
  bool one;
};

struct OpenNode {
  double bound;
  std::int64_t id;
  std::vector<Fixing> fixings;
  int branch_var;
};

struct NodeOrder {
  bool operator()(const OpenNode& a, const OpenNode& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    return a.id > b.id;
  }
};

class BranchAndBound {
 public:
  BranchAndBound(const AllocationProblem& problem, const BnbOptions& options)
      : problem_(problem),
        options_(options),
        lp_(BuildRelaxation(problem)),
        totals_(problem),
        k_(static_cast<int>(problem.num_doses())) {}

  SolveReport Run() {
    const auto start = Clock::now();
    const ActiveFairness active = ResolveFairness(problem_);
    report_.warnings = active.warnings;
    if (active.any()) {
      SetIncumbent(Policy::AllZero(problem_.entities(), k_));
    } else {
      SetIncumbent(SolveGreedy(problem_).policy);
    }
    for (const Policy& start : options_.start_policies) {
      if (start.entities() == problem_.entities() &&
          start.num_doses() == k_) {
        TryIncumbent(start);
      }
    }

    std::priority_queue<OpenNode, std::vector<OpenNode>, NodeOrder> open;
    bool root_done = false;
    Evaluate({}, open, &root_done);
    bool stopped = false;
    while (!open.empty()) {
      if (Prunable(open.top().bound)) {
        Pruned(open.top().bound);
        break;
      }
      const bool out_of_time =
          options_.time_limit_seconds > 0.0 &&
          ElapsedMs(start) > 1000.0 * options_.time_limit_seconds;
      if (report_.nodes >= options_.node_limit || out_of_time) {
        stopped = true;
        break;
      }
      OpenNode node = open.top();
      open.pop();
      for (bool one : {true, false}) {
        std::vector<Fixing> child = node.fixings;
        child.push_back({node.branch_var, one});
        Evaluate(std::move(child), open, nullptr);
      }
    }

    report_.policy = incumbent_;
    report_.objective =
        PolicyValue(incumbent_, problem_.effects, problem_.benefits);
    if (stopped || lp_failures_ > 0) {
      report_.status = SolveStatus::kLimit;
      double bound = report_.objective;
      if (!open.empty()) bound = std::max(bound, open.top().bound);
      bound = std::max(bound, gap_pruned_bound_);
      if (lp_failures_ > 0) bound = std::numeric_limits<double>::infinity();
      report_.best_bound = bound;
      if (lp_failures_ > 0) {
        report_.warnings.push_back(std::to_string(lp_failures_) +
                                   " node LPs did not solve to optimality");
      }
    } else if (!root_done) {
      report_.status = SolveStatus::kInfeasible;
    } else {
      report_.status = SolveStatus::kOptimal;
      report_.best_bound = std::max(report_.objective, gap_pruned_bound_);
    }
    report_.wall_ms = ElapsedMs(start);
    return report_;
  }

 private:
  bool Prunable(double bound) const {
    return bound <= incumbent_value_ +
                        std::max(kPruneTolerance,
                                 options_.relative_gap *
                                     std::abs(incumbent_value_));
  }

  // Bounds above the exact threshold that were dropped by the gap rule.
  void Pruned(double bound) {
    if (bound > incumbent_value_ + kPruneTolerance) {
      gap_pruned_bound_ = std::max(gap_pruned_bound_, bound);
    }
  }

  void SetIncumbent(Policy policy) {
    incumbent_value_ =
        PolicyValue(policy, problem_.effects, problem_.benefits);
    incumbent_ = std::move(policy);
  }

  void TryIncumbent(const Policy& policy) {
    if (ConstraintViolation(problem_, policy) > kFeasibilityTolerance) return;
    const double value =
        PolicyValue(policy, problem_.effects, problem_.benefits);
    if (value > incumbent_value_ + 1e-12) SetIncumbent(Polish(policy));
  }

  // First-improvement search over single dose changes and pairwise
  // exchanges, keeping every intermediate policy feasible.
  Policy Polish(const Policy& start) const {
    constexpr int kMaxPasses = 20;
    std::vector<int> x = start.dose_indices();
    Totals::Sums sums = totals_.Of(x);
    const std::size_t n = x.size();
    for (int pass = 0; pass < kMaxPasses; ++pass) {
      bool improved = false;
      for (std::size_t i = 0; i < n; ++i) {
        for (int d = 0; d < k_; ++d) {
          if (d == x[i]) continue;
          Totals::Sums t = sums;
          totals_.Add(t, i, x[i], -1.0);
          totals_.Add(t, i, d, 1.0);
          if (t.value > sums.value + 1e-12 && totals_.Feasible(t)) {
            sums = t;
            x[i] = d;
            improved = true;
          }
        }
      }
      for (std::size_t i = 0; i < n; ++i) {
        for (int di = 0; di < k_; ++di) {
          if (di == x[i]) continue;
          Totals::Sums ti = sums;
          totals_.Add(ti, i, x[i], -1.0);
          totals_.Add(ti, i, di, 1.0);
          for (std::size_t j = i + 1; j < n; ++j) {
            for (int dj = 0; dj < k_; ++dj) {
              if (dj == x[j]) continue;
              const double gain = ti.value - sums.value +
                                  EntityValue(problem_, j, dj) -
                                  EntityValue(problem_, j, x[j]);
              if (gain <= 1e-12) continue;
              Totals::Sums t = ti;
              totals_.Add(t, j, x[j], -1.0);
              totals_.Add(t, j, dj, 1.0);
              if (!totals_.Feasible(t)) continue;
              sums = t;
              x[i] = di;
              x[j] = dj;
              improved = true;
              break;
            }
            if (x[i] == di) break;
          }
          if (x[i] == di) break;
        }
      }
      if (!improved) break;
    }
    Policy polished(std::move(x), k_);
    // Drift in the running sums is rechecked exactly.
    if (ConstraintViolation(problem_, polished) > kFeasibilityTolerance ||
        PolicyValue(polished, problem_.effects, problem_.benefits) <
            PolicyValue(start, problem_.effects, problem_.benefits)) {
      return start;
    }
    return polished;
  }

  void Evaluate(std::vector<Fixing> fixings,
                std::priority_queue<OpenNode, std::vector<OpenNode>,
                                    NodeOrder>& open,
                bool* root_feasible) {
    std::vector<double> lower = lp_.lower;
    std::vector<double> upper = lp_.upper;
    for (const Fixing& f : fixings) {
      if (f.one) {
        const int entity = f.var / k_;
        for (int d = 0; d < k_; ++d) upper[entity * k_ + d] = 0.0;
        upper[f.var] = 1.0;
        lower[f.var] = 1.0;
      } else {
        upper[f.var] = 0.0;
      }
    }
    ++report_.nodes;
    const LpSolution sol = SolveLp(lp_, lower, upper, options_.lp);
    if (sol.status == LpStatus::kInfeasible) return;
    if (sol.status != LpStatus::kOptimal) {
      ++lp_failures_;
      return;
    }
    if (root_feasible != nullptr) {
      *root_feasible = true;
      report_.root_bound = sol.objective;
    }
    if (Prunable(sol.objective)) {
      Pruned(sol.objective);
      return;
    }

    // Most fractional variable; ties go to the lowest index.
    int branch = -1;
    double best_frac = options_.integrality_tolerance;
    for (std::size_t v = 0; v < sol.primal.size(); ++v) {
      const double frac = std::min(sol.primal[v], 1.0 - sol.primal[v]);
      if (frac > best_frac) {
        best_frac = frac;
        branch = static_cast<int>(v);
      }
    }

    // Rounding: per entity, the largest LP weight, and separately the
    // cheapest dose carrying positive weight.
    const std::size_t n = problem_.entities();
    std::vector<int> largest(n, 0);
    std::vector<int> cheapest(n, 0);
    std::vector<std::size_t> fractional;
    for (std::size_t i = 0; i < n; ++i) {
      double weight = -1.0;
      double cost = std::numeric_limits<double>::infinity();
      for (int d = 0; d < k_; ++d) {
        const double x = sol.primal[i * k_ + d];
        if (x > weight + 1e-12) {
          weight = x;
          largest[i] = d;
        }
        if (x > options_.integrality_tolerance && problem_.costs(i, d) < cost) {
          cost = problem_.costs(i, d);
          cheapest[i] = d;
        }
      }
      if (weight < 1.0 - options_.integrality_tolerance) {
        fractional.push_back(i);
      }
    }
    if (!fractional.empty()) CompleteFractional(sol.primal, largest, fractional);
    TryIncumbent(Policy(largest, k_));
    if (branch >= 0) TryIncumbent(Policy(cheapest, k_));
    if (branch < 0) return;  // Integral: the rounding above was exact.
    if (Prunable(sol.objective)) {
      Pruned(sol.objective);
      return;
    }
    open.push({sol.objective, next_id_++, std::move(fixings), branch});
  }

  // Keeps the integral entities of an LP solution and enumerates the
  // fractional ones: all doses when that is cheap, otherwise dose 0 plus the
  // doses with LP weight.
  void CompleteFractional(const std::vector<double>& primal,
                          const std::vector<int>& base,
                          const std::vector<std::size_t>& fractional) {
    constexpr double kMaxCombos = 20000.0;
    std::vector<std::vector<int>> options(fractional.size());
    double combos = 1.0;
    for (std::size_t f = 0; f < fractional.size(); ++f) {
      for (int d = 0; d < k_; ++d) options[f].push_back(d);
      combos *= k_;
    }
    if (combos > kMaxCombos) {
      combos = 1.0;
      for (std::size_t f = 0; f < fractional.size(); ++f) {
        options[f].clear();
        for (int d = 0; d < k_; ++d) {
          if (d == 0 || primal[fractional[f] * k_ + d] >
                            options_.integrality_tolerance) {
            options[f].push_back(d);
          }
        }
        combos *= static_cast<double>(options[f].size());
      }
      if (combos > kMaxCombos) return;
    }
    std::vector<bool> in_set(problem_.entities(), false);
    for (std::size_t i : fractional) in_set[i] = true;
    Totals::Sums fixed;
    for (std::size_t i = 0; i < problem_.entities(); ++i) {
      if (!in_set[i]) totals_.Add(fixed, i, base[i], 1.0);
    }
    std::vector<int> pick(fractional.size(), 0);
    std::vector<int> best_pick;
    double best_value = incumbent_value_;
    auto search = [&](auto&& self, std::size_t level,
                      const Totals::Sums& acc) -> void {
      if (level == fractional.size()) {
        if (acc.value > best_value + 1e-12 && totals_.Feasible(acc)) {
          best_value = acc.value;
          best_pick = pick;
        }
        return;
      }
      for (int d : options[level]) {
        Totals::Sums next = acc;
        totals_.Add(next, fractional[level], d, 1.0);
        if (next.cost > problem_.budget + kFeasibilityTolerance) continue;
        pick[level] = d;
        self(self, level + 1, next);
      }
    };
    search(search, 0, fixed);
    if (best_pick.empty()) return;
    std::vector<int> assignment = base;
    for (std::size_t f = 0; f < fractional.size(); ++f) {
      assignment[fractional[f]] = best_pick[f];
    }
    TryIncumbent(Policy(std::move(assignment), k_));
  }

  const AllocationProblem& problem_;
  const BnbOptions& options_;
  LpProblem lp_;
  Totals totals_;
  int k_;
  Policy incumbent_;
  double incumbent_value_ = -std::numeric_limits<double>::infinity();
  SolveReport report_;
  std::int64_t next_id_ = 0;
  std::int64_t lp_failures_ = 0;
  double gap_pruned_bound_ = -std::numeric_limits<double>::infinity();
};

}  // namespace

SolveReport SolveBnb(const AllocationProblem& problem,
                     const BnbOptions& options) {
  problem.Validate();
  return BranchAndBound(problem, options).Run();
}

SolveReport BruteForce(const AllocationProblem& problem) {
  const auto start = Clock::now();
  problem.Validate();
  const std::size_t n = problem.entities();
  const int k = static_cast<int>(problem.num_doses());
  double combos = 1.0;
  for (std::size_t i = 0; i < n; ++i) combos *= k;
  if (combos > 1e7) {
    throw Error(ErrorCode::kInvalidArgument,
                "brute force limited to (delta+1)^N <= 1e7 assignments");
  }
  std::vector<int> current(n, 0);
  std::optional<Policy> best;
  double best_value = -std::numeric_limits<double>::infinity();
  while (true) {
    Policy candidate(current, k);
    if (ConstraintViolation(problem, candidate) <= kFeasibilityTolerance) {
      const double v =
          PolicyValue(candidate, problem.effects, problem.benefits);
      if (v > best_value + 1e-12) {
        best_value = v;
        best = std::move(candidate);
      }
    }
    // Odometer with entity 0 most significant gives lexicographic order.
    std::size_t pos = n;
    while (pos > 0 && current[pos - 1] == k - 1) current[--pos] = 0;
    if (pos == 0) break;
    ++current[pos - 1];
  }
  SolveReport report;
  report.warnings = ResolveFairness(problem).warnings;
  report.nodes = static_cast<std::int64_t>(combos);
  if (!best) {
    report.status = SolveStatus::kInfeasible;
  } else {
    report.status = SolveStatus::kOptimal;
    report.policy = std::move(*best);
    report.objective = best_value;
    report.best_bound = best_value;
  }
  report.wall_ms = ElapsedMs(start);
  return report;
}

SolverKind ParseSolverKind(const std::string& name) {
  if (name == "greedy") return SolverKind::kGreedy;
  if (name == "dp") return SolverKind::kDp;
  if (name == "bnb") return SolverKind::kBnb;
  if (name == "auto") return SolverKind::kAuto;
  if (name == "brute") return SolverKind::kBruteForce;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown solver '" + name + "' (greedy|dp|bnb|auto|brute)");
}

const char* SolverKindName(SolverKind kind) {
  switch (kind) {
    case SolverKind::kGreedy:
      return "greedy";
    case SolverKind::kDp:
      return "dp";
    case SolverKind::kBnb:
      return "bnb";
    case SolverKind::kAuto:
      return "auto";
    case SolverKind::kBruteForce:
      return "brute";
  }
  return "unknown";
}

SolveReport Solve(const AllocationProblem& problem, SolverKind kind,
                  const BnbOptions& options) {
  switch (kind) {
    case SolverKind::kGreedy:
      return SolveGreedy(problem);
    case SolverKind::kDp:
      return SolveDp(problem);
    case SolverKind::kBnb:
      return SolveBnb(problem, options);
    case SolverKind::kAuto:
      return DpApplicable(problem) ? SolveDp(problem)
                                   : SolveBnb(problem, options);
    case SolverKind::kBruteForce:
      return BruteForce(problem);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown solver kind");
}

std::string SolveReportCsvHeader() {
  return "status,objective,cost,nodes,bound,wall_ms";
}

std::string SolveReportCsvRow(const SolveReport& report,
                              const AllocationProblem& problem) {
  std::ostringstream out;
  out << SolveStatusName(report.status) << ','
      << FormatDouble(report.objective) << ','
      << FormatDouble(report.policy.entities() > 0
                          ? PolicyCost(report.policy, problem.costs)
                          : 0.0)
      << ',' << report.nodes << ','
      << (report.best_bound ? FormatDouble(*report.best_bound) : "") << ','
      << FormatDouble(report.wall_ms);
  return out.str();
}

std::string PolicyToCsv(const Policy& policy, std::span<const double> doses) {
  std::ostringstream out;
  out << "entity,dose_index,dose\n";
  for (std::size_t i = 0; i < policy.entities(); ++i) {
    out << i << ',' << policy.dose(i) << ',' << FormatDose(doses[policy.dose(i)])
        << '\n';
  }
  return out.str();
}

namespace {

std::string EpsCell(const std::optional<double>& eps) {
  return eps ? FormatDouble(*eps) : "disabled";
}

std::optional<double> ParseEps(const std::string& cell, std::size_t row,
                               std::size_t col) {
  if (cell == "disabled" || cell.empty()) return std::nullopt;
  return ParseCell(cell, row, col);
}

}  // namespace

void WriteProblemFiles(const AllocationProblem& problem,
                       const std::string& directory) {
  problem.Validate();
  std::filesystem::create_directories(directory);
  CadeMatrix effects{problem.effects, problem.doses, Provenance::kEstimated};
  CadeMatrix costs{problem.costs, problem.doses, Provenance::kEstimated};
  WriteTextFile(directory + "/cade.csv", CadeMatrixToCsv(effects));
  WriteTextFile(directory + "/cost.csv", CadeMatrixToCsv(costs));
  std::ostringstream meta;
  meta << "entity,b,a,budget,eps_dt,eps_do\n";
  for (std::size_t i = 0; i < problem.entities(); ++i) {
    meta << i << ',' << FormatDouble(problem.benefits[i]) << ','
         << problem.groups[i] << ',' << FormatDouble(problem.budget) << ','
         << EpsCell(problem.eps_dt) << ',' << EpsCell(problem.eps_do) << '\n';
  }
  WriteTextFile(directory + "/meta.csv", meta.str());
}

AllocationProblem ReadProblemFiles(const std::string& cade_path,
                                   const std::string& cost_path,
                                   const std::string& meta_path) {
  const CadeMatrix effects = CadeMatrixFromCsv(cade_path);
  const CadeMatrix costs = CadeMatrixFromCsv(cost_path);
  if (effects.doses != costs.doses ||
      effects.entities() != costs.entities()) {
    throw Error(ErrorCode::kValidation,
                "cade.csv and cost.csv disagree on shape or dose grid");
  }
  const CsvTable meta = ReadCsv(meta_path, /*has_header=*/true);
  const std::vector<std::string> expected = {"entity", "b",      "a",
                                             "budget", "eps_dt", "eps_do"};
  if (meta.header != expected) {
    throw Error(ErrorCode::kValidation,
                meta_path + ": header must be entity,b,a,budget,eps_dt,eps_do");
  }
  if (meta.rows.size() != effects.entities()) {
    throw Error(ErrorCode::kValidation,
                meta_path + ": one row per entity expected");
  }
  AllocationProblem p;
  p.effects = effects.values;
  p.doses = effects.doses;
  p.costs = costs.values;
  for (std::size_t i = 0; i < meta.rows.size(); ++i) {
    const auto& r = meta.rows[i];
    p.benefits.push_back(ParseCell(r[1], i + 1, 2));
    const double a = ParseCell(r[2], i + 1, 3);
    if (a != 0.0 && a != 1.0) {
      throw Error(ErrorCode::kValidation,
                  meta_path + ": group label must be 0 or 1");
    }
    p.groups.push_back(static_cast<int>(a));
    const double budget = ParseCell(r[3], i + 1, 4);
    const auto dt = ParseEps(r[4], i + 1, 5);
    const auto dout = ParseEps(r[5], i + 1, 6);
    if (i == 0) {
      p.budget = budget;
      p.eps_dt = dt;
      p.eps_do = dout;
    } else if (budget != p.budget || dt != p.eps_dt || dout != p.eps_do) {
      throw Error(ErrorCode::kValidation,
                  meta_path + ": budget and slacks must repeat on every row");
    }
  }
  p.Validate();
  return p;
}

}  // namespace doseopt
