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

#include "doseopt/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "doseopt/csv.h"
#include "doseopt/error.h"

namespace doseopt {

double Regret(double v_opt, double v_presc) { return v_opt - v_presc; }

double RegretNorm(double v_opt, double v_presc) {
  if (std::abs(v_opt) <= 1e-12) {
    throw Error(ErrorCode::kNumerical,
                "normalized regret is undefined when the optimal value is 0");
  }
  return (v_opt - v_presc) / v_opt;
}

ValueCurve ComputeValueCurve(const AllocationProblem& problem,
                             std::span<const double> budgets,
                             SolverKind solver, const Matrix& eval_effects,
                             const BnbOptions& options, ValueCurve* expected) {
  if (eval_effects.rows() != problem.entities() ||
      eval_effects.cols() != problem.num_doses()) {
    throw Error(ErrorCode::kInvalidArgument,
                "evaluation effects do not match the problem shape");
  }
  for (std::size_t j = 1; j < budgets.size(); ++j) {
    if (!(budgets[j] > budgets[j - 1])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "budget grid must be strictly ascending");
    }
  }
  ValueCurve curve;
  curve.provenance = std::string("solver=") + SolverKindName(solver);
  curve.budgets.assign(budgets.begin(), budgets.end());
  if (expected != nullptr) *expected = curve;
  AllocationProblem p = problem;
  for (double budget : budgets) {
    p.budget = budget;
    SolveReport report;
    try {
      report = Solve(p, solver, options);
    } catch (const Error& e) {
      throw Error(e.code(), "budget " + FormatDouble(budget) + ": " + e.what());
    }
    if (report.status == SolveStatus::kInfeasible) {
      throw Error(ErrorCode::kFailedPrecondition,
                  "budget " + FormatDouble(budget) + ": problem infeasible");
    }
    curve.values.push_back(
        PolicyValue(report.policy, eval_effects, problem.benefits));
    if (expected != nullptr) expected->values.push_back(report.objective);
  }
  return curve;
}

double CurveArea(const ValueCurve& curve) {
  if (curve.budgets.size() != curve.values.size()) {
    throw Error(ErrorCode::kInvalidArgument, "curve size mismatch");
  }
  if (curve.budgets.empty()) return 0.0;
  double area = 0.0;
  double prev_b = 0.0;
  double prev_v = 0.0;
  std::size_t start = 0;
  if (curve.budgets.front() == 0.0) {
    prev_v = curve.values.front();
    start = 1;
  }
  for (std::size_t j = start; j < curve.budgets.size(); ++j) {
    area += 0.5 * (curve.budgets[j] - prev_b) * (curve.values[j] + prev_v);
    prev_b = curve.budgets[j];
    prev_v = curve.values[j];
  }
  return area;
}

double Auuc(const ValueCurve& curve, const ValueCurve& optimal_curve) {
  if (curve.budgets != optimal_curve.budgets) {
    throw Error(ErrorCode::kInvalidArgument,
                "curves must share the same budget grid");
  }
  const double denom = CurveArea(optimal_curve);
  if (std::abs(denom) <= 1e-12) {
    throw Error(ErrorCode::kNumerical, "optimal curve has zero area");
  }
  return CurveArea(curve) / denom;
}

ValueCurve TruncateCurve(const ValueCurve& curve, double cap) {
  const auto it =
      std::find(curve.budgets.begin(), curve.budgets.end(), cap);
  if (it == curve.budgets.end()) {
    throw Error(ErrorCode::kInvalidArgument,
                "cap " + FormatDouble(cap) + " is not on the budget grid");
  }
  const auto n = static_cast<std::size_t>(it - curve.budgets.begin()) + 1;
  ValueCurve out;
  out.provenance = curve.provenance;
  out.budgets.assign(curve.budgets.begin(), curve.budgets.begin() + n);
  out.values.assign(curve.values.begin(), curve.values.begin() + n);
  return out;
}

double FlatteningBudget(const AllocationProblem& problem, double tolerance) {
  problem.Validate();
  if (ResolveFairness(problem).any()) {
    throw Error(ErrorCode::kUnsupported,
                "flattening budget needs inactive fairness constraints");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < problem.entities(); ++i) {
    double best = 0.0;
    for (std::size_t d = 0; d < problem.num_doses(); ++d) {
      best = std::max(best, problem.effects(i, d) * problem.benefits[i]);
    }
    double cost = 0.0;
    if (best > tolerance) {
      cost = std::numeric_limits<double>::infinity();
      for (std::size_t d = 0; d < problem.num_doses(); ++d) {
        if (problem.effects(i, d) * problem.benefits[i] >= best - tolerance) {
          cost = std::min(cost, problem.costs(i, d));
        }
      }
    }
    total += cost;
  }
  return total;
}

FairnessReport MakeFairnessReport(const Policy& policy, const Matrix& effects,
                                  std::span<const double> doses,
                                  std::span<const int> groups) {
  if (std::find(groups.begin(), groups.end(), 0) == groups.end() ||
      std::find(groups.begin(), groups.end(), 1) == groups.end()) {
    throw Error(ErrorCode::kInvalidArgument,
                "fairness report needs both protected groups non-empty");
  }
  const GroupMeans m = ComputeGroupMeans(policy, effects, doses, groups);
  FairnessReport r;
  r.mean_dose_g0 = m.dose_g0;
  r.mean_dose_g1 = m.dose_g1;
  r.outcome_g0 = m.effect_g0;
  r.outcome_g1 = m.effect_g1;
  if (m.dose_g1 != 0.0) r.treatment_ratio = m.dose_g0 / m.dose_g1;
  if (m.effect_g1 != 0.0) r.outcome_ratio = m.effect_g0 / m.effect_g1;
  return r;
}

std::string CurvesToCsv(const ValueCurve& expected,
                        const ValueCurve& prescribed,
                        const ValueCurve& optimal) {
  if (expected.budgets != prescribed.budgets ||
      expected.budgets != optimal.budgets) {
    throw Error(ErrorCode::kInvalidArgument, "curve grids differ");
  }
  std::ostringstream out;
  out << "budget,value_exp,value_presc,value_opt\n";
  for (std::size_t j = 0; j < expected.budgets.size(); ++j) {
    out << FormatDouble(expected.budgets[j]) << ','
        << FormatDouble(expected.values[j]) << ','
        << FormatDouble(prescribed.values[j]) << ','
        << FormatDouble(optimal.values[j]) << '\n';
  }
  return out.str();
}

}  // namespace doseopt
