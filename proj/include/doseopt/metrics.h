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

#ifndef DOSEOPT_METRICS_H_
#define DOSEOPT_METRICS_H_

// Evaluation quantities: regret, value curves, normalized curve areas and
// group disparity reports.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "doseopt/alloc.h"
#include "doseopt/matrix.h"

namespace doseopt {

double Regret(double v_opt, double v_presc);

// (v_opt - v_presc) / v_opt. Throws Error(kNumerical) when |v_opt| <= 1e-12.
double RegretNorm(double v_opt, double v_presc);

struct ValueCurve {
  std::vector<double> budgets;  // Strictly ascending.
  std::vector<double> values;
  std::string provenance;
};

// For each budget: solve `problem` (its effects are the policy-side T) with
// the budget replaced, then evaluate the policy against `eval_effects` with
// the problem's benefits. If `expected` is non-null it receives the solve
// objectives (policy evaluated on the policy-side T).
ValueCurve ComputeValueCurve(const AllocationProblem& problem,
                             std::span<const double> budgets,
                             SolverKind solver, const Matrix& eval_effects,
                             const BnbOptions& options = {},
                             ValueCurve* expected = nullptr);

// Trapezoid area of `curve` over its grid divided by the area of
// `optimal_curve`. A (0, 0) point is prepended when the grid does not start
// at zero budget. Grids must match exactly.
double Auuc(const ValueCurve& curve, const ValueCurve& optimal_curve);

// Trapezoid area with the same (0, 0) anchoring rule.
double CurveArea(const ValueCurve& curve);

// Restriction of a curve to budgets <= cap. Throws unless cap is a grid
// point.
ValueCurve TruncateCurve(const ValueCurve& curve, double cap);

// Smallest budget at which the unconstrained optimum is attained: every
// entity takes its cheapest value-maximizing dose (dose 0 when no dose has
// positive value). Requires inactive fairness.
double FlatteningBudget(const AllocationProblem& problem,
                        double tolerance = 1e-12);

struct FairnessReport {
  double mean_dose_g0 = 0.0;
  double mean_dose_g1 = 0.0;
  double outcome_g0 = 0.0;
  double outcome_g1 = 0.0;
  // g0 / g1; empty when the group 1 mean is zero.
  std::optional<double> treatment_ratio;
  std::optional<double> outcome_ratio;
};

// Throws Error(kInvalidArgument) when either group is empty.
FairnessReport MakeFairnessReport(const Policy& policy, const Matrix& effects,
                                  std::span<const double> doses,
                                  std::span<const int> groups);

// "budget,value_exp,value_presc,value_opt"
std::string CurvesToCsv(const ValueCurve& expected,
                        const ValueCurve& prescribed,
                        const ValueCurve& optimal);

}  // namespace doseopt

#endif  // DOSEOPT_METRICS_H_
