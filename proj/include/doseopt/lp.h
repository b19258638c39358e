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

#ifndef DOSEOPT_LP_H_
#define DOSEOPT_LP_H_

// Bounded-variable primal simplex for small dense LPs (maximization).

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "doseopt/matrix.h"

namespace doseopt {

enum class RowSense { kLessEqual, kGreaterEqual, kEqual };

// maximize c'x  s.t.  A x (<=|>=|=) rhs,  lower <= x <= upper.
struct LpProblem {
  std::vector<double> objective;
  Matrix constraints;  // rows x variables, row-major.
  std::vector<RowSense> senses;
  std::vector<double> rhs;
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t num_vars() const { return objective.size(); }
  std::size_t num_rows() const { return rhs.size(); }

  // Throws Error(kInvalidArgument) on inconsistent dimensions, lower > upper
  // or non-finite data.
  void Validate() const;
};

enum class LpStatus {
  kOptimal,
  kInfeasible,
  kUnbounded,
  kIterationLimit,
  kNumericalFailure,
};

const char* LpStatusName(LpStatus status);

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  double objective = 0.0;
  std::vector<double> primal;
  std::int64_t iterations = 0;
};

// Tolerances live here and nowhere else.
struct LpOptions {
  double pivot_tolerance = 1e-9;
  double feasibility_tolerance = 1e-7;
  double optimality_tolerance = 1e-9;
  // 0 selects 100 * (rows + cols).
  std::int64_t max_iterations = 0;
  // Consecutive non-improving pivots before switching to Bland's rule.
  int stall_threshold = 50;
  // Basis changes between explicit reinversions of the basis matrix.
  int refactor_interval = 100;
  bool verbose = false;
};

LpSolution SolveLp(const LpProblem& problem, const LpOptions& options = {});

// Same problem with the variable bounds replaced (used by branch-and-bound,
// which only tightens bounds between nodes).
LpSolution SolveLp(const LpProblem& problem, std::span<const double> lower,
                   std::span<const double> upper,
                   const LpOptions& options = {});

// Largest violation of rows and bounds by `x` (0 when feasible).
double MaxViolation(const LpProblem& problem, std::span<const double> x);

}  // namespace doseopt

#endif  // DOSEOPT_LP_H_
