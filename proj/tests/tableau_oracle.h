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

#ifndef DOSEOPT_TESTS_TABLEAU_ORACLE_H_
#define DOSEOPT_TESTS_TABLEAU_ORACLE_H_

#include <vector>

#include "doseopt/lp.h"

namespace doseopt::testing {

// Dense two-phase tableau simplex with Bland's rule. Slow but simple; used
// only to cross-check the production solver on small problems.
struct TableauResult {
  bool feasible = false;
  double objective = 0.0;
  std::vector<double> x;
};

TableauResult SolveByTableau(const LpProblem& problem);

}  // namespace doseopt::testing

#endif  // DOSEOPT_TESTS_TABLEAU_ORACLE_H_
