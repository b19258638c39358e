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

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

#include "doseopt/error.h"

namespace doseopt {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Revised simplex on  A x + s = b  with slack bounds encoding the row sense
// and one artificial per row (fixed at zero unless phase one needs it).
// The basis inverse is kept dense and column-major; columns are sparse.
class BoundedSimplex {
 public:
  BoundedSimplex(const LpProblem& problem, std::span<const double> lower,
                 std::span<const double> upper, const LpOptions& options)
      : problem_(problem), options_(options) {
    m_ = static_cast<int>(problem.num_rows());
    const int n = static_cast<int>(problem.num_vars());
    max_iterations_ = options.max_iterations > 0
                          ? options.max_iterations
                          : 100LL * (problem.num_rows() + problem.num_vars());

    // Fixed variables are substituted out.
    fixed_value_.assign(lower.begin(), lower.end());
    rhs_ = problem.rhs;
    for (int j = 0; j < n; ++j) {
      if (lower[j] < upper[j]) {
        kept_.push_back(j);
      } else {
        for (int i = 0; i < m_; ++i) {
          rhs_[i] -= problem.constraints(i, j) * lower[j];
        }
      }
    }
    num_structural_ = static_cast<int>(kept_.size());
    num_vars_ = num_structural_ + 2 * m_;

    // Column-compressed storage, built with two row-major passes.
    std::vector<int> local(n, -1);
    for (int k = 0; k < num_structural_; ++k) local[kept_[k]] = k;
    std::vector<int> counts(num_vars_, 0);
    for (int i = 0; i < m_; ++i) {
      const auto row = problem.constraints.row(i);
      for (int j = 0; j < n; ++j) {
        if (local[j] >= 0 && row[j] != 0.0) ++counts[local[j]];
      }
    }
    for (int i = 0; i < 2 * m_; ++i) counts[num_structural_ + i] = 1;
    col_start_.assign(num_vars_ + 1, 0);
    for (int v = 0; v < num_vars_; ++v) {
      col_start_[v + 1] = col_start_[v] + counts[v];
    }
    row_index_.resize(col_start_.back());
    values_.resize(col_start_.back());
    std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
    for (int i = 0; i < m_; ++i) {
      const auto row = problem.constraints.row(i);
      for (int j = 0; j < n; ++j) {
        if (local[j] >= 0 && row[j] != 0.0) {
          const int at = fill[local[j]]++;
          row_index_[at] = i;
          values_[at] = row[j];
        }
      }
    }
    for (int i = 0; i < m_; ++i) {
      const int slack = num_structural_ + i;
      row_index_[col_start_[slack]] = i;
      values_[col_start_[slack]] = 1.0;
      const int art = num_structural_ + m_ + i;
      row_index_[col_start_[art]] = i;
      values_[col_start_[art]] = 1.0;  // Sign set during the crash.
    }

    lo_.assign(num_vars_, 0.0);
    hi_.assign(num_vars_, 0.0);
    for (int k = 0; k < num_structural_; ++k) {
      lo_[k] = lower[kept_[k]];
      hi_[k] = upper[kept_[k]];
    }
    for (int i = 0; i < m_; ++i) {
      const int slack = num_structural_ + i;
      switch (problem.senses[i]) {
        case RowSense::kLessEqual:
          lo_[slack] = 0.0;
          hi_[slack] = kInf;
          break;
        case RowSense::kGreaterEqual:
          lo_[slack] = -kInf;
          hi_[slack] = 0.0;
          break;
        case RowSense::kEqual:
          lo_[slack] = 0.0;
          hi_[slack] = 0.0;
          break;
      }
    }
  }

  LpSolution Run() {
    const bool needs_phase_one = Crash();
    if (needs_phase_one) {
      cost_.assign(num_vars_, 0.0);
      for (int i = 0; i < m_; ++i) cost_[num_structural_ + m_ + i] = -1.0;
      Refactor();
      const LpStatus status = Iterate();
      if (status != LpStatus::kOptimal) {
        return Finish(status == LpStatus::kUnbounded
                          ? LpStatus::kNumericalFailure
                          : status);
      }
      double infeasibility = 0.0;
      for (int i = 0; i < m_; ++i) {
        infeasibility += x_[num_structural_ + m_ + i];
      }
      if (infeasibility > options_.feasibility_tolerance) {
        return Finish(LpStatus::kInfeasible);
      }
      for (int i = 0; i < m_; ++i) hi_[num_structural_ + m_ + i] = 0.0;
      if (options_.verbose) {
        std::cerr << "lp: phase one done after " << iterations_
                  << " iterations\n";
      }
    }
    cost_.assign(num_vars_, 0.0);
    for (int k = 0; k < num_structural_; ++k) {
      cost_[k] = problem_.objective[kept_[k]];
    }
    Refactor();
    return Finish(Iterate());
  }

 private:
  // Structurals start at their lower bound. Each row gets, in order of
  // preference, its slack, a singleton structural column, or an artificial
  // as the basic variable. Returns true when an artificial is basic.
  bool Crash() {
    x_.assign(num_vars_, 0.0);
    at_upper_.assign(num_vars_, false);
    for (int k = 0; k < num_structural_; ++k) x_[k] = lo_[k];
    std::vector<double> residual = rhs_;
    std::vector<std::vector<int>> singletons(m_);
    for (int k = 0; k < num_structural_; ++k) {
      for (int p = col_start_[k]; p < col_start_[k + 1]; ++p) {
        residual[row_index_[p]] -= values_[p] * x_[k];
      }
      if (col_start_[k + 1] - col_start_[k] == 1) {
        singletons[row_index_[col_start_[k]]].push_back(k);
      }
    }
    basis_.assign(m_, -1);
    position_.assign(num_vars_, -1);
    bool phase_one = false;
    const double tol = options_.feasibility_tolerance;
    for (int i = 0; i < m_; ++i) {
      const int slack = num_structural_ + i;
      const int art = num_structural_ + m_ + i;
      hi_[art] = 0.0;
      // Nonbasic slack sits at its finite bound, which is 0 for every sense.
      at_upper_[slack] = problem_.senses[i] == RowSense::kGreaterEqual;
      const double r = residual[i];
      if (r >= lo_[slack] - tol && r <= hi_[slack] + tol) {
        SetBasic(i, slack, r);
        continue;
      }
      bool placed = false;
      for (int k : singletons[i]) {
        if (position_[k] >= 0) continue;
        const double a = values_[col_start_[k]];
        const double v = lo_[k] + r / a;
        if (v >= lo_[k] - tol && v <= hi_[k] + tol) {
          SetBasic(i, k, std::clamp(v, lo_[k], hi_[k]));
          placed = true;
          break;
        }
      }
      if (placed) continue;
      values_[col_start_[art]] = r >= 0.0 ? 1.0 : -1.0;
      hi_[art] = kInf;
      SetBasic(i, art, std::abs(r));
      phase_one = true;
    }
    return phase_one;
  }

  void SetBasic(int row, int var, double value) {
    basis_[row] = var;
    position_[var] = row;
    x_[var] = value;
  }

  // Explicit inverse of the basis by Gauss-Jordan with partial pivoting,
  // then fresh basic values and duals.
  void Refactor() {
    since_refactor_ = 0;
    const int m = m_;
    std::vector<double> w(static_cast<std::size_t>(m) * m, 0.0);
    std::vector<double> inv(static_cast<std::size_t>(m) * m, 0.0);
    for (int c = 0; c < m; ++c) {
      const int v = basis_[c];
      for (int p = col_start_[v]; p < col_start_[v + 1]; ++p) {
        w[static_cast<std::size_t>(row_index_[p]) * m + c] = values_[p];
      }
    }
    for (int i = 0; i < m; ++i) inv[static_cast<std::size_t>(i) * m + i] = 1.0;
    for (int c = 0; c < m; ++c) {
      int pivot = c;
      double best = std::abs(w[static_cast<std::size_t>(c) * m + c]);
      for (int r = c + 1; r < m; ++r) {
        const double v = std::abs(w[static_cast<std::size_t>(r) * m + c]);
        if (v > best) {
          best = v;
          pivot = r;
        }
      }
      if (best < 1e-12) {
        throw Error(ErrorCode::kNumerical, "singular simplex basis");
      }
      if (pivot != c) {
        std::swap_ranges(w.begin() + static_cast<std::size_t>(c) * m,
                         w.begin() + static_cast<std::size_t>(c + 1) * m,
                         w.begin() + static_cast<std::size_t>(pivot) * m);
        std::swap_ranges(inv.begin() + static_cast<std::size_t>(c) * m,
                         inv.begin() + static_cast<std::size_t>(c + 1) * m,
                         inv.begin() + static_cast<std::size_t>(pivot) * m);
      }
      double* wc = &w[static_cast<std::size_t>(c) * m];
      double* ic = &inv[static_cast<std::size_t>(c) * m];
      const double scale = 1.0 / wc[c];
      for (int k = c; k < m; ++k) wc[k] *= scale;
      for (int k = 0; k < m; ++k) ic[k] *= scale;
      for (int r = 0; r < m; ++r) {
        if (r == c) continue;
        double* wr = &w[static_cast<std::size_t>(r) * m];
        const double f = wr[c];
        if (f == 0.0) continue;
        for (int k = c; k < m; ++k) wr[k] -= f * wc[k];
        double* ir = &inv[static_cast<std::size_t>(r) * m];
        for (int k = 0; k < m; ++k) {
          if (ic[k] != 0.0) ir[k] -= f * ic[k];
        }
      }
    }
    // inv is row-major B^-1; store column-major.
    binv_.assign(static_cast<std::size_t>(m) * m, 0.0);
    for (int r = 0; r < m; ++r) {
      for (int k = 0; k < m; ++k) {
        binv_[static_cast<std::size_t>(k) * m + r] =
            inv[static_cast<std::size_t>(r) * m + k];
      }
    }
    // x_B = B^-1 (b - N x_N)
    std::vector<double> rhs = rhs_;
    for (int v = 0; v < num_vars_; ++v) {
      if (position_[v] >= 0 || x_[v] == 0.0) continue;
      for (int p = col_start_[v]; p < col_start_[v + 1]; ++p) {
        rhs[row_index_[p]] -= values_[p] * x_[v];
      }
    }
    for (int r = 0; r < m; ++r) x_[basis_[r]] = 0.0;
    for (int k = 0; k < m; ++k) {
      if (rhs[k] == 0.0) continue;
      const double* col = &binv_[static_cast<std::size_t>(k) * m];
      for (int r = 0; r < m; ++r) x_[basis_[r]] += col[r] * rhs[k];
    }
    // y' = c_B' B^-1
    y_.assign(m, 0.0);
    for (int k = 0; k < m; ++k) {
      const double* col = &binv_[static_cast<std::size_t>(k) * m];
      double sum = 0.0;
      for (int r = 0; r < m; ++r) sum += cost_[basis_[r]] * col[r];
      y_[k] = sum;
    }
  }

  double ReducedCost(int v) const {
    double d = cost_[v];
    for (int p = col_start_[v]; p < col_start_[v + 1]; ++p) {
      d -= y_[row_index_[p]] * values_[p];
    }
    return d;
  }

  LpStatus Iterate() {
    int stalled = 0;
    bool bland = false;
    while (true) {
      if (iterations_ >= max_iterations_) return LpStatus::kIterationLimit;
      if (since_refactor_ >= options_.refactor_interval) Refactor();

      // Pricing.
      int entering = -1;
      int direction = 0;
      double best_score = 0.0;
      double entering_cost = 0.0;
      for (int v = 0; v < num_vars_; ++v) {
        if (position_[v] >= 0 || lo_[v] == hi_[v]) continue;
        const double d = ReducedCost(v);
        int dir = 0;
        if (d > options_.optimality_tolerance && x_[v] < hi_[v]) {
          dir = 1;
        } else if (d < -options_.optimality_tolerance && x_[v] > lo_[v]) {
          dir = -1;
        } else {
          continue;
        }
        if (bland) {
          entering = v;
          direction = dir;
          entering_cost = d;
          break;
        }
        if (std::abs(d) > best_score) {
          best_score = std::abs(d);
          entering = v;
          direction = dir;
          entering_cost = d;
        }
      }
      if (entering < 0) {
        if (since_refactor_ == 0) return LpStatus::kOptimal;
        Refactor();  // Confirm optimality on fresh factors.
        continue;
      }

      Ftran(entering);

      // Ratio test. A bound flip of the entering variable wins ties.
      double step = hi_[entering] - lo_[entering];
      int leave_row = -1;
      double leave_alpha = 0.0;
      for (int r : alpha_nonzeros_) {
        const double a = alpha_[r];
        if (std::abs(a) <= options_.pivot_tolerance) continue;
        const int b = basis_[r];
        const double delta = direction * a;  // x_b decreases by t * delta.
        double ratio = kInf;
        if (delta > 0.0) {
          if (lo_[b] != -kInf) ratio = (x_[b] - lo_[b]) / delta;
        } else {
          if (hi_[b] != kInf) ratio = (hi_[b] - x_[b]) / (-delta);
        }
        if (ratio == kInf) continue;
        ratio = std::max(ratio, 0.0);
        const bool better =
            ratio < step - 1e-12 ||
            (ratio <= step + 1e-12 && leave_row >= 0 &&
             (bland ? b < basis_[leave_row]
                    : std::abs(a) > std::abs(leave_alpha)));
        if (better) {
          step = ratio;
          leave_row = r;
          leave_alpha = a;
        }
      }
      if (step == kInf) return LpStatus::kUnbounded;
      ++iterations_;

      if (step <= 1e-12) {
        if (++stalled >= options_.stall_threshold) bland = true;
      } else {
        stalled = 0;
        bland = false;
      }

      for (int r : alpha_nonzeros_) {
        x_[basis_[r]] -= step * direction * alpha_[r];
      }
      x_[entering] += direction * step;

      if (leave_row < 0) {
        // Bound flip: no basis change.
        x_[entering] = direction > 0 ? hi_[entering] : lo_[entering];
        at_upper_[entering] = direction > 0;
        continue;
      }

      const int leaving = basis_[leave_row];
      const bool to_lower = direction * leave_alpha > 0.0;
      x_[leaving] = to_lower ? lo_[leaving] : hi_[leaving];
      at_upper_[leaving] = !to_lower;
      position_[leaving] = -1;
      if (leaving >= num_structural_ + m_) hi_[leaving] = 0.0;  // Artificial.
      basis_[leave_row] = entering;
      position_[entering] = leave_row;

      UpdateInverse(leave_row, entering_cost);
      ++since_refactor_;
    }
  }

  // alpha = B^-1 a_v, with the list of nonzero positions.
  void Ftran(int v) {
    alpha_.assign(m_, 0.0);
    for (int p = col_start_[v]; p < col_start_[v + 1]; ++p) {
      const double a = values_[p];
      const double* col = &binv_[static_cast<std::size_t>(row_index_[p]) * m_];
      for (int r = 0; r < m_; ++r) alpha_[r] += a * col[r];
    }
    alpha_nonzeros_.clear();
    for (int r = 0; r < m_; ++r) {
      if (alpha_[r] != 0.0) alpha_nonzeros_.push_back(r);
    }
  }

  // Product-form update of the explicit inverse and the duals.
  void UpdateInverse(int pivot_row, double entering_cost) {
    const double pivot = alpha_[pivot_row];
    const double dual_step = entering_cost / pivot;
    for (int k = 0; k < m_; ++k) {
      double* col = &binv_[static_cast<std::size_t>(k) * m_];
      const double t = col[pivot_row];
      if (t == 0.0) continue;
      y_[k] += dual_step * t;
      const double scaled = t / pivot;
      for (int r : alpha_nonzeros_) {
        if (r != pivot_row) col[r] -= alpha_[r] * scaled;
      }
      col[pivot_row] = scaled;
    }
  }

  LpSolution Finish(LpStatus status) {
    LpSolution solution;
    solution.status = status;
    solution.iterations = iterations_;
    if (status != LpStatus::kOptimal) return solution;

    const int n = static_cast<int>(problem_.num_vars());
    solution.primal.assign(n, 0.0);
    std::vector<bool> is_kept(n, false);
    for (int k = 0; k < num_structural_; ++k) {
      is_kept[kept_[k]] = true;
      solution.primal[kept_[k]] = std::clamp(x_[k], lo_[k], hi_[k]);
    }
    for (int j = 0; j < n; ++j) {
      if (!is_kept[j]) solution.primal[j] = fixed_value_[j];
    }
    double objective = 0.0;
    for (int j = 0; j < n; ++j) {
      objective += problem_.objective[j] * solution.primal[j];
    }
    solution.objective = objective;
    if (options_.verbose) {
      std::cerr << "lp: " << LpStatusName(status) << " objective "
                << objective << " after " << iterations_ << " iterations\n";
    }
    return solution;
  }

 private:
  const LpProblem& problem_;
  const LpOptions& options_;
  int m_ = 0;
  int num_structural_ = 0;
  int num_vars_ = 0;
  std::vector<int> kept_;
  std::vector<double> fixed_value_;
  std::vector<double> rhs_;
  std::vector<int> col_start_;
  std::vector<int> row_index_;
  std::vector<double> values_;
  std::vector<double> lo_, hi_, x_, cost_, y_;
  std::vector<bool> at_upper_;
  std::vector<int> basis_, position_;
  std::vector<double> binv_;
  std::vector<double> alpha_;
  std::vector<int> alpha_nonzeros_;
  std::int64_t iterations_ = 0;
  std::int64_t max_iterations_ = 0;
  int since_refactor_ = 0;
};

}  // namespace

const char* LpStatusName(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal:
      return "optimal";
    case LpStatus::kInfeasible:
      return "infeasible";
    case LpStatus::kUnbounded:
      return "unbounded";
    case LpStatus::kIterationLimit:
      return "iteration-limit";
    case LpStatus::kNumericalFailure:
      return "numerical-failure";
  }
  return "unknown";
}

void LpProblem::Validate() const {
  const std::size_t n = num_vars();
  const std::size_t m = num_rows();
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, "LP: " + what);
  };
  if (constraints.rows() != m) fail("constraint rows != rhs size");
  if (m > 0 && constraints.cols() != n) fail("constraint cols != objective size");
  if (senses.size() != m) fail("row senses size mismatch");
  if (lower.size() != n || upper.size() != n) fail("bound size mismatch");
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(objective[j]) || !std::isfinite(lower[j]) ||
        !std::isfinite(upper[j])) {
      fail("non-finite objective or bound at variable " + std::to_string(j));
    }
    if (lower[j] > upper[j]) {
      fail("lower > upper at variable " + std::to_string(j));
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (!std::isfinite(rhs[i])) fail("non-finite rhs");
  }
  for (double v : constraints.data()) {
    if (!std::isfinite(v)) fail("non-finite constraint coefficient");
  }
}

LpSolution SolveLp(const LpProblem& problem, std::span<const double> lower,
                   std::span<const double> upper, const LpOptions& options) {
  problem.Validate();
  if (lower.size() != problem.num_vars() ||
      upper.size() != problem.num_vars()) {
    throw Error(ErrorCode::kInvalidArgument, "LP: bound override size");
  }
  for (std::size_t j = 0; j < lower.size(); ++j) {
    if (!(lower[j] <= upper[j]) || !std::isfinite(lower[j]) ||
        !std::isfinite(upper[j])) {
      // Crossed bounds from branching simply mean an empty node.
      LpSolution empty;
      empty.status = LpStatus::kInfeasible;
      return empty;
    }
  }
  BoundedSimplex simplex(problem, lower, upper, options);
  try {
    return simplex.Run();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNumerical) throw;
    LpSolution failed;
    failed.status = LpStatus::kNumericalFailure;
    return failed;
  }
}

LpSolution SolveLp(const LpProblem& problem, const LpOptions& options) {
  return SolveLp(problem, problem.lower, problem.upper, options);
}

double MaxViolation(const LpProblem& problem, std::span<const double> x) {
  double worst = 0.0;
  for (std::size_t j = 0; j < problem.num_vars(); ++j) {
    worst = std::max({worst, problem.lower[j] - x[j], x[j] - problem.upper[j]});
  }
  for (std::size_t i = 0; i < problem.num_rows(); ++i) {
    double lhs = 0.0;
    const auto row = problem.constraints.row(i);
    for (std::size_t j = 0; j < problem.num_vars(); ++j) lhs += row[j] * x[j];
    const double diff = lhs - problem.rhs[i];
    switch (problem.senses[i]) {
      case RowSense::kLessEqual:
        worst = std::max(worst, diff);
        break;
      case RowSense::kGreaterEqual:
        worst = std::max(worst, -diff);
        break;
      case RowSense::kEqual:
        worst = std::max(worst, std::abs(diff));
        break;
    }
  }
  return worst;
}

}  // namespace doseopt
