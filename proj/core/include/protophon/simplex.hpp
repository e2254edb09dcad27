#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "protophon/errors.hpp"

namespace protophon::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Column-compressed sparse matrix.
struct SparseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> col_start;  // size cols + 1
  std::vector<int> index;      // row ids
  std::vector<double> value;

  void clear_to(int nrows) {
    rows = nrows;
    cols = 0;
    col_start.assign(1, 0);
    index.clear();
    value.clear();
  }
  void add_column(const std::vector<std::pair<int, double>>& entries) {
    for (const auto& [r, v] : entries) {
      index.push_back(r);
      value.push_back(v);
    }
    col_start.push_back(static_cast<int>(index.size()));
    ++cols;
  }
};

// min c'x + c0  s.t.  rowlb <= Ax <= rowub,  collb <= x <= colub.
struct LpProblem {
  SparseMatrix A;
  std::vector<double> c;
  std::vector<double> collb, colub;
  std::vector<double> rowlb, rowub;
  double c0 = 0;

  int num_cols() const { return A.cols; }
  int num_rows() const { return A.rows; }
};

enum class VarStatus : std::uint8_t { Basic, AtLower, AtUpper, Fixed };

// Status of structural columns then logical (row) columns.
struct Basis {
  std::vector<VarStatus> status;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit, Numerical };

struct LpOptions {
  double primal_tol = 1e-9;
  double dual_tol = 1e-9;
  // Rows are normalized to max |coefficient| = 1 before iterating.
  bool scale_rows = true;
  long max_iterations = -1;  // -1: derived from problem size
  // Substitute for a missing bound when the cold-start side is infinite.
  double artificial_bound = 1e7;
};

struct LpResult {
  LpStatus status = LpStatus::Numerical;
  double objective = 0;
  std::vector<double> x;             // structural values
  std::vector<double> row_activity;  // Ax
  Basis basis;
  long iterations = 0;
};

// Bounded-variable simplex over one basis/factorization core. Cold solves
// start from the all-logical basis with structurals on their cost-preferred
// bound; that start is dual feasible for boxed problems, so the first solve
// runs dual simplex, and re-solves after bound changes (branch-and-bound
// children) warm start the same way from the parent basis. The primal
// iteration (Dantzig pricing, Bland fallback on stalls) runs whenever the
// current basis is already primal feasible.
class SimplexSolver {
 public:
  SimplexSolver(const LpProblem& p, LpOptions opts = {});
  ~SimplexSolver();
  SimplexSolver(const SimplexSolver&) = delete;
  SimplexSolver& operator=(const SimplexSolver&) = delete;

  // Structural column bound override; takes effect on the next solve.
  void set_col_bounds(int col, double lo, double hi);
  void reset_col_bounds();  // back to the problem's bounds
  double col_lower(int col) const;
  double col_upper(int col) const;

  LpResult solve(const Basis* warm = nullptr);

  long total_iterations() const { return total_iterations_; }

 private:
  struct Impl;
  Impl* impl_;
  long total_iterations_ = 0;
};

}  // namespace protophon::lp
