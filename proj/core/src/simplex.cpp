#include "protophon/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace protophon::lp {

namespace {

constexpr double kPivotZero = 1e-11;  // below this a pivot is unusable
constexpr int kRefactorEvery = 64;    // eta cap between refactorizations
constexpr int kStallLimit = 400;      // iterations without progress -> Bland

// Sparse LU of the basis matrix via column-at-a-time elimination with
// partial pivoting (Gilbert-Peierls). Columns are processed in ascending
// nnz order, which lets the logical columns claim their rows first and
// keeps fill low on the mostly-triangular bases simplex produces.
struct LuFactor {
  int m = 0;
  std::vector<int> Lstart, Lindex;  // L entries indexed by original row
  std::vector<double> Lvalue;
  std::vector<int> Ustart, Uindex;  // U entries indexed by pivot step
  std::vector<double> Uvalue;
  std::vector<double> Udiag;
  std::vector<int> rowperm;  // pivot step -> original row
  std::vector<int> pinv;     // original row -> pivot step, -1 while unpivoted
  std::vector<int> cperm;    // pivot step -> basis position

  std::vector<double> work_;
  std::vector<int> touched_, stack_, frame_pos_, visit_stamp_;
  int stamp_ = 0;

  // cols[p] = sparse column at basis position p. Returns the basis
  // positions whose columns came out singular (empty on success).
  std::vector<int> factor(int nrows,
                          const std::vector<std::vector<std::pair<int, double>>>& cols) {
    m = nrows;
    Lstart.assign(1, 0);
    Lindex.clear();
    Lvalue.clear();
    Ustart.assign(1, 0);
    Uindex.clear();
    Uvalue.clear();
    Udiag.clear();
    rowperm.clear();
    pinv.assign(static_cast<std::size_t>(m), -1);
    cperm.clear();
    work_.assign(static_cast<std::size_t>(m), 0.0);
    visit_stamp_.assign(static_cast<std::size_t>(m), 0);
    stamp_ = 0;
    std::vector<int> failed;

    std::vector<int> order(cols.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return cols[static_cast<std::size_t>(a)].size() <
             cols[static_cast<std::size_t>(b)].size();
    });

    for (int p : order) {
      const auto& col = cols[static_cast<std::size_t>(p)];
      touched_.clear();
      ++stamp_;
      for (const auto& [r, v] : col) reach(r);
      for (const auto& [r, v] : col) work_[static_cast<std::size_t>(r)] += v;
      // touched_ is in post-order; reverse gives a topological order for
      // the sparse lower solve x = L^-1 col.
      for (auto it = touched_.rbegin(); it != touched_.rend(); ++it) {
        int r = *it;
        double xr = work_[static_cast<std::size_t>(r)];
        if (xr == 0.0) continue;
        int k = pinv[static_cast<std::size_t>(r)];
        if (k < 0) continue;
        for (int q = Lstart[static_cast<std::size_t>(k)];
             q < Lstart[static_cast<std::size_t>(k) + 1]; ++q)
          work_[static_cast<std::size_t>(Lindex[static_cast<std::size_t>(q)])] -=
              Lvalue[static_cast<std::size_t>(q)] * xr;
      }

      int pivot_row = -1;
      double pivot_val = 0;
      for (int r : touched_) {
        if (pinv[static_cast<std::size_t>(r)] >= 0) continue;
        if (std::abs(work_[static_cast<std::size_t>(r)]) > std::abs(pivot_val)) {
          pivot_val = work_[static_cast<std::size_t>(r)];
          pivot_row = r;
        }
      }
      if (pivot_row < 0 || std::abs(pivot_val) < kPivotZero) {
        for (int r : touched_) work_[static_cast<std::size_t>(r)] = 0;
        failed.push_back(p);
        continue;
      }

      int k = static_cast<int>(rowperm.size());
      for (int r : touched_) {
        double xr = work_[static_cast<std::size_t>(r)];
        work_[static_cast<std::size_t>(r)] = 0;
        if (xr == 0.0 || r == pivot_row) continue;
        int kr = pinv[static_cast<std::size_t>(r)];
        if (kr >= 0) {
          Uindex.push_back(kr);
          Uvalue.push_back(xr);
        } else {
          Lindex.push_back(r);
          Lvalue.push_back(xr / pivot_val);
        }
      }
      Ustart.push_back(static_cast<int>(Uindex.size()));
      Lstart.push_back(static_cast<int>(Lindex.size()));
      Udiag.push_back(pivot_val);
      rowperm.push_back(pivot_row);
      pinv[static_cast<std::size_t>(pivot_row)] = k;
      cperm.push_back(p);
    }
    return failed;
  }

  // Iterative DFS from row r over built L columns; post-order into touched_.
  void reach(int r) {
    if (visit_stamp_[static_cast<std::size_t>(r)] == stamp_) return;
    visit_stamp_[static_cast<std::size_t>(r)] = stamp_;
    stack_.assign(1, r);
    frame_pos_.assign(1, 0);
    while (!stack_.empty()) {
      int node = stack_.back();
      int k = pinv[static_cast<std::size_t>(node)];
      int beg = k >= 0 ? Lstart[static_cast<std::size_t>(k)] : 0;
      int end = k >= 0 ? Lstart[static_cast<std::size_t>(k) + 1] : 0;
      bool descended = false;
      int& pos = frame_pos_.back();
      while (beg + pos < end) {
        int child = Lindex[static_cast<std::size_t>(beg + pos)];
        ++pos;
        if (visit_stamp_[static_cast<std::size_t>(child)] != stamp_) {
          visit_stamp_[static_cast<std::size_t>(child)] = stamp_;
          stack_.push_back(child);
          frame_pos_.push_back(0);
          descended = true;
          break;
        }
      }
      if (!descended && beg + frame_pos_.back() >= end) {
        touched_.push_back(node);
        stack_.pop_back();
        frame_pos_.pop_back();
      }
    }
  }

  // Solve B0 * out = rhs; rhs indexed by original row (destroyed), out by
  // basis position.
  void ftran(std::vector<double>& rhs, std::vector<double>& out) const {
    for (std::size_t k = 0; k < rowperm.size(); ++k) {
      double t = rhs[static_cast<std::size_t>(rowperm[k])];
      if (t == 0.0) continue;
      for (int q = Lstart[k]; q < Lstart[k + 1]; ++q)
        rhs[static_cast<std::size_t>(Lindex[static_cast<std::size_t>(q)])] -=
            Lvalue[static_cast<std::size_t>(q)] * t;
    }
    for (int k = m - 1; k >= 0; --k) {
      double t = rhs[static_cast<std::size_t>(rowperm[static_cast<std::size_t>(k)])];
      double w = t == 0.0 ? 0.0 : t / Udiag[static_cast<std::size_t>(k)];
      out[static_cast<std::size_t>(cperm[static_cast<std::size_t>(k)])] = w;
      if (w == 0.0) continue;
      for (int q = Ustart[static_cast<std::size_t>(k)];
           q < Ustart[static_cast<std::size_t>(k) + 1]; ++q) {
        int j = Uindex[static_cast<std::size_t>(q)];
        rhs[static_cast<std::size_t>(rowperm[static_cast<std::size_t>(j)])] -=
            Uvalue[static_cast<std::size_t>(q)] * w;
      }
    }
  }

  // Solve B0^T * out = g; g indexed by basis position, out by original row.
  void btran(const std::vector<double>& g, std::vector<double>& out,
             std::vector<double>& w) const {
    for (std::size_t k = 0; k < rowperm.size(); ++k) {
      double t = g[static_cast<std::size_t>(cperm[k])];
      for (int q = Ustart[k]; q < Ustart[k + 1]; ++q)
        t -= Uvalue[static_cast<std::size_t>(q)] *
             w[static_cast<std::size_t>(Uindex[static_cast<std::size_t>(q)])];
      w[k] = t / Udiag[k];
    }
    for (int k = m - 1; k >= 0; --k) {
      double acc = w[static_cast<std::size_t>(k)];
      for (int q = Lstart[static_cast<std::size_t>(k)];
           q < Lstart[static_cast<std::size_t>(k) + 1]; ++q)
        acc -= Lvalue[static_cast<std::size_t>(q)] *
               out[static_cast<std::size_t>(Lindex[static_cast<std::size_t>(q)])];
      out[static_cast<std::size_t>(rowperm[static_cast<std::size_t>(k)])] = acc;
    }
  }
};

struct Eta {
  int pos;
  double diag;
  std::vector<std::pair<int, double>> entries;  // excludes pos
};

// A bound substituted for infinity so the cold start has a seat for a
// column whose cost prefers the unbounded side.
struct ArtificialBound {
  int col;
  bool upper;
};

}  // namespace

struct SimplexSolver::Impl {
  // Augmented, row-scaled problem: columns 0..n-1 structural, n..n+m-1
  // logical with coefficient -1, so Ax - y = 0 and row bounds live on y.
  int m = 0, n = 0, N = 0;
  std::vector<int> Astart, Aindex;
  std::vector<double> Avalue;
  std::vector<double> cost, lb, ub;
  std::vector<double> orig_lb, orig_ub;  // structural bounds as constructed
  std::vector<double> row_scale;
  double c0 = 0;
  LpOptions opts;
  long max_iter = 0;

  std::vector<VarStatus> status;
  std::vector<int> basic;    // position -> column
  std::vector<int> pos_of;   // column -> position, -1 when nonbasic
  std::vector<double> xval;  // column -> value
  std::vector<double> dj;    // column -> reduced cost

  LuFactor lu;
  std::vector<Eta> etas;
  double objval = 0;
  long iterations = 0;
  bool bland = false;
  int stall = 0;
  int numerical_retries = 0;
  std::vector<ArtificialBound> artificials;

  std::vector<double> work_row, work_pos, work_pos2, alpha;

  Impl(const LpProblem& p, LpOptions o) : opts(o) {
    m = p.num_rows();
    n = p.num_cols();
    N = n + m;
    row_scale.assign(static_cast<std::size_t>(m), 1.0);
    if (opts.scale_rows) {
      std::vector<double> rowmax(static_cast<std::size_t>(m), 0.0);
      for (std::size_t q = 0; q < p.A.value.size(); ++q) {
        auto r = static_cast<std::size_t>(p.A.index[q]);
        rowmax[r] = std::max(rowmax[r], std::abs(p.A.value[q]));
      }
      for (int i = 0; i < m; ++i)
        if (rowmax[static_cast<std::size_t>(i)] > 0)
          row_scale[static_cast<std::size_t>(i)] = 1.0 / rowmax[static_cast<std::size_t>(i)];
    }
    Astart.assign(p.A.col_start.begin(), p.A.col_start.end());
    Aindex.assign(p.A.index.begin(), p.A.index.end());
    Avalue.resize(p.A.value.size());
    for (std::size_t q = 0; q < p.A.value.size(); ++q)
      Avalue[q] = p.A.value[q] * row_scale[static_cast<std::size_t>(p.A.index[q])];

    cost.assign(static_cast<std::size_t>(N), 0.0);
    lb.assign(static_cast<std::size_t>(N), 0.0);
    ub.assign(static_cast<std::size_t>(N), 0.0);
    for (int j = 0; j < n; ++j) {
      cost[static_cast<std::size_t>(j)] = p.c[static_cast<std::size_t>(j)];
      lb[static_cast<std::size_t>(j)] = p.collb[static_cast<std::size_t>(j)];
      ub[static_cast<std::size_t>(j)] = p.colub[static_cast<std::size_t>(j)];
    }
    for (int i = 0; i < m; ++i) {
      double s = row_scale[static_cast<std::size_t>(i)];
      double rl = p.rowlb[static_cast<std::size_t>(i)];
      double ru = p.rowub[static_cast<std::size_t>(i)];
      lb[static_cast<std::size_t>(n + i)] = rl == -kInf ? -kInf : rl * s;
      ub[static_cast<std::size_t>(n + i)] = ru == kInf ? kInf : ru * s;
    }
    orig_lb.assign(lb.begin(), lb.begin() + n);
    orig_ub.assign(ub.begin(), ub.begin() + n);
    c0 = p.c0;
    max_iter = opts.max_iterations > 0 ? opts.max_iterations
                                       : std::max<long>(200000, 60L * (m + n));
    work_row.assign(static_cast<std::size_t>(m), 0.0);
    work_pos.assign(static_cast<std::size_t>(m), 0.0);
    work_pos2.assign(static_cast<std::size_t>(m), 0.0);
    alpha.assign(static_cast<std::size_t>(N), 0.0);
  }

  template <class Fn>
  void for_entries(int j, Fn&& fn) const {
    if (j < n) {
      for (int q = Astart[static_cast<std::size_t>(j)];
           q < Astart[static_cast<std::size_t>(j) + 1]; ++q)
        fn(Aindex[static_cast<std::size_t>(q)], Avalue[static_cast<std::size_t>(q)]);
    } else {
      fn(j - n, -1.0);
    }
  }

  double dot_row(const std::vector<double>& y, int j) const {
    if (j >= n) return -y[static_cast<std::size_t>(j - n)];
    double acc = 0;
    for (int q = Astart[static_cast<std::size_t>(j)];
         q < Astart[static_cast<std::size_t>(j) + 1]; ++q)
      acc += y[static_cast<std::size_t>(Aindex[static_cast<std::size_t>(q)])] *
             Avalue[static_cast<std::size_t>(q)];
    return acc;
  }

  bool factorize() {
    std::vector<std::vector<std::pair<int, double>>> cols(static_cast<std::size_t>(m));
    for (int p = 0; p < m; ++p) {
      auto& col = cols[static_cast<std::size_t>(p)];
      for_entries(basic[static_cast<std::size_t>(p)],
                  [&](int r, double v) { col.emplace_back(r, v); });
    }
    for (int attempt = 0; attempt < 3; ++attempt) {
      std::vector<int> failed = lu.factor(m, cols);
      if (failed.empty()) {
        etas.clear();
        return true;
      }
      // Repair: singular positions hand their seat to the logical of a row
      // the factorization could not pivot.
      std::vector<char> pivoted(static_cast<std::size_t>(m), 0);
      for (int r : lu.rowperm) pivoted[static_cast<std::size_t>(r)] = 1;
      std::size_t fi = 0;
      for (int r = 0; r < m && fi < failed.size(); ++r) {
        if (pivoted[static_cast<std::size_t>(r)]) continue;
        int logical = n + r;
        if (pos_of[static_cast<std::size_t>(logical)] >= 0) continue;
        int p = failed[fi++];
        int old = basic[static_cast<std::size_t>(p)];
        pos_of[static_cast<std::size_t>(old)] = -1;
        status[static_cast<std::size_t>(old)] = nearest_bound_status(old);
        xval[static_cast<std::size_t>(old)] = bound_value(old);
        basic[static_cast<std::size_t>(p)] = logical;
        pos_of[static_cast<std::size_t>(logical)] = p;
        status[static_cast<std::size_t>(logical)] = VarStatus::Basic;
        cols[static_cast<std::size_t>(p)].assign(1, {r, -1.0});
      }
      if (fi < failed.size()) return false;
    }
    return false;
  }

  VarStatus nearest_bound_status(int j) const {
    double l = lb[static_cast<std::size_t>(j)], u = ub[static_cast<std::size_t>(j)];
    if (l == u) return VarStatus::Fixed;
    if (l == -kInf) return VarStatus::AtUpper;
    if (u == kInf) return VarStatus::AtLower;
    double x = xval[static_cast<std::size_t>(j)];
    return (x - l <= u - x) ? VarStatus::AtLower : VarStatus::AtUpper;
  }

  double bound_value(int j) const {
    switch (status[static_cast<std::size_t>(j)]) {
      case VarStatus::AtUpper:
        return ub[static_cast<std::size_t>(j)];
      case VarStatus::Basic:
        return xval[static_cast<std::size_t>(j)];
      default:
        return lb[static_cast<std::size_t>(j)];
    }
  }

  void ftran(std::vector<double>& rhs, std::vector<double>& out) {
    lu.ftran(rhs, out);
    for (const Eta& e : etas) {
      double t = out[static_cast<std::size_t>(e.pos)] / e.diag;
      if (t != 0.0)
        for (const auto& [i, v] : e.entries) out[static_cast<std::size_t>(i)] -= v * t;
      out[static_cast<std::size_t>(e.pos)] = t;
    }
  }

  void btran(std::vector<double>& g, std::vector<double>& out) {
    for (auto it = etas.rbegin(); it != etas.rend(); ++it) {
      double acc = g[static_cast<std::size_t>(it->pos)];
      for (const auto& [i, v] : it->entries) acc -= v * g[static_cast<std::size_t>(i)];
      g[static_cast<std::size_t>(it->pos)] = acc / it->diag;
    }
    lu.btran(g, out, work_pos2);
  }

  void ftran_column(int j, std::vector<double>& out) {
    std::fill(work_row.begin(), work_row.end(), 0.0);
    std::fill(out.begin(), out.end(), 0.0);
    for_entries(j, [&](int r, double v) { work_row[static_cast<std::size_t>(r)] += v; });
    ftran(work_row, out);
  }

  void recompute_x() {
    std::fill(work_row.begin(), work_row.end(), 0.0);
    for (int j = 0; j < N; ++j) {
      if (status[static_cast<std::size_t>(j)] == VarStatus::Basic) continue;
      double xj = bound_value(j);
      xval[static_cast<std::size_t>(j)] = xj;
      if (xj == 0.0) continue;
      for_entries(j, [&](int r, double v) { work_row[static_cast<std::size_t>(r)] -= v * xj; });
    }
    std::fill(work_pos.begin(), work_pos.end(), 0.0);
    ftran(work_row, work_pos);
    for (int p = 0; p < m; ++p)
      xval[static_cast<std::size_t>(basic[static_cast<std::size_t>(p)])] =
          work_pos[static_cast<std::size_t>(p)];
    double acc = 0;
    for (int j = 0; j < N; ++j)
      acc += cost[static_cast<std::size_t>(j)] * xval[static_cast<std::size_t>(j)];
    objval = acc;
  }

  void recompute_duals() {
    std::vector<double> cb(static_cast<std::size_t>(m));
    for (int p = 0; p < m; ++p)
      cb[static_cast<std::size_t>(p)] =
          cost[static_cast<std::size_t>(basic[static_cast<std::size_t>(p)])];
    std::vector<double> y(static_cast<std::size_t>(m), 0.0);
    btran(cb, y);
    for (int j = 0; j < N; ++j)
      dj[static_cast<std::size_t>(j)] =
          status[static_cast<std::size_t>(j)] == VarStatus::Basic
              ? 0.0
              : cost[static_cast<std::size_t>(j)] - dot_row(y, j);
  }

  void refactorize_and_refresh() {
    factorize();
    recompute_x();
    recompute_duals();
  }

  int most_infeasible(double tol, double* viol_out, int* sign_out) const {
    int best = -1;
    double best_v = tol;
    int sign = 0;
    for (int p = 0; p < m; ++p) {
      int j = basic[static_cast<std::size_t>(p)];
      double x = xval[static_cast<std::size_t>(j)];
      double v1 = lb[static_cast<std::size_t>(j)] - x;
      double v2 = x - ub[static_cast<std::size_t>(j)];
      if (v1 > best_v) {
        best_v = v1;
        best = p;
        sign = +1;
        if (bland) break;
      }
      if (v2 > best_v) {
        best_v = v2;
        best = p;
        sign = -1;
        if (bland) break;
      }
    }
    if (viol_out) *viol_out = best == -1 ? 0.0 : best_v;
    if (sign_out) *sign_out = sign;
    return best;
  }

  double dual_infeasibility() const {
    double worst = 0;
    for (int j = 0; j < N; ++j) {
      switch (status[static_cast<std::size_t>(j)]) {
        case VarStatus::AtLower:
          worst = std::max(worst, -dj[static_cast<std::size_t>(j)]);
          break;
        case VarStatus::AtUpper:
          worst = std::max(worst, dj[static_cast<std::size_t>(j)]);
          break;
        default:
          break;
      }
    }
    return worst;
  }

  enum class StepResult { Done, Pivoted, Infeasible, Unbounded, Numerical };

  void apply_pivot(int r, int q, int sq, double t, const std::vector<double>& d,
                   VarStatus leave_status) {
    if (t != 0.0) {
      for (int p = 0; p < m; ++p) {
        double dp = d[static_cast<std::size_t>(p)];
        if (dp != 0.0)
          xval[static_cast<std::size_t>(basic[static_cast<std::size_t>(p)])] -= sq * t * dp;
      }
    }
    int leave = basic[static_cast<std::size_t>(r)];
    objval += dj[static_cast<std::size_t>(q)] * sq * t;

    xval[static_cast<std::size_t>(q)] = bound_value(q) + sq * t;
    status[static_cast<std::size_t>(leave)] = leave_status;
    xval[static_cast<std::size_t>(leave)] = bound_value(leave);
    pos_of[static_cast<std::size_t>(leave)] = -1;
    basic[static_cast<std::size_t>(r)] = q;
    pos_of[static_cast<std::size_t>(q)] = r;
    status[static_cast<std::size_t>(q)] = VarStatus::Basic;

    Eta e;
    e.pos = r;
    e.diag = d[static_cast<std::size_t>(r)];
    for (int p = 0; p < m; ++p) {
      double dp = d[static_cast<std::size_t>(p)];
      if (p != r && dp != 0.0) e.entries.emplace_back(p, dp);
    }
    etas.push_back(std::move(e));
    ++iterations;
  }

  StepResult dual_step() {
    double viol;
    int sigma;
    int r = most_infeasible(opts.primal_tol, &viol, &sigma);
    if (r < 0) return StepResult::Done;

    std::fill(work_pos.begin(), work_pos.end(), 0.0);
    work_pos[static_cast<std::size_t>(r)] = 1.0;
    std::vector<double> rho(static_cast<std::size_t>(m), 0.0);
    btran(work_pos, rho);

    // Ratio test pass 1 with dual tolerance slack (Harris style).
    double theta_relax = kInf;
    bool any = false;
    for (int j = 0; j < N; ++j) {
      VarStatus st = status[static_cast<std::size_t>(j)];
      if (st == VarStatus::Basic || st == VarStatus::Fixed) {
        alpha[static_cast<std::size_t>(j)] = 0;
        continue;
      }
      double a = dot_row(rho, j);
      alpha[static_cast<std::size_t>(j)] = a;
      if (std::abs(a) < 1e-9) continue;
      bool admissible = (st == VarStatus::AtLower) ? (sigma * a < 0) : (sigma * a > 0);
      if (!admissible) continue;
      any = true;
      theta_relax =
          std::min(theta_relax,
                   (std::abs(dj[static_cast<std::size_t>(j)]) + opts.dual_tol) / std::abs(a));
    }
    if (!any) return StepResult::Infeasible;

    // Pass 2: largest pivot among ratios within the relaxed bound.
    int q = -1;
    double best_alpha = 0;
    for (int j = 0; j < N; ++j) {
      VarStatus st = status[static_cast<std::size_t>(j)];
      if (st == VarStatus::Basic || st == VarStatus::Fixed) continue;
      double a = alpha[static_cast<std::size_t>(j)];
      if (std::abs(a) < 1e-9) continue;
      bool admissible = (st == VarStatus::AtLower) ? (sigma * a < 0) : (sigma * a > 0);
      if (!admissible) continue;
      if (std::abs(dj[static_cast<std::size_t>(j)]) / std::abs(a) > theta_relax) continue;
      if (bland) {
        if (q == -1 || j < q) {
          q = j;
          best_alpha = a;
        }
      } else if (std::abs(a) > std::abs(best_alpha)) {
        q = j;
        best_alpha = a;
      }
    }
    if (q < 0) return StepResult::Infeasible;

    std::vector<double> d(static_cast<std::size_t>(m), 0.0);
    ftran_column(q, d);
    double dr = d[static_cast<std::size_t>(r)];
    // Row/column agreement doubles as the factorization health check.
    if (std::abs(dr - best_alpha) > 1e-7 * (1.0 + std::abs(best_alpha)) ||
        std::abs(dr) < kPivotZero) {
      if (++numerical_retries > 5) return StepResult::Numerical;
      refactorize_and_refresh();
      return StepResult::Pivoted;
    }
    numerical_retries = 0;

    int jl = basic[static_cast<std::size_t>(r)];
    double target =
        sigma > 0 ? lb[static_cast<std::size_t>(jl)] : ub[static_cast<std::size_t>(jl)];
    int sq = status[static_cast<std::size_t>(q)] == VarStatus::AtLower ? +1 : -1;
    double t = (xval[static_cast<std::size_t>(jl)] - target) / (sq * dr);
    if (t < 0) t = 0;

    double theta_dual = dj[static_cast<std::size_t>(q)] / dr;
    VarStatus leave_status =
        lb[static_cast<std::size_t>(jl)] == ub[static_cast<std::size_t>(jl)]
            ? VarStatus::Fixed
            : (sigma > 0 ? VarStatus::AtLower : VarStatus::AtUpper);
    apply_pivot(r, q, sq, t, d, leave_status);

    for (int k = 0; k < N; ++k) {
      if (status[static_cast<std::size_t>(k)] == VarStatus::Basic) {
        dj[static_cast<std::size_t>(k)] = 0;
      } else if (k == jl) {
        dj[static_cast<std::size_t>(k)] = -theta_dual;
      } else {
        double a = alpha[static_cast<std::size_t>(k)];
        if (a != 0.0) dj[static_cast<std::size_t>(k)] -= theta_dual * a;
      }
    }
    return StepResult::Pivoted;
  }

  StepResult primal_step() {
    int q = -1;
    double best_score = opts.dual_tol;
    for (int j = 0; j < N; ++j) {
      double score;
      switch (status[static_cast<std::size_t>(j)]) {
        case VarStatus::AtLower:
          score = -dj[static_cast<std::size_t>(j)];
          break;
        case VarStatus::AtUpper:
          score = dj[static_cast<std::size_t>(j)];
          break;
        default:
          continue;
      }
      if (score > best_score) {
        best_score = score;
        q = j;
        if (bland) break;
      }
    }
    if (q < 0) return StepResult::Done;

    int sq = status[static_cast<std::size_t>(q)] == VarStatus::AtLower ? +1 : -1;
    std::vector<double> d(static_cast<std::size_t>(m), 0.0);
    ftran_column(q, d);

    double ptol = opts.primal_tol;
    double span_q = ub[static_cast<std::size_t>(q)] - lb[static_cast<std::size_t>(q)];
    double theta_relax = span_q;
    for (int p = 0; p < m; ++p) {
      double dp = sq * d[static_cast<std::size_t>(p)];
      if (std::abs(dp) < kPivotZero) continue;
      int j = basic[static_cast<std::size_t>(p)];
      double x = xval[static_cast<std::size_t>(j)];
      double limit;
      if (dp > 0) {
        double l = lb[static_cast<std::size_t>(j)];
        if (l == -kInf) continue;
        limit = (x - (l - ptol)) / dp;
      } else {
        double u = ub[static_cast<std::size_t>(j)];
        if (u == kInf) continue;
        limit = (x - (u + ptol)) / dp;
      }
      theta_relax = std::min(theta_relax, limit);
    }
    if (theta_relax == kInf) return StepResult::Unbounded;

    int r = -1;
    double best_piv = 0;
    double theta = theta_relax;
    if (theta_relax < span_q) {
      // Pass 2: blocking basic with the largest pivot within the relaxed step.
      for (int p = 0; p < m; ++p) {
        double dp = sq * d[static_cast<std::size_t>(p)];
        if (std::abs(dp) < kPivotZero) continue;
        int j = basic[static_cast<std::size_t>(p)];
        double x = xval[static_cast<std::size_t>(j)];
        double limit;
        if (dp > 0) {
          double l = lb[static_cast<std::size_t>(j)];
          if (l == -kInf) continue;
          limit = (x - l) / dp;
        } else {
          double u = ub[static_cast<std::size_t>(j)];
          if (u == kInf) continue;
          limit = (x - u) / dp;
        }
        if (limit > theta_relax + 1e-15) continue;
        if (bland) {
          if (r == -1 || j < basic[static_cast<std::size_t>(r)]) {
            r = p;
            best_piv = dp;
            theta = limit;
          }
        } else if (std::abs(dp) > std::abs(best_piv)) {
          r = p;
          best_piv = dp;
          theta = limit;
        }
      }
    }

    if (r == -1) {
      // No blocking basic inside the span: flip across the bound.
      if (span_q == kInf) return StepResult::Unbounded;
      double t = span_q;
      for (int p = 0; p < m; ++p) {
        double dp = d[static_cast<std::size_t>(p)];
        if (dp != 0.0)
          xval[static_cast<std::size_t>(basic[static_cast<std::size_t>(p)])] -= sq * t * dp;
      }
      objval += dj[static_cast<std::size_t>(q)] * sq * t;
      status[static_cast<std::size_t>(q)] = sq > 0 ? VarStatus::AtUpper : VarStatus::AtLower;
      xval[static_cast<std::size_t>(q)] = bound_value(q);
      ++iterations;
      return StepResult::Pivoted;
    }

    if (theta < 0) theta = 0;
    int jl = basic[static_cast<std::size_t>(r)];
    VarStatus leave_status =
        lb[static_cast<std::size_t>(jl)] == ub[static_cast<std::size_t>(jl)]
            ? VarStatus::Fixed
            : (sq * best_piv > 0 ? VarStatus::AtLower : VarStatus::AtUpper);
    apply_pivot(r, q, sq, theta, d, leave_status);
    recompute_duals();
    return StepResult::Pivoted;
  }

  void cold_statuses() {
    status.assign(static_cast<std::size_t>(N), VarStatus::AtLower);
    for (int j = 0; j < n; ++j) {
      double l = lb[static_cast<std::size_t>(j)], u = ub[static_cast<std::size_t>(j)];
      if (l == u) {
        status[static_cast<std::size_t>(j)] = VarStatus::Fixed;
        continue;
      }
      bool prefer_lower = cost[static_cast<std::size_t>(j)] >= 0;
      if (prefer_lower && l == -kInf) {
        lb[static_cast<std::size_t>(j)] = -opts.artificial_bound;
        artificials.push_back({j, false});
      } else if (!prefer_lower && u == kInf) {
        ub[static_cast<std::size_t>(j)] = opts.artificial_bound;
        artificials.push_back({j, true});
      }
      status[static_cast<std::size_t>(j)] =
          prefer_lower ? VarStatus::AtLower : VarStatus::AtUpper;
    }
    basic.assign(static_cast<std::size_t>(m), 0);
    pos_of.assign(static_cast<std::size_t>(N), -1);
    for (int i = 0; i < m; ++i) {
      basic[static_cast<std::size_t>(i)] = n + i;
      pos_of[static_cast<std::size_t>(n + i)] = i;
      status[static_cast<std::size_t>(n + i)] = VarStatus::Basic;
    }
  }

  bool adopt_basis(const Basis& b) {
    if (static_cast<int>(b.status.size()) != N) return false;
    int count = 0;
    for (VarStatus s : b.status)
      if (s == VarStatus::Basic) ++count;
    if (count != m) return false;
    status = b.status;
    basic.assign(static_cast<std::size_t>(m), 0);
    pos_of.assign(static_cast<std::size_t>(N), -1);
    int p = 0;
    for (int j = 0; j < N; ++j) {
      if (status[static_cast<std::size_t>(j)] == VarStatus::Basic) {
        basic[static_cast<std::size_t>(p)] = j;
        pos_of[static_cast<std::size_t>(j)] = p;
        ++p;
      }
    }
    return true;
  }

  void normalize_statuses() {
    for (int j = 0; j < N; ++j) {
      VarStatus& s = status[static_cast<std::size_t>(j)];
      if (s == VarStatus::Basic) continue;
      double l = lb[static_cast<std::size_t>(j)], u = ub[static_cast<std::size_t>(j)];
      if (l == u) {
        s = VarStatus::Fixed;
      } else if (s == VarStatus::Fixed) {
        s = l == -kInf ? VarStatus::AtUpper : VarStatus::AtLower;
      } else if (s == VarStatus::AtLower && l == -kInf) {
        s = VarStatus::AtUpper;
      } else if (s == VarStatus::AtUpper && u == kInf) {
        s = VarStatus::AtLower;
      }
    }
  }

  LpResult finish(LpStatus st) {
    if (st == LpStatus::Optimal && !artificials.empty()) {
      // An optimum resting on a substituted bound means the true problem
      // is unbounded in that direction.
      for (const ArtificialBound& a : artificials) {
        double x = xval[static_cast<std::size_t>(a.col)];
        double b = a.upper ? ub[static_cast<std::size_t>(a.col)]
                           : lb[static_cast<std::size_t>(a.col)];
        if (std::abs(x - b) <= 1e-6 * (1.0 + std::abs(b))) {
          st = LpStatus::Unbounded;
          break;
        }
      }
    }
    for (const ArtificialBound& a : artificials) {
      if (a.upper)
        ub[static_cast<std::size_t>(a.col)] = kInf;
      else
        lb[static_cast<std::size_t>(a.col)] = -kInf;
    }
    artificials.clear();

    LpResult res;
    res.status = st;
    res.iterations = iterations;
    res.basis.status = status;
    res.x.assign(xval.begin(), xval.begin() + n);
    res.row_activity.assign(static_cast<std::size_t>(m), 0.0);
    for (int i = 0; i < m; ++i)
      res.row_activity[static_cast<std::size_t>(i)] =
          xval[static_cast<std::size_t>(n + i)] / row_scale[static_cast<std::size_t>(i)];
    double acc = c0;
    for (int j = 0; j < n; ++j)
      acc += cost[static_cast<std::size_t>(j)] * xval[static_cast<std::size_t>(j)];
    res.objective = acc;
    return res;
  }

  LpResult run(const Basis* warm) {
    iterations = 0;
    bland = false;
    stall = 0;
    numerical_retries = 0;
    artificials.clear();
    xval.assign(static_cast<std::size_t>(N), 0.0);
    dj.assign(static_cast<std::size_t>(N), 0.0);

    if (warm == nullptr || !adopt_basis(*warm)) cold_statuses();
    normalize_statuses();
    if (!factorize()) return finish(LpStatus::Numerical);
    recompute_x();
    recompute_duals();

    double last_metric = kInf;
    int last_phase = -1;
    long guard = 0;

    while (true) {
      if (iterations >= max_iter) return finish(LpStatus::IterationLimit);
      if (++guard > 2 * max_iter + 1000) return finish(LpStatus::Numerical);
      if (static_cast<int>(etas.size()) >= kRefactorEvery) refactorize_and_refresh();

      double pinf;
      most_infeasible(opts.primal_tol, &pinf, nullptr);
      double dinf = dual_infeasibility();

      if (pinf <= opts.primal_tol && dinf <= opts.dual_tol) {
        // Wash out eta drift before accepting the claim.
        refactorize_and_refresh();
        most_infeasible(opts.primal_tol, &pinf, nullptr);
        dinf = dual_infeasibility();
        if (pinf <= opts.primal_tol && dinf <= opts.dual_tol)
          return finish(LpStatus::Optimal);
        continue;
      }

      // Stall tracking; the monotone quantity differs per phase.
      int phase = dinf <= opts.dual_tol ? 0 : 1;
      double metric = phase == 0 ? -objval : objval;
      if (phase != last_phase) {
        last_phase = phase;
        last_metric = metric;
        stall = 0;
      } else if (metric < last_metric - 1e-13) {
        last_metric = metric;
        stall = 0;
        bland = false;
      } else if (++stall > kStallLimit) {
        bland = true;
      }

      StepResult sr;
      if (phase == 0) {
        sr = dual_step();
      } else if (pinf <= opts.primal_tol) {
        sr = primal_step();
      } else {
        // Neither side feasible (foreign warm basis): flip nonbasics to
        // their sign-correct bound and re-enter on the dual path.
        bool changed = false;
        for (int j = 0; j < N; ++j) {
          VarStatus& s = status[static_cast<std::size_t>(j)];
          if (s == VarStatus::Basic || s == VarStatus::Fixed) continue;
          if (s == VarStatus::AtLower && dj[static_cast<std::size_t>(j)] < -opts.dual_tol) {
            if (ub[static_cast<std::size_t>(j)] == kInf) {
              ub[static_cast<std::size_t>(j)] = opts.artificial_bound;
              artificials.push_back({j, true});
            }
            s = VarStatus::AtUpper;
            changed = true;
          } else if (s == VarStatus::AtUpper &&
                     dj[static_cast<std::size_t>(j)] > opts.dual_tol) {
            if (lb[static_cast<std::size_t>(j)] == -kInf) {
              lb[static_cast<std::size_t>(j)] = -opts.artificial_bound;
              artificials.push_back({j, false});
            }
            s = VarStatus::AtLower;
            changed = true;
          }
        }
        if (!changed) return finish(LpStatus::Numerical);
        recompute_x();
        continue;
      }

      switch (sr) {
        case StepResult::Done:
        case StepResult::Pivoted:
          break;
        case StepResult::Infeasible:
          return finish(LpStatus::Infeasible);
        case StepResult::Unbounded:
          return finish(LpStatus::Unbounded);
        case StepResult::Numerical:
          return finish(LpStatus::Numerical);
      }
    }
  }
};

SimplexSolver::SimplexSolver(const LpProblem& p, LpOptions opts) {
  if (p.c.size() != static_cast<std::size_t>(p.num_cols()) ||
      p.collb.size() != static_cast<std::size_t>(p.num_cols()) ||
      p.colub.size() != static_cast<std::size_t>(p.num_cols()) ||
      p.rowlb.size() != static_cast<std::size_t>(p.num_rows()) ||
      p.rowub.size() != static_cast<std::size_t>(p.num_rows()) ||
      p.A.col_start.size() != static_cast<std::size_t>(p.num_cols()) + 1)
    throw Error("simplex: inconsistent problem dimensions");
  for (int j = 0; j < p.num_cols(); ++j) {
    if (p.collb[static_cast<std::size_t>(j)] > p.colub[static_cast<std::size_t>(j)])
      throw Error("simplex: column with crossed bounds");
    if (p.collb[static_cast<std::size_t>(j)] == -kInf &&
        p.colub[static_cast<std::size_t>(j)] == kInf)
      throw Error("simplex: free columns are not supported");
  }
  impl_ = new Impl(p, opts);
}

SimplexSolver::~SimplexSolver() { delete impl_; }

void SimplexSolver::set_col_bounds(int col, double lo, double hi) {
  impl_->lb[static_cast<std::size_t>(col)] = lo;
  impl_->ub[static_cast<std::size_t>(col)] = hi;
}

void SimplexSolver::reset_col_bounds() {
  std::copy(impl_->orig_lb.begin(), impl_->orig_lb.end(), impl_->lb.begin());
  std::copy(impl_->orig_ub.begin(), impl_->orig_ub.end(), impl_->ub.begin());
}

double SimplexSolver::col_lower(int col) const {
  return impl_->lb[static_cast<std::size_t>(col)];
}
double SimplexSolver::col_upper(int col) const {
  return impl_->ub[static_cast<std::size_t>(col)];
}

LpResult SimplexSolver::solve(const Basis* warm) {
  LpResult r = impl_->run(warm);
  total_iterations_ += r.iterations;
  return r;
}

}  // namespace protophon::lp
