#include "protophon/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <queue>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <vector>

#include "protophon/errors.hpp"
#include "protophon/metric.hpp"
#include "protophon/simplex.hpp"

namespace protophon {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Strict improvement margin for incumbent updates and node pruning.
constexpr double kImprove = 1e-9;

struct Node {
  long id = 0;
  // Parent LP optimum: a valid lower bound for the whole subtree. The root
  // carries -inf until its relaxation is solved.
  double bound = -kInf;
  std::shared_ptr<const lp::Basis> basis;          // parent's final basis
  std::vector<std::pair<int, double>> fixings;     // (binary column, 0 or 1)
};

using NodePtr = std::shared_ptr<Node>;

// Min-heap on (bound, id): best bound first, FIFO among equal bounds.
struct NodeOrder {
  bool operator()(const NodePtr& a, const NodePtr& b) const {
    if (a->bound != b->bound) return a->bound > b->bound;
    return a->id > b->id;
  }
};

enum class StopCause { None, Gap, Time };

struct Search {
  const lp::LpProblem* prob = nullptr;
  const std::vector<int>* bins = nullptr;
  SolveOptions opts;
  std::chrono::steady_clock::time_point t0;

  std::mutex mu;
  std::condition_variable cv;
  std::priority_queue<NodePtr, std::vector<NodePtr>, NodeOrder> open;
  // Bounds of nodes currently being evaluated; keeps the global bound honest
  // while a low node is in flight.
  std::multiset<double> active;
  long next_id = 1;

  bool have_inc = false;
  double inc_obj = kInf;
  std::vector<double> inc_x;

  long nodes = 0;
  long lp_iterations = 0;
  StopCause stop = StopCause::None;
  std::exception_ptr err;

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }

  // Lowest bound over open and in-flight nodes; inc_obj once both drain.
  double global_bound_locked() const {
    double gb = kInf;
    if (!open.empty()) gb = open.top()->bound;
    if (!active.empty()) gb = std::min(gb, *active.begin());
    if (gb == kInf) gb = have_inc ? inc_obj : -kInf;
    return gb;
  }
};

double relative_gap(double objective, double bound) {
  double g = (objective - bound) / std::max(std::fabs(objective), 1e-10);
  return g < 0 ? 0 : g;
}

// One branch-and-bound worker. All queue and incumbent state is touched under
// the lock; the LP solve itself runs unlocked.
void worker_loop(Search& s) {
  lp::SimplexSolver lps(*s.prob);
  std::unique_lock<std::mutex> lk(s.mu);
  for (;;) {
    if (s.stop != StopCause::None || s.err) break;
    if (s.open.empty()) {
      if (s.active.empty()) break;  // tree exhausted
      s.cv.wait(lk);
      continue;
    }
    if (s.elapsed() > s.opts.time_limit) {
      s.stop = StopCause::Time;
      s.cv.notify_all();
      break;
    }
    NodePtr node = s.open.top();
    s.open.pop();
    if (s.have_inc && node->bound >= s.inc_obj - kImprove) continue;
    auto active_it = s.active.insert(node->bound);
    lk.unlock();

    lp::LpResult res;
    std::exception_ptr fail;
    try {
      lps.reset_col_bounds();
      for (const auto& [col, v] : node->fixings) lps.set_col_bounds(col, v, v);
      res = lps.solve(node->basis.get());
      if (res.status != lp::LpStatus::Optimal &&
          res.status != lp::LpStatus::Infeasible) {
        // Warm start led the simplex astray; one cold attempt before giving up.
        res = lps.solve(nullptr);
      }
    } catch (...) {
      fail = std::current_exception();
    }

    lk.lock();
    s.active.erase(active_it);
    if (fail) {
      s.err = fail;
      s.cv.notify_all();
      break;
    }
    ++s.nodes;
    s.lp_iterations += res.iterations;

    if (res.status == lp::LpStatus::Optimal) {
      // A child relaxation can never beat its parent; clamp out rounding dips
      // so the global bound stays monotone.
      double bound = std::max(res.objective, node->bound);
      bool closed = s.have_inc && bound >= s.inc_obj - kImprove;
      if (!closed) {
        int branch_col = -1;
        double most = s.opts.feasibility_tol;
        for (int col : *s.bins) {
          double v = res.x[static_cast<std::size_t>(col)];
          double dist = std::fabs(v - std::round(v));
          if (dist > most) {
            most = dist;
            branch_col = col;
          }
        }
        if (branch_col < 0) {
          if (!s.have_inc || res.objective < s.inc_obj - kImprove) {
            s.have_inc = true;
            s.inc_obj = res.objective;
            s.inc_x = res.x;
          }
        } else {
          auto basis = std::make_shared<lp::Basis>(res.basis);
          for (double v : {0.0, 1.0}) {
            auto child = std::make_shared<Node>();
            child->id = s.next_id++;
            child->bound = bound;
            child->basis = basis;
            child->fixings = node->fixings;
            child->fixings.emplace_back(branch_col, v);
            s.open.push(std::move(child));
          }
        }
      }
    } else if (res.status != lp::LpStatus::Infeasible) {
      s.err = std::make_exception_ptr(
          Error("node relaxation did not converge (status " +
                std::to_string(static_cast<int>(res.status)) + ")"));
      s.cv.notify_all();
      break;
    }

    if (s.have_inc && !(s.open.empty() && s.active.empty())) {
      double gb = s.global_bound_locked();
      if (relative_gap(s.inc_obj, gb) <= s.opts.mip_gap)
        s.stop = StopCause::Gap;
    }
    s.cv.notify_all();
  }
  s.cv.notify_all();
}

void check_start(const lp::LpProblem& p, const std::vector<int>& bins,
                 const std::vector<double>& x, double tol) {
  if (static_cast<int>(x.size()) != p.num_cols())
    throw Error("start assignment has wrong length");
  for (std::size_t j = 0; j < x.size(); ++j)
    if (x[j] < p.collb[j] - tol || x[j] > p.colub[j] + tol)
      throw Error("start assignment violates a column bound");
  for (int col : bins) {
    double v = x[static_cast<std::size_t>(col)];
    if (std::fabs(v - std::round(v)) > tol)
      throw Error("start assignment has a fractional binary");
  }
  std::vector<double> act(static_cast<std::size_t>(p.num_rows()), 0.0);
  for (std::size_t j = 0; j < x.size(); ++j)
    for (int k = p.A.col_start[j]; k < p.A.col_start[j + 1]; ++k)
      act[static_cast<std::size_t>(p.A.index[static_cast<std::size_t>(k)])] +=
          p.A.value[static_cast<std::size_t>(k)] * x[j];
  for (std::size_t i = 0; i < act.size(); ++i)
    if (act[i] < p.rowlb[i] - tol || act[i] > p.rowub[i] + tol)
      throw Error("start assignment violates a row");
}

}  // namespace

Solution solve(const MilpModel& m, const SolveOptions& o) {
  if (!(o.mip_gap >= 0)) throw Error("mip_gap must be >= 0");
  if (!(o.time_limit > 0)) throw Error("time_limit must be > 0");
  if (!(o.feasibility_tol > 0)) throw Error("feasibility_tol must be > 0");
  if (o.max_variables <= 0) throw Error("max_variables must be positive");
  const lp::LpProblem& prob = m.problem;
  if (static_cast<long>(prob.num_cols()) > o.max_variables) {
    std::ostringstream msg;
    msg << "model has " << prob.num_cols() << " variables, cap is "
        << o.max_variables;
    throw ModelTooLarge(msg.str());
  }
  std::vector<int> bins = m.binary_cols;
  std::sort(bins.begin(), bins.end());
  bins.erase(std::unique(bins.begin(), bins.end()), bins.end());
  for (int col : bins)
    if (col < 0 || col >= prob.num_cols())
      throw Error("binary column index out of range");

  Search s;
  s.prob = &prob;
  s.bins = &bins;
  s.opts = o;
  s.t0 = std::chrono::steady_clock::now();

  if (o.start) {
    check_start(prob, m.binary_cols, *o.start, o.feasibility_tol);
    s.have_inc = true;
    s.inc_x = *o.start;
    s.inc_obj = prob.c0;
    for (std::size_t j = 0; j < s.inc_x.size(); ++j)
      s.inc_obj += prob.c[j] * s.inc_x[j];
  }

  {
    auto root = std::make_shared<Node>();
    root->id = 0;
    s.open.push(std::move(root));
  }

  int workers = std::max(1, o.workers);
  if (workers == 1) {
    worker_loop(s);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&s] { worker_loop(s); });
    for (std::thread& t : pool) t.join();
  }
  if (s.err) std::rethrow_exception(s.err);

  Solution sol;
  sol.nodes = s.nodes;
  sol.lp_iterations = s.lp_iterations;
  double gb = s.global_bound_locked();
  if (!s.have_inc) {
    if (s.stop == StopCause::Time) {
      sol.status = SolveStatus::TimeLimit;
      sol.bound = gb;
    } else {
      // Exhausted without a feasible point: the minimum over an empty set.
      sol.status = SolveStatus::Infeasible;
      sol.bound = kInf;
    }
    return sol;
  }
  sol.objective = s.inc_obj;
  sol.x = std::move(s.inc_x);
  bool closed = (s.open.empty() && s.active.empty()) ||
                gb >= s.inc_obj - kImprove;
  if (closed) {
    // Every remaining node is within the improvement tolerance of the
    // incumbent, so the incumbent is the optimum; the bound snaps to it.
    sol.status = SolveStatus::Optimal;
    sol.bound = s.inc_obj;
    sol.gap = 0;
  } else {
    sol.status = s.stop == StopCause::Time ? SolveStatus::TimeLimit
                                           : SolveStatus::GapReached;
    sol.bound = std::min(gb, s.inc_obj);
    sol.gap = relative_gap(sol.objective, sol.bound);
  }
  return sol;
}

Solution brute_force_solve(const ReconstructionProblem& p,
                           const PhonemeInventory& inv) {
  p.validate();
  if (inv.size() == 0)
    throw InventoryTooSmall("brute force needs a non-empty inventory");
  std::size_t num_entries = p.entries.size();
  std::size_t k = inv.size();
  if (std::pow(static_cast<double>(k), static_cast<double>(num_entries)) >
      1e7) {
    std::ostringstream msg;
    msg << "brute force would enumerate " << k << "^" << num_entries
        << " assignments";
    throw TooLarge(msg.str());
  }

  // Exact objective decomposes per entry plus per pair, so score tables make
  // each assignment O(entries + pairs).
  double wv = 1.0 - p.lambda_fq;
  std::vector<std::vector<double>> entry_cost(num_entries,
                                              std::vector<double>(k, 0.0));
  for (std::size_t e = 0; e < num_entries; ++e)
    for (const auto& [v, reading] : p.entries[e].readings) {
      (void)v;
      for (std::size_t i = 0; i < k; ++i)
        entry_cost[e][i] += wv * distance(inv.entries[i].vector, reading);
    }

  std::unordered_map<std::string, int> id_of;
  for (std::size_t e = 0; e < num_entries; ++e)
    id_of[p.entries[e].id] = static_cast<int>(e);
  struct PairCost {
    std::size_t a, b;
    double weight;
  };
  std::vector<PairCost> pair_costs;
  std::vector<double> phoneme_dist;  // k*k, only when pairs are present
  if (!p.pairs.empty()) {
    phoneme_dist.assign(k * k, 0.0);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j) {
        double d = distance(inv.entries[i].vector, inv.entries[j].vector);
        phoneme_dist[i * k + j] = d;
        phoneme_dist[j * k + i] = d;
      }
    for (const FanqiePair& fp : p.pairs)
      pair_costs.push_back({static_cast<std::size_t>(id_of.at(fp.x)),
                            static_cast<std::size_t>(id_of.at(fp.xu)),
                            p.lambda_fq * (fp.medial_match ? p.k_medial : 1.0)});
  }

  // Odometer with entry 0 most significant: visiting order is lexicographic
  // over assignments in inventory (symbol) order, and strict improvement
  // keeps the first minimizer, so ties resolve to the smallest assignment.
  std::vector<std::size_t> idx(num_entries, 0);
  std::vector<std::size_t> best_idx;
  double best = kInf;
  for (;;) {
    double obj = 0;
    for (std::size_t e = 0; e < num_entries; ++e) obj += entry_cost[e][idx[e]];
    for (const PairCost& pc : pair_costs)
      obj += pc.weight * phoneme_dist[idx[pc.a] * k + idx[pc.b]];
    if (obj < best) {
      best = obj;
      best_idx = idx;
    }
    std::size_t e = num_entries;
    while (e > 0) {
      --e;
      if (++idx[e] < k) break;
      idx[e] = 0;
      if (e == 0) {
        e = num_entries;  // wrapped all the way around
        break;
      }
    }
    if (e == num_entries) break;
  }

  std::vector<FeatureVector> proto(num_entries);
  for (std::size_t e = 0; e < num_entries; ++e)
    proto[e] = inv.entries[best_idx[e]].vector;

  Solution sol;
  sol.status = SolveStatus::Optimal;
  sol.objective = best;
  sol.bound = best;
  sol.gap = 0;
  MilpModel mm = build_model(p);
  sol.x = lift_assignment(mm, proto);
  return sol;
}

}  // namespace protophon
