#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "protophon/milp.hpp"

namespace protophon {

enum class SolveStatus {
  Optimal,     // proven: gap <= mip_gap held with the tree exhausted or closed
  GapReached,  // incumbent within mip_gap of the global bound, tree not exhausted
  TimeLimit,   // wall clock expired; best incumbent (if any) returned
  Infeasible,  // search completed without finding any feasible point
};

struct SolveOptions {
  double mip_gap = 1e-4;        // relative gap at which search may stop
  double time_limit =           // wall-clock budget in seconds
      std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;       // reserved for randomized tie-breaks; the
                                // default rules are deterministic and ignore it
  double feasibility_tol = 1e-6;
  int workers = 1;              // concurrent node evaluations; 1 = deterministic
  long max_variables = 2000000; // ModelTooLarge above this

  // Optional feasible assignment used to seed the incumbent. Must satisfy
  // every row and bound within feasibility_tol and have integral binaries;
  // a violating start is a caller bug and throws.
  const std::vector<double>* start = nullptr;
};

struct Solution {
  SolveStatus status = SolveStatus::Infeasible;
  double objective = std::numeric_limits<double>::infinity();
  std::vector<double> x;  // incumbent assignment; empty when none was found
  double bound = -std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  long nodes = 0;           // LP relaxations solved
  long lp_iterations = 0;   // simplex pivots across all nodes
};

// Branch-and-bound over the model's binary columns. Best-bound node order,
// most-fractional branching with ties to the lowest column index, children
// warm-started from the parent basis. Generic: reads only m.problem and
// m.binary_cols, never the reconstruction blocks.
Solution solve(const MilpModel& m, const SolveOptions& o = {});

// Exhaustive reference solver: tries every assignment of inventory phonemes
// to entries and scores it with the exact metric objective. Ties broken by
// the lexicographically smallest assignment in inventory (symbol) order.
// Throws TooLarge when |inv|^|entries| exceeds 1e7.
Solution brute_force_solve(const ReconstructionProblem& p,
                           const PhonemeInventory& inv);

}  // namespace protophon
