#pragma once

// Pipeline helpers shared by the scoring and clustering suites: turn a
// generated dataset into a solved reconstruction keyed by entry id.

#include <string>
#include <vector>

#include "doctest.h"
#include "protophon/eval.hpp"
#include "protophon/milp.hpp"
#include "protophon/phonology.hpp"
#include "protophon/solver.hpp"
#include "protophon/synth.hpp"

namespace testutil {

inline protophon::Reconstruction truth_of(const protophon::SyntheticDataset& ds) {
  const protophon::PhonemeInventory& chart = protophon::full_inventory();
  protophon::Reconstruction t;
  for (const auto& [cid, init] : ds.system.characters) t[cid] = chart.at(init);
  return t;
}

inline protophon::Reconstruction solve_dataset(const protophon::SyntheticDataset& ds,
                                               double time_limit) {
  using namespace protophon;
  ReconstructionProblem prob = problem_from_dataset(ds);
  MilpModel mm = build_model(prob);
  // The IPA vote is always a feasible assignment, so it seeds the incumbent.
  Reconstruction vote = majority_vote_ipa(ds.varieties);
  std::vector<FeatureVector> start;
  for (const ReconstructionEntry& e : prob.entries) start.push_back(vote.at(e.id));
  std::vector<double> lifted = lift_assignment(mm, start);
  SolveOptions opts;
  opts.start = &lifted;
  opts.time_limit = time_limit;
  Solution sol = solve(mm, opts);
  REQUIRE(sol.status != SolveStatus::TimeLimit);
  REQUIRE(sol.status != SolveStatus::Infeasible);
  std::vector<FeatureVector> protos = extract_assignment(mm, sol.x);
  Reconstruction out;
  for (std::size_t i = 0; i < prob.entries.size(); ++i)
    out[prob.entries[i].id] = protos[i];
  return out;
}

}  // namespace testutil
