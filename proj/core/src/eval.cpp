#include "protophon/eval.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <string>

#include "protophon/errors.hpp"
#include "protophon/metric.hpp"

namespace protophon {

namespace {

// Agreement threshold shared by equal rate, sound rate and matching rate.
constexpr double kExactTol = 1e-4;

void require_same_ids(const Reconstruction& recon, const Reconstruction& truth) {
  if (recon.size() != truth.size())
    throw IdMismatch("reconstruction covers " + std::to_string(recon.size()) +
                     " ids, reference covers " + std::to_string(truth.size()));
  auto it = truth.begin();
  for (const auto& [id, vec] : recon) {
    (void)vec;
    if (it->first != id)
      throw IdMismatch("id sets diverge at \"" + id + "\" vs \"" + it->first +
                       "\"");
    ++it;
  }
}

void require_entries(const Reconstruction& recon) {
  if (recon.empty()) throw EmptyProblem("no reconstructed entries to score");
}

std::string fmt(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

double average_l1(const Reconstruction& recon, const Reconstruction& truth) {
  require_entries(recon);
  require_same_ids(recon, truth);
  double total = 0;
  for (const auto& [id, vec] : recon) total += l1_distance(vec, truth.at(id));
  return total / static_cast<double>(recon.size());
}

double equal_rate(const Reconstruction& recon, const Reconstruction& truth) {
  require_entries(recon);
  require_same_ids(recon, truth);
  long hits = 0;
  for (const auto& [id, vec] : recon)
    hits += l1_distance(vec, truth.at(id)) < kExactTol ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(recon.size());
}

double sound_rate(const Reconstruction& recon) {
  require_entries(recon);
  long hits = 0;
  for (const auto& [id, vec] : recon) {
    (void)id;
    hits += soundness_distance(vec) < kExactTol ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(recon.size());
}

std::pair<double, double> matching_rate(
    const Reconstruction& recon,
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  if (pairs.empty()) throw EmptyProblem("no held-out pairs to score");
  long hits = 0;
  double total = 0;
  for (const auto& [x, xu] : pairs) {
    auto a = recon.find(x);
    auto b = recon.find(xu);
    if (a == recon.end()) throw IdMismatch("pair id \"" + x + "\" was not reconstructed");
    if (b == recon.end()) throw IdMismatch("pair id \"" + xu + "\" was not reconstructed");
    double d = l2_distance(a->second, b->second);
    total += d;
    hits += d < kExactTol ? 1 : 0;
  }
  double n = static_cast<double>(pairs.size());
  return {static_cast<double>(hits) / n, total / n};
}

Reconstruction majority_vote_ipa(const std::vector<ReadingTable>& varieties) {
  if (varieties.empty()) throw EmptyProblem("majority vote over zero varieties");
  std::map<std::string, std::map<std::string, int>> counts;
  for (const ReadingTable& table : varieties)
    for (const auto& [id, sym] : table) ++counts[id][sym];
  Reconstruction out;
  for (const auto& [id, by_symbol] : counts) {
    // First strict maximum in a sorted map: ties fall to the smaller symbol.
    const std::string* best = nullptr;
    int best_n = 0;
    for (const auto& [sym, n] : by_symbol)
      if (n > best_n) {
        best = &sym;
        best_n = n;
      }
    out[id] = parse_phoneme(*best);
  }
  return out;
}

Reconstruction majority_vote_feature(const std::vector<ReadingTable>& varieties) {
  if (varieties.empty()) throw EmptyProblem("majority vote over zero varieties");
  std::map<std::string, std::array<std::map<double, int>, kFeatureCount>> counts;
  for (const ReadingTable& table : varieties)
    for (const auto& [id, sym] : table) {
      FeatureVector f = parse_phoneme(sym);
      auto& per = counts[id];
      for (int j = 0; j < kFeatureCount; ++j) ++per[j][f[j]];
    }
  Reconstruction out;
  for (const auto& [id, per] : counts) {
    FeatureVector v;
    for (int j = 0; j < kFeatureCount; ++j) {
      double best_value = 0;
      int best_n = 0;
      for (const auto& [value, n] : per[j])
        if (n > best_n) {  // ascending keys: ties fall to the smaller value
          best_value = value;
          best_n = n;
        }
      v[j] = best_value;
    }
    out[id] = v;
  }
  return out;
}

double two_proportion_z(double sr1, long n1, double sr2, long n2) {
  if (n1 <= 0 || n2 <= 0)
    throw InvalidWeight("two_proportion_z needs positive sample sizes");
  if (!(sr1 >= 0 && sr1 <= 1) || !(sr2 >= 0 && sr2 <= 1))
    throw InvalidWeight("two_proportion_z needs rates in [0, 1]");
  double n = static_cast<double>(n1) + static_cast<double>(n2);
  double pooled = (sr1 * static_cast<double>(n1) + sr2 * static_cast<double>(n2)) / n;
  if (pooled <= 0 || pooled >= 1)
    throw DegeneratePool("pooled success rate is " + fmt(pooled) +
                         ", so the z statistic has no variance");
  double se = std::sqrt(pooled * (1 - pooled) *
                        (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2)));
  return (sr1 - sr2) / se;
}

EvalReport evaluate(const Reconstruction& recon, const Reconstruction& truth) {
  EvalReport r;
  r.avg_l1 = average_l1(recon, truth);
  r.equal_rate = equal_rate(recon, truth);
  r.sound_rate = sound_rate(recon);
  r.n_entries = static_cast<long>(recon.size());
  return r;
}

EvalReport evaluate(const Reconstruction& recon, const Reconstruction& truth,
                    const std::vector<std::pair<std::string, std::string>>& held_out) {
  EvalReport r = evaluate(recon, truth);
  if (!held_out.empty()) {
    auto [rate, avg] = matching_rate(recon, held_out);
    r.matching_rate = rate;
    r.avg_l2 = avg;
    r.n_pairs = static_cast<long>(held_out.size());
  }
  return r;
}

std::string render_report_tsv(const EvalReport& r) {
  std::string out =
      "avg_l1\tequal_rate\tsound_rate\tn_entries\tmatching_rate\tavg_l2\tn_pairs\n";
  out += fmt(r.avg_l1) + "\t" + fmt(r.equal_rate) + "\t" + fmt(r.sound_rate) +
         "\t" + std::to_string(r.n_entries) + "\t" + fmt(r.matching_rate) +
         "\t" + fmt(r.avg_l2) + "\t" + std::to_string(r.n_pairs) + "\n";
  return out;
}

std::string render_report_keyvalue(const EvalReport& r) {
  std::string out;
  out += "avg_l1=" + fmt(r.avg_l1) + "\n";
  out += "equal_rate=" + fmt(r.equal_rate) + "\n";
  out += "sound_rate=" + fmt(r.sound_rate) + "\n";
  out += "n_entries=" + std::to_string(r.n_entries) + "\n";
  out += "matching_rate=" + fmt(r.matching_rate) + "\n";
  out += "avg_l2=" + fmt(r.avg_l2) + "\n";
  out += "n_pairs=" + std::to_string(r.n_pairs) + "\n";
  return out;
}

}  // namespace protophon
