#include "protophon/milp.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "protophon/metric.hpp"

namespace protophon {

namespace {

// Governing features in gate-slot order; slot 0 (sonority) has no entry
// threshold binary because the low-sonority disjunction plays that role.
constexpr Feat kGateFeats[4] = {kSonority, kLabial, kCoronal, kDorsal};
constexpr Feat kSignSplitFeats[3] = {kLabiodental, kAnterior, kDistributed};

int gate_slot(int tau) {
  switch (tau) {
    case kSonority: return 0;
    case kLabial: return 1;
    case kCoronal: return 2;
    case kDorsal: return 3;
    default: return -1;
  }
}

std::string slug(const char* name) {
  std::string s(name);
  std::replace(s.begin(), s.end(), ' ', '_');
  return s;
}

struct Builder {
  std::vector<std::vector<std::pair<int, double>>> cols;
  std::vector<double> collb, colub, cost;
  std::vector<double> rowlb, rowub;
  std::vector<std::string> col_names, row_names;

  int add_col(std::string name, double lo, double hi, double c) {
    int id = static_cast<int>(cols.size());
    cols.emplace_back();
    collb.push_back(lo);
    colub.push_back(hi);
    cost.push_back(c);
    col_names.push_back(std::move(name));
    return id;
  }

  int add_row(std::string name, double lo, double hi,
              std::initializer_list<std::pair<int, double>> entries) {
    int id = static_cast<int>(rowlb.size());
    rowlb.push_back(lo);
    rowub.push_back(hi);
    row_names.push_back(std::move(name));
    for (const auto& [c, v] : entries)
      cols[static_cast<std::size_t>(c)].emplace_back(id, v);
    return id;
  }
};

std::unordered_map<std::string, int> index_entries(const ReconstructionProblem& rp) {
  std::unordered_map<std::string, int> idx;
  for (std::size_t i = 0; i < rp.entries.size(); ++i)
    idx.emplace(rp.entries[i].id, static_cast<int>(i));
  return idx;
}

}  // namespace

void ReconstructionProblem::validate() const {
  if (entries.empty()) throw EmptyProblem("reconstruction problem has no entries");
  if (!(lambda_fq >= 0.0 && lambda_fq <= 1.0))
    throw InvalidWeight("lambda_fq must lie in [0, 1]");
  if (!(k_medial >= 0.0)) throw InvalidWeight("k_medial must be nonnegative");

  std::unordered_set<std::string> seen;
  bool any_term = !pairs.empty();
  for (const ReconstructionEntry& e : entries) {
    if (!seen.insert(e.id).second) throw DuplicateEntryId(e.id);
    for (const auto& [v, vec] : e.readings) {
      if (v < 0 || v >= static_cast<int>(varieties.size()))
        throw IdMismatch("entry \"" + e.id + "\" reads variety index " +
                         std::to_string(v) + " outside the variety list");
      (void)vec;
      any_term = true;
    }
  }
  for (const FanqiePair& p : pairs) {
    if (seen.find(p.x) == seen.end())
      throw IdMismatch("pair references unknown entry id \"" + p.x + "\"");
    if (seen.find(p.xu) == seen.end())
      throw IdMismatch("pair references unknown entry id \"" + p.xu + "\"");
  }
  if (!any_term) throw EmptyProblem("no readings and no pairs: nothing constrains the problem");
}

MilpModel build_model(const ReconstructionProblem& rp, const BigMConfig& cfg) {
  rp.validate();
  const FeatureSchema& sc = schema();
  const double M = cfg.big_m;
  const double eps = cfg.epsilon;
  Builder b;
  MilpModel mm;
  std::unordered_map<std::string, int> id_of = index_entries(rp);

  for (std::size_t e = 0; e < rp.entries.size(); ++e) {
    std::string pre = "e" + std::to_string(e);
    EntryBlock eb;
    eb.f = static_cast<int>(b.cols.size());
    for (int j = 0; j < kFeatureCount; ++j) {
      const FeatureDef& fd = sc.features[static_cast<std::size_t>(j)];
      b.add_col(pre + "_F_" + slug(fd.name), fd.lo, fd.hi, 0.0);
    }
    eb.w_low = b.add_col(pre + "_wI", 0, 1, 0.0);
    mm.binary_cols.push_back(eb.w_low);
    for (int g = 1; g < 4; ++g) {
      eb.b_gate[g - 1] = b.add_col(
          pre + "_b_" + slug(sc.features[static_cast<std::size_t>(kGateFeats[g])].name), 0, 1,
          0.0);
      mm.binary_cols.push_back(eb.b_gate[g - 1]);
    }
    for (int k = 0; k < 3; ++k) {
      std::string fs = slug(sc.features[static_cast<std::size_t>(kSignSplitFeats[k])].name);
      eb.b_sign[k][0] = b.add_col(pre + "_bp_" + fs, 0, 1, 0.0);
      eb.b_sign[k][1] = b.add_col(pre + "_bm_" + fs, 0, 1, 0.0);
      mm.binary_cols.push_back(eb.b_sign[k][0]);
      mm.binary_cols.push_back(eb.b_sign[k][1]);
    }

    int dr = eb.f + kDelayedRelease, son = eb.f + kSonority;
    // Low-sonority disjunction: with the binary on, |dr value| is capped by
    // the sonority-side wedge; with it off, dr is pinned to zero.
    b.add_row(pre + "_c1a", -lp::kInf, M, {{dr, 1.0}, {son, -1.0}, {eb.w_low, M}});
    b.add_row(pre + "_c1b", -lp::kInf, 2 + M, {{dr, 1.0}, {son, 1.0}, {eb.w_low, M}});
    b.add_row(pre + "_c1c", -lp::kInf, 0.0, {{dr, 1.0}, {eb.w_low, -M}});
    b.add_row(pre + "_c1d", -lp::kInf, M, {{dr, -1.0}, {son, -1.0}, {eb.w_low, M}});
    b.add_row(pre + "_c1e", -lp::kInf, 2 + M, {{dr, -1.0}, {son, 1.0}, {eb.w_low, M}});
    b.add_row(pre + "_c1f", -lp::kInf, 0.0, {{dr, -1.0}, {eb.w_low, -M}});

    // Gate binaries track "governing feature exceeds 1/2".
    for (int g = 1; g < 4; ++g) {
      int fg = eb.f + kGateFeats[g];
      b.add_row(pre + "_thr_" + slug(sc.features[static_cast<std::size_t>(kGateFeats[g])].name),
                0.5 + eps - M, 0.5, {{fg, 1.0}, {eb.b_gate[g - 1], -M}});
    }

    // Graded dorsal dependents: zero when the gate is closed, at least one
    // when open.
    for (Feat j : {kHigh, kFront}) {
      int fj = eb.f + j;
      std::string fs = slug(sc.features[static_cast<std::size_t>(j)].name);
      b.add_row(pre + "_dep_" + fs + "_lo", 0.0, lp::kInf, {{fj, 1.0}, {eb.b_gate[2], -1.0}});
      b.add_row(pre + "_dep_" + fs + "_hi", -lp::kInf, 0.0, {{fj, 1.0}, {eb.b_gate[2], -M}});
    }

    // Sign-valued dependents: the split binaries carry the value and their
    // sum is tied to the gate.
    for (int k = 0; k < 3; ++k) {
      Feat j = kSignSplitFeats[k];
      int fj = eb.f + j;
      int gate = eb.b_gate[gate_slot(sc.tau(j)) - 1];
      std::string fs = slug(sc.features[static_cast<std::size_t>(j)].name);
      b.add_row(pre + "_eq_" + fs, 0.0, 0.0,
                {{fj, 1.0}, {eb.b_sign[k][0], -1.0}, {eb.b_sign[k][1], 1.0}});
      b.add_row(pre + "_sum_" + fs, 0.0, 0.0,
                {{eb.b_sign[k][0], 1.0}, {eb.b_sign[k][1], 1.0}, {gate, -1.0}});
      b.add_row(pre + "_cap_" + fs, -lp::kInf, 1.0,
                {{eb.b_sign[k][0], 1.0}, {eb.b_sign[k][1], 1.0}});
    }
    mm.entries.push_back(eb);
  }

  auto add_term = [&](TermBlock tb, const std::string& pre) {
    const EntryBlock& ea = mm.entries[static_cast<std::size_t>(tb.entry_a)];
    const EntryBlock* ebp =
        tb.kind == TermBlock::Kind::Pair
            ? &mm.entries[static_cast<std::size_t>(tb.entry_b)]
            : nullptr;

    tb.t = static_cast<int>(b.cols.size());
    for (int j = 0; j < kFeatureCount; ++j) {
      const FeatureDef& fd = sc.features[static_cast<std::size_t>(j)];
      double tub = ebp ? fd.hi - fd.lo
                       : std::max(fd.hi - tb.observed[j], tb.observed[j] - fd.lo);
      b.add_col(pre + "_t_" + slug(fd.name), 0.0, tub, tb.weight);
    }
    tb.chat = static_cast<int>(b.cols.size());
    for (int g = 0; g < 4; ++g) {
      int c = b.add_col(
          pre + "_c_" + slug(sc.features[static_cast<std::size_t>(kGateFeats[g])].name), 0, 1,
          0.0);
      mm.binary_cols.push_back(c);
    }
    tb.w = static_cast<int>(b.cols.size());
    for (std::size_t d = 0; d < sc.dependents.size(); ++d) {
      int j = sc.dependents[d];
      double s = sc.features[static_cast<std::size_t>(j)].s;
      b.add_col(pre + "_w_" + slug(sc.features[static_cast<std::size_t>(j)].name), 0.0, s,
                -tb.weight);
      // The gate binary picks up the saturated span for this dependent.
      b.cost[static_cast<std::size_t>(tb.chat + gate_slot(sc.tau(j)))] += tb.weight * s;
    }

    for (int j = 0; j < kFeatureCount; ++j) {
      std::string fs = slug(sc.features[static_cast<std::size_t>(j)].name);
      int tj = tb.t + j, fa = ea.f + j;
      if (ebp) {
        int fb = ebp->f + j;
        b.add_row(pre + "_abs_" + fs + "_p", 0.0, lp::kInf,
                  {{tj, 1.0}, {fa, -1.0}, {fb, 1.0}});
        b.add_row(pre + "_abs_" + fs + "_m", 0.0, lp::kInf,
                  {{tj, 1.0}, {fa, 1.0}, {fb, -1.0}});
      } else {
        double c = tb.observed[j];
        b.add_row(pre + "_abs_" + fs + "_p", -c, lp::kInf, {{tj, 1.0}, {fa, -1.0}});
        b.add_row(pre + "_abs_" + fs + "_m", c, lp::kInf, {{tj, 1.0}, {fa, 1.0}});
      }
    }
    for (int g = 0; g < 4; ++g) {
      int tg = tb.t + kGateFeats[g];
      b.add_row(pre + "_thr_" + slug(sc.features[static_cast<std::size_t>(kGateFeats[g])].name),
                0.5 + eps - M, 0.5, {{tg, 1.0}, {tb.chat + g, -M}});
    }
    for (std::size_t d = 0; d < sc.dependents.size(); ++d) {
      int j = sc.dependents[d];
      double s = sc.features[static_cast<std::size_t>(j)].s;
      int wd = tb.w + static_cast<int>(d);
      int tj = tb.t + j;
      int cg = tb.chat + gate_slot(sc.tau(j));
      std::string fs = slug(sc.features[static_cast<std::size_t>(j)].name);
      b.add_row(pre + "_mc1_" + fs, -lp::kInf, 0.0, {{wd, 1.0}, {cg, -s}});
      b.add_row(pre + "_mc2_" + fs, -lp::kInf, 0.0, {{wd, 1.0}, {tj, -1.0}});
      b.add_row(pre + "_mc3_" + fs, -s, lp::kInf, {{wd, 1.0}, {tj, -1.0}, {cg, -s}});
    }
    mm.terms.push_back(tb);
  };

  int term_idx = 0;
  double wv = 1.0 - rp.lambda_fq;
  for (std::size_t e = 0; e < rp.entries.size(); ++e) {
    for (const auto& [v, reading] : rp.entries[e].readings) {
      TermBlock tb;
      tb.kind = TermBlock::Kind::Variety;
      tb.entry_a = static_cast<int>(e);
      tb.variety = v;
      tb.weight = wv;
      tb.observed = reading;
      add_term(tb, "T" + std::to_string(term_idx++));
    }
  }
  for (const FanqiePair& p : rp.pairs) {
    TermBlock tb;
    tb.kind = TermBlock::Kind::Pair;
    tb.entry_a = id_of.at(p.x);
    tb.entry_b = id_of.at(p.xu);
    tb.weight = rp.lambda_fq * (p.medial_match ? rp.k_medial : 1.0);
    add_term(tb, "T" + std::to_string(term_idx++));
  }

  mm.problem.A.clear_to(static_cast<int>(b.rowlb.size()));
  for (const auto& col : b.cols) mm.problem.A.add_column(col);
  mm.problem.c = std::move(b.cost);
  mm.problem.collb = std::move(b.collb);
  mm.problem.colub = std::move(b.colub);
  mm.problem.rowlb = std::move(b.rowlb);
  mm.problem.rowub = std::move(b.rowub);
  mm.col_names = std::move(b.col_names);
  mm.row_names = std::move(b.row_names);
  return mm;
}

std::vector<FeatureVector> extract_assignment(const MilpModel& mm,
                                              const std::vector<double>& x) {
  std::vector<FeatureVector> out(mm.entries.size());
  for (std::size_t e = 0; e < mm.entries.size(); ++e)
    for (int j = 0; j < kFeatureCount; ++j)
      out[e][j] = x[static_cast<std::size_t>(mm.entries[e].f + j)];
  return out;
}

std::vector<double> lift_assignment(const MilpModel& mm,
                                    const std::vector<FeatureVector>& proto) {
  const FeatureSchema& sc = schema();
  if (proto.size() != mm.entries.size())
    throw Error("lift_assignment: one vector per entry required");
  std::vector<double> x(static_cast<std::size_t>(mm.problem.num_cols()), 0.0);

  for (std::size_t e = 0; e < mm.entries.size(); ++e) {
    const EntryBlock& eb = mm.entries[e];
    const FeatureVector& F = proto[e];
    for (int j = 0; j < kFeatureCount; ++j) x[static_cast<std::size_t>(eb.f + j)] = F[j];
    x[static_cast<std::size_t>(eb.w_low)] = F[kSonority] <= 2.0 ? 1.0 : 0.0;
    for (int g = 1; g < 4; ++g)
      x[static_cast<std::size_t>(eb.b_gate[g - 1])] = F[kGateFeats[g]] > 0.5 ? 1.0 : 0.0;
    for (int k = 0; k < 3; ++k) {
      double v = F[kSignSplitFeats[k]];
      x[static_cast<std::size_t>(eb.b_sign[k][0])] = v > 0.5 ? 1.0 : 0.0;
      x[static_cast<std::size_t>(eb.b_sign[k][1])] = v < -0.5 ? 1.0 : 0.0;
    }
  }

  for (const TermBlock& tb : mm.terms) {
    const FeatureVector& a = proto[static_cast<std::size_t>(tb.entry_a)];
    const FeatureVector& o =
        tb.kind == TermBlock::Kind::Pair ? proto[static_cast<std::size_t>(tb.entry_b)]
                                         : tb.observed;
    for (int j = 0; j < kFeatureCount; ++j)
      x[static_cast<std::size_t>(tb.t + j)] = std::abs(a[j] - o[j]);
    for (int g = 0; g < 4; ++g)
      x[static_cast<std::size_t>(tb.chat + g)] =
          x[static_cast<std::size_t>(tb.t + kGateFeats[g])] > 0.5 ? 1.0 : 0.0;
    for (std::size_t d = 0; d < sc.dependents.size(); ++d) {
      int j = sc.dependents[d];
      x[static_cast<std::size_t>(tb.w + static_cast<int>(d))] =
          x[static_cast<std::size_t>(tb.chat + gate_slot(sc.tau(j)))] *
          x[static_cast<std::size_t>(tb.t + j)];
    }
  }
  return x;
}

double exact_objective(const ReconstructionProblem& rp,
                       const std::vector<FeatureVector>& proto) {
  if (proto.size() != rp.entries.size())
    throw Error("exact_objective: one vector per entry required");
  std::unordered_map<std::string, int> id_of = index_entries(rp);
  double obj = 0;
  double wv = 1.0 - rp.lambda_fq;
  for (std::size_t e = 0; e < rp.entries.size(); ++e)
    for (const auto& [v, reading] : rp.entries[e].readings) {
      (void)v;
      obj += wv * distance(proto[e], reading);
    }
  for (const FanqiePair& p : rp.pairs)
    obj += rp.lambda_fq * (p.medial_match ? rp.k_medial : 1.0) *
           distance(proto[static_cast<std::size_t>(id_of.at(p.x))],
                    proto[static_cast<std::size_t>(id_of.at(p.xu))]);
  return obj;
}

double model_objective(const MilpModel& mm, const std::vector<double>& x) {
  double acc = mm.problem.c0;
  for (std::size_t j = 0; j < x.size(); ++j) acc += mm.problem.c[j] * x[j];
  return acc;
}

}  // namespace protophon
