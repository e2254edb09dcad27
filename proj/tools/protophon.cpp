#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "protophon/cluster.hpp"
#include "protophon/dataset.hpp"
#include "protophon/errors.hpp"
#include "protophon/eval.hpp"
#include "protophon/geometry.hpp"
#include "protophon/lp_format.hpp"
#include "protophon/milp.hpp"
#include "protophon/phonology.hpp"
#include "protophon/solver.hpp"
#include "protophon/synth.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace protophon;

constexpr const char* kVersion = "0.1.0";

std::string fmt(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

void write_text(const fs::path& path, const std::string& body) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << body;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t0_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ =
      std::chrono::steady_clock::now();
};

// The manifest pins everything a byte-identical single-worker re-run needs.
// Wall time is informational and is the one field that varies between runs.
void write_manifest(const fs::path& out_dir, const std::string& subcommand,
                    const ordered_json& params,
                    const std::vector<std::string>& outputs, double wall_s) {
  ordered_json j;
  j["tool"] = "protophon";
  j["versions"] = {{"protophon", kVersion}};
  j["subcommand"] = subcommand;
  j["parameters"] = params;
  j["outputs"] = outputs;
  j["wall_time_s"] = wall_s;
  write_text(out_dir / "manifest.json", j.dump(2) + "\n");
}

ordered_json load_manifest(const std::string& path,
                           const std::string& subcommand) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!j.contains("subcommand") || j["subcommand"] != subcommand)
    throw Error(path + " was not written by `protophon " + subcommand + "`");
  if (!j.contains("parameters"))
    throw ParseError(path + ": manifest has no parameters block");
  return j["parameters"];
}

// Manifest values fill in every option the command line left untouched.
template <typename T>
void take(const ordered_json& m, const char* key, CLI::App* cmd,
          const std::string& flag, T& into) {
  if (cmd->count(flag) > 0) return;
  if (m.contains(key)) into = m.at(key).get<T>();
}

// Synthetic runs default to the balanced weight; hand-authored corpora lean
// on the spellings, which are far cleaner than dialect transcriptions.
double default_lambda(const std::string& data_dir) {
  return fs::exists(fs::path(data_dir) / "config.json") ? 0.5 : 0.95;
}

std::string status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::GapReached: return "gap_reached";
    case SolveStatus::TimeLimit: return "time_limit";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

// Shared solve pipeline: the per-entry majority vote over the readings is
// always feasible, so it seeds the incumbent and the search only improves it.
Reconstruction solve_problem(const ReconstructionProblem& prob,
                             SolveOptions opts, Solution* sol_out) {
  MilpModel mm = build_model(prob);
  const PhonemeInventory& chart = full_inventory();
  std::vector<ReadingTable> tables(prob.varieties.size());
  for (const ReconstructionEntry& e : prob.entries)
    for (const auto& [v, vec] : e.readings)
      tables[static_cast<std::size_t>(v)][e.id] = nearest_phoneme(vec, chart);
  Reconstruction vote;
  if (!tables.empty()) vote = majority_vote_ipa(tables);
  FeatureVector zero = parse_phoneme("");
  std::vector<FeatureVector> start;
  for (const ReconstructionEntry& e : prob.entries) {
    auto it = vote.find(e.id);
    start.push_back(it == vote.end() ? zero : it->second);
  }
  std::vector<double> lifted = lift_assignment(mm, start);
  opts.start = &lifted;
  Solution sol = solve(mm, opts);
  if (sol_out) *sol_out = sol;
  Reconstruction out;
  if (sol.status == SolveStatus::Infeasible) return out;
  std::vector<FeatureVector> protos = extract_assignment(mm, sol.x);
  for (std::size_t i = 0; i < prob.entries.size(); ++i)
    out[prob.entries[i].id] = protos[i];
  return out;
}

// Ground truth rides in the category column when every entry carries a
// parseable symbol there; otherwise the column is an opaque label.
bool category_truth(const ReconstructionProblem& prob, Reconstruction* truth) {
  truth->clear();
  for (const ReconstructionEntry& e : prob.entries) {
    if (e.category.empty()) return false;
    try {
      (*truth)[e.id] = parse_phoneme(e.category);
    } catch (const UnknownSymbol&) {
      return false;
    }
  }
  return true;
}

std::string solver_report(const Solution& sol) {
  std::string out;
  out += "status=" + status_name(sol.status) + "\n";
  out += "objective=" + fmt(sol.objective) + "\n";
  out += "bound=" + fmt(sol.bound) + "\n";
  out += "gap=" + fmt(sol.gap) + "\n";
  out += "nodes=" + std::to_string(sol.nodes) + "\n";
  out += "lp_iterations=" + std::to_string(sol.lp_iterations) + "\n";
  return out;
}

// Eq-rate style comparisons divide by the pooled variance, which vanishes
// when both sides agree perfectly; the report then shows a signed infinity.
std::string z_or_inf(double r1, long n1, double r2, long n2) {
  try {
    return fmt(two_proportion_z(r1, n1, r2, n2));
  } catch (const DegeneratePool&) {
    std::cerr << "warning: pooled rate is degenerate, z undefined; "
                 "reporting infinity\n";
    return r1 >= r2 ? "+inf" : "-inf";
  }
}

struct SolverFlags {
  double mip_gap = 1e-4;
  double time_limit = std::numeric_limits<double>::infinity();
  int workers = 1;
  std::uint64_t seed = 0;
};

void add_solver_flags(CLI::App* cmd, SolverFlags* sf) {
  cmd->add_option("--mip-gap", sf->mip_gap, "Relative optimality gap");
  cmd->add_option("--time-limit-s", sf->time_limit,
                  "Solver wall-clock budget in seconds");
  cmd->add_option("--workers", sf->workers,
                  "Concurrent node evaluations; 1 is deterministic");
  cmd->add_option("--seed", sf->seed, "Solver tie-break seed");
}

void merge_solver_flags(const ordered_json& m, CLI::App* cmd, SolverFlags* sf) {
  take(m, "mip_gap", cmd, "--mip-gap", sf->mip_gap);
  // An unlimited budget lands in JSON as null; read it back as infinity.
  if (!cmd->count("--time-limit-s") && m.contains("time_limit_s")) {
    const ordered_json& v = m.at("time_limit_s");
    sf->time_limit = v.is_null() ? std::numeric_limits<double>::infinity()
                                 : v.get<double>();
  }
  take(m, "workers", cmd, "--workers", sf->workers);
  take(m, "seed", cmd, "--seed", sf->seed);
}

void record_solver_flags(ordered_json& params, const SolverFlags& sf) {
  params["mip_gap"] = sf.mip_gap;
  params["time_limit_s"] = sf.time_limit;
  params["workers"] = sf.workers;
  params["seed"] = sf.seed;
}

SolveOptions to_options(const SolverFlags& sf) {
  SolveOptions o;
  o.mip_gap = sf.mip_gap;
  o.time_limit = sf.time_limit;
  o.workers = sf.workers;
  o.seed = sf.seed;
  return o;
}

int run_synth(CLI::App* cmd, GenerationConfig& cfg, const std::string& out,
              const std::string& from_manifest) {
  if (!from_manifest.empty()) {
    ordered_json m = load_manifest(from_manifest, "synth");
    take(m, "m_min", cmd, "--m-min", cfg.m_min);
    take(m, "m_max", cmd, "--m-max", cfg.m_max);
    take(m, "n_min", cmd, "--n-min", cfg.n_min);
    take(m, "n_max", cmd, "--n-max", cfg.n_max);
    take(m, "num_varieties", cmd, "--num-varieties", cfg.num_varieties);
    take(m, "p_fq", cmd, "--p-fq", cfg.p_fq);
    take(m, "p_dia", cmd, "--p-dia", cfg.p_dia);
    take(m, "p_char", cmd, "--p-char", cfg.p_char);
    take(m, "seed", cmd, "--seed", cfg.seed);
    take(m, "system_source", cmd, "--system", cfg.system_source);
    take(m, "uniform_change", cmd, "--uniform-change", cfg.uniform_change);
  }
  cfg.validate();

  Timer timer;
  SyntheticDataset ds = generate(cfg);
  write_dataset(ds, out);

  ordered_json params;
  params["m_min"] = cfg.m_min;
  params["m_max"] = cfg.m_max;
  params["n_min"] = cfg.n_min;
  params["n_max"] = cfg.n_max;
  params["num_varieties"] = cfg.num_varieties;
  params["p_fq"] = cfg.p_fq;
  params["p_dia"] = cfg.p_dia;
  params["p_char"] = cfg.p_char;
  params["seed"] = cfg.seed;
  params["system_source"] = cfg.system_source;
  params["uniform_change"] = cfg.uniform_change;
  std::vector<std::string> outputs = {"entries.tsv", "pairs.tsv",
                                      "config.json"};
  for (std::size_t v = 0; v < ds.varieties.size(); ++v)
    outputs.push_back("variety_" + std::to_string(v) + ".tsv");
  write_manifest(out, "synth", params, outputs, timer.seconds());

  std::cout << "initials=" << ds.system.initials.entries.size() << "\n"
            << "characters=" << ds.system.characters.size() << "\n"
            << "pairs=" << ds.pairs.size() << "\n"
            << "varieties=" << ds.varieties.size() << "\n";
  return 0;
}

int run_reconstruct(CLI::App* cmd, std::string data, const std::string& out,
                    const std::string& from_manifest, double lambda,
                    double k_medial, bool allow_unsound, SolverFlags sf) {
  if (!from_manifest.empty()) {
    ordered_json m = load_manifest(from_manifest, "reconstruct");
    take(m, "data", cmd, "--data", data);
    take(m, "lambda_fq", cmd, "--lambda-fq", lambda);
    take(m, "k_medial", cmd, "--k-medial", k_medial);
    take(m, "allow_unsound_readings", cmd, "--allow-unsound-readings",
         allow_unsound);
    merge_solver_flags(m, cmd, &sf);
  }
  if (data.empty()) throw Error("reconstruct needs --data (or a manifest)");
  if (std::isnan(lambda)) lambda = default_lambda(data);

  Timer timer;
  ReconstructionProblem prob = ingest(data, allow_unsound);
  prob.lambda_fq = lambda;
  prob.k_medial = k_medial;
  prob.validate();

  Solution sol;
  Reconstruction recon = solve_problem(prob, to_options(sf), &sol);
  if (sol.status == SolveStatus::Infeasible) {
    std::cerr << "solver proved the model infeasible\n";
    return 3;
  }

  fs::create_directories(out);
  write_reconstruction(recon, (fs::path(out) / "reconstruction.tsv").string());

  std::string report = solver_report(sol);
  report += "entries=" + std::to_string(prob.entries.size()) + "\n";
  report += "pairs=" + std::to_string(prob.pairs.size()) + "\n";
  report += "lambda_fq=" + fmt(lambda) + "\n";
  report += "k_medial=" + fmt(k_medial) + "\n";
  Reconstruction truth;
  if (category_truth(prob, &truth)) {
    report += render_report_keyvalue(evaluate(recon, truth));
  } else {
    report += "sound_rate=" + fmt(sound_rate(recon)) + "\n";
  }
  write_text(fs::path(out) / "report.txt", report);

  ordered_json params;
  params["data"] = data;
  params["lambda_fq"] = lambda;
  params["k_medial"] = k_medial;
  params["allow_unsound_readings"] = allow_unsound;
  record_solver_flags(params, sf);
  write_manifest(out, "reconstruct", params,
                 {"reconstruction.tsv", "report.txt"}, timer.seconds());
  std::cout << report;
  return 0;
}

int run_eval(CLI::App* cmd, std::string recon_path, std::string data,
             const std::string& recon_b_path, const std::string& out,
             const std::string& from_manifest) {
  if (!from_manifest.empty()) {
    ordered_json m = load_manifest(from_manifest, "eval");
    take(m, "recon", cmd, "--recon", recon_path);
    take(m, "data", cmd, "--data", data);
  }
  if (recon_path.empty() || data.empty())
    throw Error("eval needs --recon and --data (or a manifest)");

  Timer timer;
  Reconstruction recon = read_reconstruction(recon_path);
  ReconstructionProblem prob = ingest(data, true);
  Reconstruction truth;
  if (!category_truth(prob, &truth))
    throw Error(
        "eval needs ground truth: every entries.tsv row must carry a "
        "parseable category symbol");
  std::vector<std::pair<std::string, std::string>> pair_ids;
  for (const FanqiePair& p : prob.pairs) pair_ids.emplace_back(p.x, p.xu);

  EvalReport r = pair_ids.empty() ? evaluate(recon, truth)
                                  : evaluate(recon, truth, pair_ids);
  std::string report = render_report_keyvalue(r);
  ordered_json params;
  params["recon"] = recon_path;
  params["data"] = data;

  if (!recon_b_path.empty()) {
    Reconstruction rb = read_reconstruction(recon_b_path);
    EvalReport b = pair_ids.empty() ? evaluate(rb, truth)
                                    : evaluate(rb, truth, pair_ids);
    report += "equal_rate_b=" + fmt(b.equal_rate) + "\n";
    report += "sound_rate_b=" + fmt(b.sound_rate) + "\n";
    report += "z_equal_rate=" +
              z_or_inf(r.equal_rate, r.n_entries, b.equal_rate, b.n_entries) +
              "\n";
    report += "z_sound_rate=" +
              z_or_inf(r.sound_rate, r.n_entries, b.sound_rate, b.n_entries) +
              "\n";
    params["recon_b"] = recon_b_path;
  }

  write_text(fs::path(out) / "report.txt", report);
  write_text(fs::path(out) / "report.tsv", render_report_tsv(r));
  write_manifest(out, "eval", params, {"report.txt", "report.tsv"},
                 timer.seconds());
  std::cout << report;
  return 0;
}

int run_heldout(CLI::App* cmd, std::string data, const std::string& out,
                const std::string& from_manifest, double lambda,
                double k_medial, double fraction, std::uint64_t split_seed,
                bool allow_unsound, SolverFlags sf) {
  if (!from_manifest.empty()) {
    ordered_json m = load_manifest(from_manifest, "heldout");
    take(m, "data", cmd, "--data", data);
    take(m, "lambda_fq", cmd, "--lambda-fq", lambda);
    take(m, "k_medial", cmd, "--k-medial", k_medial);
    take(m, "fraction", cmd, "--fraction", fraction);
    take(m, "split_seed", cmd, "--split-seed", split_seed);
    take(m, "allow_unsound_readings", cmd, "--allow-unsound-readings",
         allow_unsound);
    merge_solver_flags(m, cmd, &sf);
  }
  if (data.empty()) throw Error("heldout needs --data (or a manifest)");
  if (std::isnan(lambda)) lambda = default_lambda(data);

  Timer timer;
  ReconstructionProblem prob = ingest(data, allow_unsound);
  if (prob.pairs.empty())
    throw EmptyProblem("heldout needs speller pairs to split");
  PairSplit split = split_pairs(prob.pairs, fraction, split_seed);

  ReconstructionProblem train = prob;
  train.pairs = split.train;
  train.lambda_fq = lambda;
  train.k_medial = k_medial;
  train.validate();

  Solution sol;
  Reconstruction recon = solve_problem(train, to_options(sf), &sol);
  if (sol.status == SolveStatus::Infeasible) {
    std::cerr << "solver proved the model infeasible\n";
    return 3;
  }

  std::vector<std::pair<std::string, std::string>> held_ids;
  for (const FanqiePair& p : split.held_out) held_ids.emplace_back(p.x, p.xu);
  std::string report = solver_report(sol);
  report += "train_pairs=" + std::to_string(split.train.size()) + "\n";
  report += "held_out_pairs=" + std::to_string(split.held_out.size()) + "\n";
  report += "fraction=" + fmt(fraction) + "\n";
  report += "split_seed=" + std::to_string(split_seed) + "\n";
  if (!held_ids.empty()) {
    auto [rate, avg_l2] = matching_rate(recon, held_ids);
    report += "matching_rate=" + fmt(rate) + "\n";
    report += "avg_l2=" + fmt(avg_l2) + "\n";
  }

  fs::create_directories(out);
  write_reconstruction(recon, (fs::path(out) / "reconstruction.tsv").string());
  write_text(fs::path(out) / "report.txt", report);

  ordered_json params;
  params["data"] = data;
  params["lambda_fq"] = lambda;
  params["k_medial"] = k_medial;
  params["fraction"] = fraction;
  params["split_seed"] = split_seed;
  params["allow_unsound_readings"] = allow_unsound;
  record_solver_flags(params, sf);
  write_manifest(out, "heldout", params, {"reconstruction.tsv", "report.txt"},
                 timer.seconds());
  std::cout << report;
  return 0;
}

int run_cluster(CLI::App* cmd, std::string recon_path, std::string data,
                const std::string& out, const std::string& from_manifest,
                int k, std::uint64_t seed, int restarts) {
  if (!from_manifest.empty()) {
    ordered_json m = load_manifest(from_manifest, "cluster");
    take(m, "recon", cmd, "--recon", recon_path);
    take(m, "data", cmd, "--data", data);
    take(m, "k", cmd, "--k", k);
    take(m, "seed", cmd, "--seed", seed);
    take(m, "restarts", cmd, "--restarts", restarts);
  }
  if (recon_path.empty()) throw Error("cluster needs --recon (or a manifest)");

  Timer timer;
  Reconstruction recon = read_reconstruction(recon_path);

  std::map<std::string, std::string> tags;
  bool have_tags = false;
  if (!data.empty()) {
    ReconstructionProblem prob = ingest(data, true);
    have_tags = true;
    for (const ReconstructionEntry& e : prob.entries) {
      if (e.category.empty()) {
        have_tags = false;
        break;
      }
      tags[e.id] = e.category;
    }
  }
  if (k <= 0) {
    if (!have_tags)
      throw Error("cluster needs --k, or --data with category labels");
    std::set<std::string> distinct;
    for (const auto& [id, tag] : tags) distinct.insert(tag);
    k = static_cast<int>(distinct.size());
  }

  Labeling found = kmeans(recon, k, seed, restarts);
  std::string report;
  report += "k=" + std::to_string(found.k) + "\n";
  report += "wcss=" + fmt(found.wcss) + "\n";
  if (have_tags) {
    Labeling reference = labels_from_categories(tags);
    report += "ami=" + fmt(ami(found, reference)) + "\n";
  }

  write_text(fs::path(out) / "labels.tsv", labeling_to_tsv(found));
  write_text(fs::path(out) / "report.txt", report);
  ordered_json params;
  params["recon"] = recon_path;
  if (!data.empty()) params["data"] = data;
  params["k"] = k;
  params["seed"] = seed;
  params["restarts"] = restarts;
  write_manifest(out, "cluster", params, {"labels.tsv", "report.txt"},
                 timer.seconds());
  std::cout << report;
  return 0;
}

int run_geometry(CLI::App* cmd, std::string data, const std::string& out,
                 const std::string& from_manifest) {
  if (!from_manifest.empty()) {
    ordered_json m = load_manifest(from_manifest, "geometry");
    take(m, "data", cmd, "--data", data);
  }
  if (data.empty()) throw Error("geometry needs --data (or a manifest)");

  Timer timer;
  VarietyTables vt = read_varieties(data);
  DisagreementMatrix D = disagreement(vt.tables, vt.names);
  Embedding emb = mds_embed(D);
  Ball ball = min_enclosing_ball(emb.points);

  std::size_t shared = 0;
  if (!vt.tables.empty()) {
    for (const auto& [id, sym] : vt.tables[0]) {
      bool everywhere = true;
      for (const ReadingTable& t : vt.tables)
        if (!t.count(id)) {
          everywhere = false;
          break;
        }
      if (everywhere) ++shared;
    }
  }

  std::string report;
  report += "varieties=" + std::to_string(vt.tables.size()) + "\n";
  report += "shared_characters=" + std::to_string(shared) + "\n";
  report += "embedding_dims=" +
            std::to_string(emb.points.empty() ? 0 : emb.points[0].size()) +
            "\n";
  report += "distortion=" + fmt(emb.distortion) + "\n";
  report += "p_dia_lower_bound=" + fmt(ball.radius) + "\n";

  write_text(fs::path(out) / "disagreement.tsv", matrix_to_tsv(D));
  std::string pts;
  for (std::size_t i = 0; i < emb.points.size(); ++i) {
    pts += D.names[i];
    for (double c : emb.points[i]) pts += "\t" + fmt(c);
    pts += "\n";
  }
  write_text(fs::path(out) / "embedding.tsv", pts);
  write_text(fs::path(out) / "report.txt", report);
  ordered_json params;
  params["data"] = data;
  write_manifest(out, "geometry", params,
                 {"disagreement.tsv", "embedding.tsv", "report.txt"},
                 timer.seconds());
  std::cout << report;
  return 0;
}

int run_export_lp(CLI::App* cmd, std::string data, const std::string& out,
                  const std::string& from_manifest, double lambda,
                  double k_medial, bool allow_unsound) {
  if (!from_manifest.empty()) {
    ordered_json m = load_manifest(from_manifest, "export-lp");
    take(m, "data", cmd, "--data", data);
    take(m, "lambda_fq", cmd, "--lambda-fq", lambda);
    take(m, "k_medial", cmd, "--k-medial", k_medial);
    take(m, "allow_unsound_readings", cmd, "--allow-unsound-readings",
         allow_unsound);
  }
  if (data.empty()) throw Error("export-lp needs --data (or a manifest)");
  if (std::isnan(lambda)) lambda = default_lambda(data);

  Timer timer;
  ReconstructionProblem prob = ingest(data, allow_unsound);
  prob.lambda_fq = lambda;
  prob.k_medial = k_medial;
  prob.validate();
  MilpModel mm = build_model(prob);
  write_text(fs::path(out) / "model.lp", export_lp(mm));

  ordered_json params;
  params["data"] = data;
  params["lambda_fq"] = lambda;
  params["k_medial"] = k_medial;
  params["allow_unsound_readings"] = allow_unsound;
  write_manifest(out, "export-lp", params, {"model.lp"}, timer.seconds());
  std::cout << "variables=" << mm.problem.num_cols() << "\n"
            << "binaries=" << mm.binary_cols.size() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MILP-based proto-language initial reconstruction"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  double nan = std::numeric_limits<double>::quiet_NaN();

  // synth
  GenerationConfig gen;
  std::string synth_out, synth_manifest;
  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--out", synth_out, "Output dataset directory")
      ->required();
  synth->add_option("--m-min", gen.m_min, "Minimum initial count");
  synth->add_option("--m-max", gen.m_max, "Maximum initial count");
  synth->add_option("--n-min", gen.n_min, "Minimum characters per initial");
  synth->add_option("--n-max", gen.n_max, "Maximum characters per initial");
  synth->add_option("--num-varieties", gen.num_varieties,
                    "Number of daughter varieties");
  synth->add_option("--p-fq", gen.p_fq, "Corrupted speller-pair probability");
  synth->add_option("--p-dia", gen.p_dia,
                    "Per (variety, initial) regular-change probability");
  synth->add_option("--p-char", gen.p_char,
                    "Per character irregular-change probability");
  synth->add_option("--seed", gen.seed, "Generation seed");
  synth->add_option("--system", gen.system_source,
                    "sampled, english, german, mandarin, or latin");
  synth->add_flag("--uniform-change", gen.uniform_change,
                  "Redraw replacements uniformly instead of by closeness");
  synth->add_option("--from-manifest", synth_manifest,
                    "Re-run the generation recorded in a manifest");

  // reconstruct
  std::string rec_data, rec_out, rec_manifest;
  double rec_lambda = nan, rec_k = 1.0;
  bool rec_unsound = false;
  SolverFlags rec_sf;
  CLI::App* rec =
      app.add_subcommand("reconstruct", "Solve a dataset for its initials");
  rec->add_option("--data", rec_data, "Dataset directory");
  rec->add_option("--out", rec_out, "Output directory")->required();
  rec->add_option("--lambda-fq", rec_lambda,
                  "Speller-pair weight; defaults to 0.5 for generated "
                  "datasets, 0.95 otherwise");
  rec->add_option("--k-medial", rec_k, "Extra weight on medial-matching pairs");
  rec->add_flag("--allow-unsound-readings", rec_unsound,
                "Keep readings that sit off the valid-combination table");
  add_solver_flags(rec, &rec_sf);
  rec->add_option("--from-manifest", rec_manifest,
                  "Re-run the reconstruction recorded in a manifest");

  // eval
  std::string ev_recon, ev_data, ev_recon_b, ev_out, ev_manifest;
  CLI::App* ev = app.add_subcommand(
      "eval", "Score a reconstruction against category ground truth");
  ev->add_option("--recon", ev_recon, "reconstruction.tsv to score");
  ev->add_option("--data", ev_data, "Dataset directory with category labels");
  ev->add_option("--recon-b", ev_recon_b,
                 "Second reconstruction; adds two-proportion z tests");
  ev->add_option("--out", ev_out, "Output directory")->required();
  ev->add_option("--from-manifest", ev_manifest,
                 "Re-run the evaluation recorded in a manifest");

  // heldout
  std::string ho_data, ho_out, ho_manifest;
  double ho_lambda = nan, ho_k = 1.0, ho_fraction = 0.3;
  std::uint64_t ho_split_seed = 0;
  bool ho_unsound = false;
  SolverFlags ho_sf;
  CLI::App* ho = app.add_subcommand(
      "heldout", "Hold out speller pairs, train on the rest, report matching");
  ho->add_option("--data", ho_data, "Dataset directory");
  ho->add_option("--out", ho_out, "Output directory")->required();
  ho->add_option("--fraction", ho_fraction, "Held-out fraction of pairs");
  ho->add_option("--split-seed", ho_split_seed, "Split seed");
  ho->add_option("--lambda-fq", ho_lambda,
                 "Speller-pair weight; defaults as in reconstruct");
  ho->add_option("--k-medial", ho_k, "Extra weight on medial-matching pairs");
  ho->add_flag("--allow-unsound-readings", ho_unsound,
               "Keep readings that sit off the valid-combination table");
  add_solver_flags(ho, &ho_sf);
  ho->add_option("--from-manifest", ho_manifest,
                 "Re-run the experiment recorded in a manifest");

  // cluster
  std::string cl_recon, cl_data, cl_out, cl_manifest;
  int cl_k = 0, cl_restarts = 10;
  std::uint64_t cl_seed = 0;
  CLI::App* cl = app.add_subcommand(
      "cluster", "K-means over reconstructed vectors, with AMI when labeled");
  cl->add_option("--recon", cl_recon, "reconstruction.tsv to cluster");
  cl->add_option("--data", cl_data,
                 "Dataset directory; category labels give the AMI reference");
  cl->add_option("--out", cl_out, "Output directory")->required();
  cl->add_option("--k", cl_k,
                 "Cluster count; defaults to the distinct category count");
  cl->add_option("--seed", cl_seed, "Seeding stream");
  cl->add_option("--restarts", cl_restarts, "Independent restarts");
  cl->add_option("--from-manifest", cl_manifest,
                 "Re-run the clustering recorded in a manifest");

  // geometry
  std::string ge_data, ge_out, ge_manifest;
  CLI::App* ge = app.add_subcommand(
      "geometry", "Disagreement embedding and the dialect-change lower bound");
  ge->add_option("--data", ge_data, "Dataset directory with variety files");
  ge->add_option("--out", ge_out, "Output directory")->required();
  ge->add_option("--from-manifest", ge_manifest,
                 "Re-run the analysis recorded in a manifest");

  // export-lp
  std::string xl_data, xl_out, xl_manifest;
  double xl_lambda = nan, xl_k = 1.0;
  bool xl_unsound = false;
  CLI::App* xl = app.add_subcommand(
      "export-lp", "Write the model as LP text for external solvers");
  xl->add_option("--data", xl_data, "Dataset directory");
  xl->add_option("--out", xl_out, "Output directory")->required();
  xl->add_option("--lambda-fq", xl_lambda,
                 "Speller-pair weight; defaults as in reconstruct");
  xl->add_option("--k-medial", xl_k, "Extra weight on medial-matching pairs");
  xl->add_flag("--allow-unsound-readings", xl_unsound,
               "Keep readings that sit off the valid-combination table");
  xl->add_option("--from-manifest", xl_manifest,
                 "Re-run the export recorded in a manifest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(synth))
      return run_synth(synth, gen, synth_out, synth_manifest);
    if (app.got_subcommand(rec))
      return run_reconstruct(rec, rec_data, rec_out, rec_manifest, rec_lambda,
                             rec_k, rec_unsound, rec_sf);
    if (app.got_subcommand(ev))
      return run_eval(ev, ev_recon, ev_data, ev_recon_b, ev_out, ev_manifest);
    if (app.got_subcommand(ho))
      return run_heldout(ho, ho_data, ho_out, ho_manifest, ho_lambda, ho_k,
                         ho_fraction, ho_split_seed, ho_unsound, ho_sf);
    if (app.got_subcommand(cl))
      return run_cluster(cl, cl_recon, cl_data, cl_out, cl_manifest, cl_k,
                         cl_seed, cl_restarts);
    if (app.got_subcommand(ge))
      return run_geometry(ge, ge_data, ge_out, ge_manifest);
    if (app.got_subcommand(xl))
      return run_export_lp(xl, xl_data, xl_out, xl_manifest, xl_lambda, xl_k,
                           xl_unsound);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
