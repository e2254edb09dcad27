#include "protophon/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "protophon/errors.hpp"
#include "io_util.hpp"
#include "protophon/metric.hpp"

namespace protophon {

namespace {

bool is_probability(double p) { return p >= 0 && p <= 1; }

const std::vector<std::string>& named_table(const std::string& name) {
  // Core consonant systems restricted to what the chart carries (no trills
  // or taps, so the rhotics surface as approximants).
  static const std::vector<std::string> english = {
      "p", "b", "t", "d", "k", "ɡ", "tʃ", "dʒ", "m", "n", "ŋ", "f",
      "v", "θ", "ð", "s", "z", "ʃ", "ʒ", "h", "l", "ɹ", "j", "w"};
  static const std::vector<std::string> german = {
      "p", "b", "t", "d", "k", "ɡ", "pf", "ts", "m", "n", "ŋ",
      "f", "v", "s", "z", "ʃ", "ç", "x", "ʁ", "h", "l", "j"};
  static const std::vector<std::string> mandarin = {
      "p", "pʰ", "t", "tʰ", "k", "kʰ", "ts", "tsʰ", "ʈʂ", "ʈʂʰ", "tɕ",
      "tɕʰ", "m", "n", "f", "s", "ʂ", "ɕ", "x", "l", "ʐ", ""};
  static const std::vector<std::string> latin = {
      "p", "b", "t", "d", "k", "ɡ", "kʷ", "ɡʷ", "m",
      "n", "f", "s", "z", "h", "l", "ɹ", "w", "j"};
  if (name == "english") return english;
  if (name == "german") return german;
  if (name == "mandarin") return mandarin;
  if (name == "latin") return latin;
  throw Error("unknown system source '" + name + "'");
}

std::string character_id(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "c%05d", index);
  return buf;
}

}  // namespace

void GenerationConfig::validate() const {
  if (m_min < 1 || m_min > m_max) throw Error("initial count range is empty");
  if (n_min < 1 || n_min > n_max)
    throw Error("characters-per-initial range is empty");
  if (num_varieties < 1) throw Error("need at least one variety");
  if (!is_probability(p_fq) || !is_probability(p_dia) || !is_probability(p_char))
    throw InvalidWeight("p_fq, p_dia and p_char must lie in [0, 1]");
  if (system_source != "sampled") named_table(system_source);
}

CharacterSystem sample_system(const GenerationConfig& cfg, Rng& rng) {
  cfg.validate();
  const PhonemeInventory& chart = full_inventory();
  CharacterSystem sys;
  if (cfg.system_source == "sampled") {
    if (chart.size() < static_cast<std::size_t>(cfg.m_max))
      throw InventoryTooSmall("chart has " + std::to_string(chart.size()) +
                              " phonemes, need " + std::to_string(cfg.m_max));
    int m = static_cast<int>(rng.uniform_int(cfg.m_min, cfg.m_max));
    std::vector<std::size_t> idx(chart.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::vector<std::string> symbols;
    for (int i = 0; i < m; ++i) {
      std::size_t j =
          static_cast<std::size_t>(i) +
          rng.uniform_index(idx.size() - static_cast<std::size_t>(i));
      std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
      symbols.push_back(chart.entries[idx[static_cast<std::size_t>(i)]].symbol);
    }
    sys.initials = chart.subset(symbols);
  } else {
    sys.initials = chart.subset(named_table(cfg.system_source));
  }

  int next = 0;
  for (const auto& init : sys.initials.entries) {
    int n = static_cast<int>(rng.uniform_int(cfg.n_min, cfg.n_max));
    for (int i = 0; i < n; ++i) sys.characters[character_id(next++)] = init.symbol;
  }
  return sys;
}

std::vector<SpellerPair> derive_fanqie(const CharacterSystem& sys, double p_fq,
                                       Rng& rng) {
  if (!is_probability(p_fq)) throw InvalidWeight("p_fq must lie in [0, 1]");
  std::unordered_map<std::string, std::vector<std::string>> members;
  for (const auto& [cid, init] : sys.characters) members[init].push_back(cid);

  std::vector<SpellerPair> pairs;
  for (const auto& [cid, init] : sys.characters) {
    bool corrupt = rng.bernoulli(p_fq);
    std::string xu;
    if (!corrupt) {
      const std::vector<std::string>& sibs = members.at(init);
      if (sibs.size() < 2) continue;  // no distinct same-initial speller
      // Draw over the full sibling list minus self via index shifting.
      std::size_t pick = rng.uniform_index(sibs.size() - 1);
      std::size_t self = static_cast<std::size_t>(
          std::lower_bound(sibs.begin(), sibs.end(), cid) - sibs.begin());
      xu = sibs[pick >= self ? pick + 1 : pick];
    } else {
      std::vector<const std::vector<std::string>*> other_members;
      for (const auto& entry : sys.initials.entries)
        if (entry.symbol != init) {
          auto it = members.find(entry.symbol);
          if (it != members.end()) other_members.push_back(&it->second);
        }
      if (other_members.empty()) continue;  // nowhere to corrupt to
      const auto& chosen =
          *other_members[rng.uniform_index(other_members.size())];
      xu = chosen[rng.uniform_index(chosen.size())];
    }
    pairs.push_back({cid, xu, corrupt});
  }
  return pairs;
}

std::string draw_replacement(const std::string& source, bool uniform, Rng& rng) {
  const PhonemeInventory& chart = full_inventory();
  const FeatureVector& from = chart.at(source);
  std::vector<double> weights;
  weights.reserve(chart.size());
  for (const auto& entry : chart.entries) {
    if (entry.symbol == source) {
      weights.push_back(0);  // a change must change something
    } else {
      weights.push_back(uniform ? 1.0
                                : std::exp(-l1_distance(from, entry.vector)));
    }
  }
  return chart.entries[rng.weighted_index(weights)].symbol;
}

std::vector<VarietyReadings> generate_varieties(const CharacterSystem& sys,
                                                const GenerationConfig& cfg,
                                                Rng& rng) {
  cfg.validate();
  std::vector<VarietyReadings> out;
  for (int v = 0; v < cfg.num_varieties; ++v) {
    std::map<std::string, std::string> shifted;
    for (const auto& init : sys.initials.entries)
      shifted[init.symbol] = rng.bernoulli(cfg.p_dia)
                                 ? draw_replacement(init.symbol,
                                                    cfg.uniform_change, rng)
                                 : init.symbol;
    VarietyReadings readings;
    for (const auto& [cid, init] : sys.characters) {
      const std::string& base = shifted.at(init);
      readings[cid] = rng.bernoulli(cfg.p_char)
                          ? draw_replacement(base, cfg.uniform_change, rng)
                          : base;
    }
    out.push_back(std::move(readings));
  }
  return out;
}

SyntheticDataset generate(const GenerationConfig& cfg) {
  cfg.validate();
  SyntheticDataset ds;
  ds.config = cfg;
  Rng root(cfg.seed);
  // Forked streams per phase: tweaking one phase's parameters cannot shift
  // the draws of another.
  Rng sys_rng = root.fork(1);
  Rng fq_rng = root.fork(2);
  Rng var_rng = root.fork(3);
  ds.system = sample_system(cfg, sys_rng);
  ds.pairs = derive_fanqie(ds.system, cfg.p_fq, fq_rng);
  ds.varieties = generate_varieties(ds.system, cfg, var_rng);
  return ds;
}

using detail::read_file;
using detail::write_file;

void write_dataset(const SyntheticDataset& ds, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  // entries.tsv doubles as the ground truth: the category column carries the
  // initial each character was generated from, so the directory is directly
  // ingestable as a reconstruction problem.
  std::string gt;
  for (const auto& [cid, init] : ds.system.characters)
    gt += cid + "\t" + cid + "\t" + init + "\n";
  write_file(fs::path(dir) / "entries.tsv", gt);

  std::string pr;
  for (const SpellerPair& p : ds.pairs)
    pr += p.x + "\t" + p.xu + "\t" + (p.corrupted ? "1" : "0") + "\n";
  write_file(fs::path(dir) / "pairs.tsv", pr);

  for (std::size_t v = 0; v < ds.varieties.size(); ++v) {
    std::string body;
    for (const auto& [cid, sym] : ds.varieties[v]) body += cid + "\t" + sym + "\n";
    write_file(fs::path(dir) / ("variety_" + std::to_string(v) + ".tsv"), body);
  }

  nlohmann::ordered_json manifest;
  const GenerationConfig& c = ds.config;
  manifest["m_min"] = c.m_min;
  manifest["m_max"] = c.m_max;
  manifest["n_min"] = c.n_min;
  manifest["n_max"] = c.n_max;
  manifest["num_varieties"] = c.num_varieties;
  manifest["p_fq"] = c.p_fq;
  manifest["p_dia"] = c.p_dia;
  manifest["p_char"] = c.p_char;
  manifest["seed"] = c.seed;
  manifest["system_source"] = c.system_source;
  manifest["uniform_change"] = c.uniform_change;
  write_file(fs::path(dir) / "config.json", manifest.dump(2) + "\n");
}

SyntheticDataset read_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  SyntheticDataset ds;

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(fs::path(dir) / "config.json"));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("config.json: " + std::string(e.what()));
  }
  GenerationConfig& c = ds.config;
  try {
    c.m_min = manifest.at("m_min").get<int>();
    c.m_max = manifest.at("m_max").get<int>();
    c.n_min = manifest.at("n_min").get<int>();
    c.n_max = manifest.at("n_max").get<int>();
    c.num_varieties = manifest.at("num_varieties").get<int>();
    c.p_fq = manifest.at("p_fq").get<double>();
    c.p_dia = manifest.at("p_dia").get<double>();
    c.p_char = manifest.at("p_char").get<double>();
    c.seed = manifest.at("seed").get<std::uint64_t>();
    c.system_source = manifest.at("system_source").get<std::string>();
    c.uniform_change = manifest.at("uniform_change").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("config.json: " + std::string(e.what()));
  }
  c.validate();

  const PhonemeInventory& chart = full_inventory();
  std::vector<std::string> initial_symbols;
  for (const auto& row : detail::parse_tsv_rows(
           read_file(fs::path(dir) / "entries.tsv"), "entries.tsv", 3, 3)) {
    if (!chart.contains(row.cells[2])) throw UnknownSymbol(row.cells[2]);
    if (!ds.system.characters.emplace(row.cells[0], row.cells[2]).second)
      throw DuplicateEntryId(row.cells[0]);
    initial_symbols.push_back(row.cells[2]);
  }
  std::sort(initial_symbols.begin(), initial_symbols.end());
  initial_symbols.erase(
      std::unique(initial_symbols.begin(), initial_symbols.end()),
      initial_symbols.end());
  ds.system.initials = chart.subset(initial_symbols);

  for (const auto& row : detail::parse_tsv_rows(
           read_file(fs::path(dir) / "pairs.tsv"), "pairs.tsv", 3, 3)) {
    if (row.cells[2] != "0" && row.cells[2] != "1")
      throw ParseError("corrupted flag must be 0 or 1", "pairs.tsv", row.line);
    ds.pairs.push_back({row.cells[0], row.cells[1], row.cells[2] == "1"});
  }

  for (int v = 0; v < c.num_varieties; ++v) {
    std::string name = "variety_" + std::to_string(v) + ".tsv";
    VarietyReadings readings;
    for (const auto& row :
         detail::parse_tsv_rows(read_file(fs::path(dir) / name), name, 2, 2)) {
      if (!chart.contains(row.cells[1])) throw UnknownSymbol(row.cells[1]);
      readings[row.cells[0]] = row.cells[1];
    }
    ds.varieties.push_back(std::move(readings));
  }
  return ds;
}

ReconstructionProblem problem_from_dataset(const SyntheticDataset& ds,
                                           double lambda_fq) {
  const PhonemeInventory& chart = full_inventory();
  ReconstructionProblem p;
  p.lambda_fq = lambda_fq;
  for (std::size_t v = 0; v < ds.varieties.size(); ++v)
    p.varieties.push_back("variety_" + std::to_string(v));
  for (const auto& [cid, init] : ds.system.characters) {
    ReconstructionEntry e;
    e.id = cid;
    e.character = cid;
    e.category = init;
    for (std::size_t v = 0; v < ds.varieties.size(); ++v) {
      auto it = ds.varieties[v].find(cid);
      if (it == ds.varieties[v].end())
        throw IdMismatch("variety " + std::to_string(v) +
                         " has no reading for \"" + cid + "\"");
      e.readings[static_cast<int>(v)] = chart.at(it->second);
    }
    p.entries.push_back(std::move(e));
  }
  for (const SpellerPair& sp : ds.pairs) p.pairs.push_back({sp.x, sp.xu, false});
  return p;
}

}  // namespace protophon
