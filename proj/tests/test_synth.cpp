#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "protophon/errors.hpp"
#include "protophon/phonology.hpp"
#include "protophon/rng.hpp"
#include "protophon/synth.hpp"

using namespace protophon;

namespace {

GenerationConfig small_config(std::uint64_t seed) {
  GenerationConfig cfg;
  cfg.m_min = 8;
  cfg.m_max = 10;
  cfg.n_min = 3;
  cfg.n_max = 6;
  cfg.num_varieties = 5;
  cfg.seed = seed;
  return cfg;
}

void check_equal(const SyntheticDataset& a, const SyntheticDataset& b) {
  REQUIRE(a.system.initials.size() == b.system.initials.size());
  for (std::size_t i = 0; i < a.system.initials.size(); ++i) {
    CHECK(a.system.initials.entries[i].symbol ==
          b.system.initials.entries[i].symbol);
    CHECK(a.system.initials.entries[i].vector ==
          b.system.initials.entries[i].vector);
  }
  CHECK(a.system.characters == b.system.characters);
  REQUIRE(a.pairs.size() == b.pairs.size());
  for (std::size_t i = 0; i < a.pairs.size(); ++i) {
    CHECK(a.pairs[i].x == b.pairs[i].x);
    CHECK(a.pairs[i].xu == b.pairs[i].xu);
    CHECK(a.pairs[i].corrupted == b.pairs[i].corrupted);
  }
  CHECK(a.varieties == b.varieties);
}

std::map<std::string, int> per_initial_counts(const CharacterSystem& sys) {
  std::map<std::string, int> counts;
  for (const auto& [cid, init] : sys.characters) {
    (void)cid;
    ++counts[init];
  }
  return counts;
}

std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "protophon_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("same seed reproduces the dataset bit for bit") {
  GenerationConfig cfg = small_config(42);
  cfg.p_fq = 0.2;
  cfg.p_dia = 0.4;
  cfg.p_char = 0.1;
  check_equal(generate(cfg), generate(cfg));
}

TEST_CASE("sampled system honors both count ranges") {
  GenerationConfig cfg;  // paper-scale defaults: m in [35,40], n in [20,80]
  cfg.num_varieties = 2;
  cfg.seed = 7;
  SyntheticDataset ds = generate(cfg);
  CHECK(ds.system.initials.size() >= 35);
  CHECK(ds.system.initials.size() <= 40);
  std::map<std::string, int> counts = per_initial_counts(ds.system);
  CHECK(counts.size() == ds.system.initials.size());
  for (const auto& [init, n] : counts) {
    (void)init;
    CHECK(n >= 20);
    CHECK(n <= 80);
  }
}

TEST_CASE("named systems load fixed tables without sampling") {
  std::map<std::string, std::size_t> sizes = {
      {"english", 24}, {"german", 22}, {"mandarin", 22}, {"latin", 18}};
  for (const auto& [name, size] : sizes) {
    GenerationConfig cfg = small_config(3);
    cfg.system_source = name;
    Rng ra(1), rb(99);
    CharacterSystem a = sample_system(cfg, ra);
    CharacterSystem b = sample_system(cfg, rb);
    CHECK(a.initials.size() == size);
    // Different streams, same initial set: only character counts may move.
    REQUIRE(a.initials.size() == b.initials.size());
    for (std::size_t i = 0; i < a.initials.size(); ++i)
      CHECK(a.initials.entries[i].symbol == b.initials.entries[i].symbol);
  }
  GenerationConfig cfg = small_config(3);
  cfg.system_source = "mandarin";
  Rng rng(1);
  CharacterSystem sys = sample_system(cfg, rng);
  CHECK(sys.initials.contains(""));  // the zero initial
}

TEST_CASE("clean speller pairs share the ground-truth initial") {
  GenerationConfig cfg = small_config(11);
  cfg.p_fq = 0;
  SyntheticDataset ds = generate(cfg);
  CHECK(!ds.pairs.empty());
  for (const SpellerPair& p : ds.pairs) {
    CHECK(!p.corrupted);
    CHECK(p.x != p.xu);
    CHECK(ds.system.characters.at(p.x) == ds.system.characters.at(p.xu));
  }
}

TEST_CASE("fully corrupted pairs never share the initial") {
  GenerationConfig cfg = small_config(13);
  cfg.p_fq = 1;
  SyntheticDataset ds = generate(cfg);
  CHECK(!ds.pairs.empty());
  for (const SpellerPair& p : ds.pairs) {
    CHECK(p.corrupted);
    CHECK(ds.system.characters.at(p.x) != ds.system.characters.at(p.xu));
  }
}

TEST_CASE("corruption rate lands within binomial bounds") {
  GenerationConfig cfg;
  cfg.m_min = cfg.m_max = 10;
  cfg.n_min = cfg.n_max = 100;  // exactly 1000 characters
  cfg.num_varieties = 1;
  cfg.p_fq = 0.1;
  cfg.seed = 17;
  SyntheticDataset ds = generate(cfg);
  REQUIRE(ds.pairs.size() == 1000);
  int corrupted = 0;
  for (const SpellerPair& p : ds.pairs) corrupted += p.corrupted ? 1 : 0;
  CHECK(corrupted >= 72);   // 100 - 3 sqrt(90)
  CHECK(corrupted <= 131);  // 100 + 3 sqrt(90), rounded out
}

TEST_CASE("no change knobs means varieties equal ground truth") {
  GenerationConfig cfg = small_config(19);
  SyntheticDataset ds = generate(cfg);
  for (const VarietyReadings& readings : ds.varieties) {
    REQUIRE(readings.size() == ds.system.characters.size());
    for (const auto& [cid, sym] : readings)
      CHECK(sym == ds.system.characters.at(cid));
  }
}

TEST_CASE("pure regular change keeps initials coherent and moves them") {
  GenerationConfig cfg = small_config(23);
  cfg.p_dia = 1;
  SyntheticDataset ds = generate(cfg);
  for (const VarietyReadings& readings : ds.varieties) {
    std::map<std::string, std::string> reading_of;
    for (const auto& [cid, sym] : readings) {
      const std::string& init = ds.system.characters.at(cid);
      auto [it, inserted] = reading_of.emplace(init, sym);
      if (!inserted) CHECK(it->second == sym);  // regularity
      CHECK(sym != init);  // a redraw always changes the phoneme
    }
  }
}

TEST_CASE("regularity holds at intermediate dialect rates") {
  GenerationConfig cfg = small_config(29);
  cfg.p_dia = 0.5;
  SyntheticDataset ds = generate(cfg);
  for (const VarietyReadings& readings : ds.varieties) {
    std::map<std::string, std::string> reading_of;
    for (const auto& [cid, sym] : readings) {
      auto [it, inserted] =
          reading_of.emplace(ds.system.characters.at(cid), sym);
      if (!inserted) CHECK(it->second == sym);
    }
  }
}

TEST_CASE("regular-change count lands within binomial bounds") {
  GenerationConfig cfg;
  cfg.m_min = cfg.m_max = 38;
  cfg.n_min = cfg.n_max = 20;
  cfg.num_varieties = 20;
  cfg.p_dia = 0.3;
  cfg.seed = 31;
  SyntheticDataset ds = generate(cfg);
  int moved = 0;
  for (const VarietyReadings& readings : ds.varieties) {
    std::map<std::string, std::string> reading_of;
    for (const auto& [cid, sym] : readings)
      reading_of.emplace(ds.system.characters.at(cid), sym);
    for (const auto& [init, sym] : reading_of) moved += sym != init ? 1 : 0;
  }
  // Binomial(760, 0.3): mean 228, sigma = sqrt(159.6) = 12.6
  CHECK(moved >= 184);
  CHECK(moved <= 272);
}

TEST_CASE("every reading is a chart phoneme") {
  GenerationConfig cfg = small_config(37);
  cfg.p_dia = 0.6;
  cfg.p_char = 0.4;
  SyntheticDataset ds = generate(cfg);
  const PhonemeInventory& chart = full_inventory();
  for (const VarietyReadings& readings : ds.varieties)
    for (const auto& [cid, sym] : readings) {
      (void)cid;
      CHECK(chart.contains(sym));
      CHECK(soundness_distance(chart.at(sym)) == 0.0);
    }
}

TEST_CASE("replacement draws favor close phonemes unless uniform") {
  Rng rng(41);
  int close_weighted = 0, close_uniform = 0;
  const int trials = 2000;
  for (int i = 0; i < trials; ++i) {
    std::string w = draw_replacement("p", false, rng);
    CHECK(w != "p");
    if (w == "b" || w == "pʰ") ++close_weighted;
    std::string u = draw_replacement("p", true, rng);
    CHECK(u != "p");
    if (u == "b" || u == "pʰ") ++close_uniform;
  }
  CHECK(close_weighted > trials / 8);       // concentrated near the source
  CHECK(close_uniform < trials / 20);       // spread over all 188 candidates
}

TEST_CASE("dataset serialization round-trips and is byte-stable") {
  GenerationConfig cfg = small_config(43);
  cfg.p_fq = 0.3;
  cfg.p_dia = 0.25;
  cfg.p_char = 0.05;
  SyntheticDataset ds = generate(cfg);

  auto dir_a = fresh_dir("synth_a");
  auto dir_b = fresh_dir("synth_b");
  write_dataset(ds, dir_a.string());
  SyntheticDataset back = read_dataset(dir_a.string());
  check_equal(ds, back);

  // Regenerating from the stored manifest reproduces the dataset, and a
  // second write reproduces the files byte for byte.
  check_equal(ds, generate(back.config));
  write_dataset(back, dir_b.string());
  std::vector<std::string> files = {"entries.tsv", "pairs.tsv",
                                    "config.json"};
  for (int v = 0; v < cfg.num_varieties; ++v)
    files.push_back("variety_" + std::to_string(v) + ".tsv");
  for (const std::string& f : files) CHECK(slurp(dir_a / f) == slurp(dir_b / f));
}

TEST_CASE("config validation rejects bad inputs") {
  GenerationConfig cfg = small_config(1);
  cfg.p_dia = 1.5;
  CHECK_THROWS_AS(cfg.validate(), InvalidWeight);
  cfg = small_config(1);
  cfg.m_min = 12;
  cfg.m_max = 4;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = small_config(1);
  cfg.n_min = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = small_config(1);
  cfg.system_source = "klingon";
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = small_config(1);
  cfg.num_varieties = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = small_config(1);
  cfg.m_max = 100000;
  Rng rng(1);
  CHECK_THROWS_AS(sample_system(cfg, rng), InventoryTooSmall);
}

TEST_CASE("singleton initials cannot form clean pairs") {
  GenerationConfig cfg = small_config(47);
  cfg.n_min = cfg.n_max = 1;  // one character per initial
  cfg.p_fq = 0;
  SyntheticDataset ds = generate(cfg);
  CHECK(ds.pairs.empty());

  cfg.p_fq = 1;  // corruption borrows from other initials, so pairs exist
  ds = generate(cfg);
  CHECK(ds.pairs.size() == ds.system.characters.size());
}

}  // TEST_SUITE
