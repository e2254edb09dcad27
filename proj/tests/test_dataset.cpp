#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "protophon/dataset.hpp"
#include "protophon/errors.hpp"
#include "protophon/phonology.hpp"
#include "protophon/synth.hpp"

using namespace protophon;

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "protophon_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void put(const fs::path& dir, const std::string& name,
         const std::string& body) {
  std::ofstream out(dir / name, std::ios::binary);
  out << body;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("generator output ingests as the equivalent problem") {
  GenerationConfig cfg;
  cfg.m_min = 6;
  cfg.m_max = 8;
  cfg.n_min = 3;
  cfg.n_max = 5;
  cfg.num_varieties = 4;
  cfg.p_fq = 0.2;
  cfg.p_dia = 0.3;
  cfg.p_char = 0.1;
  cfg.seed = 99;
  SyntheticDataset ds = generate(cfg);
  fs::path dir = fresh_dir("ingest_roundtrip");
  write_dataset(ds, dir.string());

  ReconstructionProblem got = ingest(dir.string());
  ReconstructionProblem want = problem_from_dataset(ds);

  REQUIRE(got.entries.size() == want.entries.size());
  CHECK(got.varieties == want.varieties);  // lexicographic == numeric for V<10
  for (std::size_t i = 0; i < want.entries.size(); ++i) {
    CHECK(got.entries[i].id == want.entries[i].id);
    CHECK(got.entries[i].character == want.entries[i].character);
    CHECK(got.entries[i].category == want.entries[i].category);
    REQUIRE(got.entries[i].readings.size() == want.entries[i].readings.size());
    for (const auto& [v, vec] : want.entries[i].readings)
      CHECK(got.entries[i].readings.at(v) == vec);
  }
  REQUIRE(got.pairs.size() == want.pairs.size());
  for (std::size_t i = 0; i < want.pairs.size(); ++i) {
    CHECK(got.pairs[i].x == want.pairs[i].x);
    CHECK(got.pairs[i].xu == want.pairs[i].xu);
    CHECK_FALSE(got.pairs[i].medial_match);
  }

  // allow_unsound only widens what is accepted
  ReconstructionProblem relaxed = ingest(dir.string(), true);
  CHECK(relaxed.entries.size() == got.entries.size());
}

TEST_CASE("medial classes mark matching pairs") {
  fs::path dir = fresh_dir("ingest_medial");
  put(dir, "entries.tsv",
      "e1\t甲\tlab\tI\n"
      "e2\t乙\tlab\tI\n"
      "e3\t丙\tcor\tII\n"
      "e4\t丁\tcor\t\n");
  put(dir, "variety_x.tsv", "e1\tp\ne2\tb\ne3\tt\ne4\td\n");
  put(dir, "pairs.tsv", "e1\te2\ne1\te3\ne1\te4\n");

  ReconstructionProblem prob = ingest(dir.string());
  REQUIRE(prob.pairs.size() == 3);
  CHECK(prob.pairs[0].medial_match);        // I == I
  CHECK_FALSE(prob.pairs[1].medial_match);  // I vs II
  CHECK_FALSE(prob.pairs[2].medial_match);  // empty never matches
  CHECK(prob.entries[0].category == "lab");
  CHECK(prob.entries[3].medial_class == "");
  CHECK(prob.varieties == std::vector<std::string>{"variety_x"});
}

TEST_CASE("two-column entries and absent pairs file are enough") {
  fs::path dir = fresh_dir("ingest_minimal");
  put(dir, "entries.tsv", "e1\t甲\ne2\t乙\n");
  put(dir, "variety_a.tsv", "e1\tm\ne2\tn\n");
  ReconstructionProblem prob = ingest(dir.string());
  CHECK(prob.pairs.empty());
  CHECK(prob.entries[0].readings.at(0) == parse_phoneme("m"));
}

TEST_CASE("a speller pair must reference defined entries") {
  fs::path dir = fresh_dir("ingest_dangling");
  put(dir, "entries.tsv", "e1\t甲\ne2\t乙\n");
  put(dir, "variety_a.tsv", "e1\tm\n");
  put(dir, "pairs.tsv", "e1\tghost\n");
  CHECK_THROWS_WITH_AS(ingest(dir.string()),
                       "speller pair references unknown entry id: \"ghost\"",
                       DanglingSpeller);
}

TEST_CASE("duplicate entry ids are rejected") {
  fs::path dir = fresh_dir("ingest_dup");
  put(dir, "entries.tsv", "e1\t甲\ne1\t乙\n");
  CHECK_THROWS_AS(ingest(dir.string()), DuplicateEntryId);
}

TEST_CASE("diagnostics carry file and line") {
  fs::path dir = fresh_dir("ingest_diag");
  put(dir, "entries.tsv", "e1\t甲\ne2\t乙\n");

  SUBCASE("unknown symbol") {
    put(dir, "variety_a.tsv", "e1\tm\ne2\tʘq!\n");
    CHECK_THROWS_WITH_AS(ingest(dir.string()),
                         "variety_a.tsv:2: unknown phoneme symbol: \"ʘq!\"",
                         ParseError);
  }
  SUBCASE("reading for an undefined entry") {
    put(dir, "variety_a.tsv", "nobody\tm\n");
    CHECK_THROWS_WITH_AS(ingest(dir.string()),
                         "variety_a.tsv:1: reading for unknown entry id "
                         "\"nobody\"",
                         ParseError);
  }
  SUBCASE("doubled reading") {
    put(dir, "variety_a.tsv", "e1\tm\ne1\tn\n");
    CHECK_THROWS_AS(ingest(dir.string()), ParseError);
  }
  SUBCASE("wrong field count") {
    put(dir, "variety_a.tsv", "e1\n");
    CHECK_THROWS_AS(ingest(dir.string()), ParseError);
  }
  SUBCASE("bad corruption marker") {
    put(dir, "variety_a.tsv", "e1\tm\n");
    put(dir, "pairs.tsv", "e1\te2\tmaybe\n");
    CHECK_THROWS_WITH_AS(ingest(dir.string()),
                         "pairs.tsv:1: corrupted flag must be 0 or 1",
                         ParseError);
  }
}

TEST_CASE("datasets with nothing to constrain are rejected") {
  fs::path dir = fresh_dir("ingest_empty");
  put(dir, "entries.tsv", "e1\t甲\ne2\t乙\n");
  CHECK_THROWS_AS(ingest(dir.string()), EmptyProblem);  // no readings, no pairs
  put(dir, "entries.tsv", "");
  CHECK_THROWS_AS(ingest(dir.string()), EmptyProblem);
}

TEST_CASE("held-out splits are deterministic and sized by the fraction") {
  std::vector<FanqiePair> pairs;
  for (int i = 0; i < 10; ++i)
    pairs.push_back({"x" + std::to_string(i), "u" + std::to_string(i), false});

  PairSplit a = split_pairs(pairs, 0.3, 7);
  PairSplit b = split_pairs(pairs, 0.3, 7);
  CHECK(a.held_out.size() == 3);
  CHECK(a.train.size() == 7);
  REQUIRE(b.held_out.size() == a.held_out.size());
  for (std::size_t i = 0; i < a.held_out.size(); ++i)
    CHECK(a.held_out[i].x == b.held_out[i].x);

  // both halves keep input order and partition the input
  std::size_t ti = 0, hi = 0;
  for (const FanqiePair& p : pairs) {
    if (ti < a.train.size() && a.train[ti].x == p.x)
      ++ti;
    else {
      REQUIRE(hi < a.held_out.size());
      CHECK(a.held_out[hi].x == p.x);
      ++hi;
    }
  }
  CHECK(ti == a.train.size());
  CHECK(hi == a.held_out.size());

  CHECK(split_pairs(pairs, 0.0, 3).held_out.empty());
  CHECK(split_pairs({}, 0.3, 3).train.empty());
  CHECK_THROWS_AS(split_pairs(pairs, 1.0, 0), InvalidWeight);
  CHECK_THROWS_AS(split_pairs(pairs, -0.1, 0), InvalidWeight);
}

TEST_CASE("each pair is held out at the requested rate") {
  std::vector<FanqiePair> pairs;
  for (int i = 0; i < 5; ++i)
    pairs.push_back({"x" + std::to_string(i), "u" + std::to_string(i), false});
  std::vector<int> held(5, 0);
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    PairSplit s = split_pairs(pairs, 0.4, seed);
    REQUIRE(s.held_out.size() == 2);
    for (const FanqiePair& p : s.held_out) ++held[p.x[1] - '0'];
  }
  for (int c : held) {
    CHECK(c > 690);  // 2000 draws at 0.4, 5 sigma
    CHECK(c < 910);
  }
}

TEST_CASE("reconstruction files round-trip exactly") {
  Reconstruction recon;
  recon["e1"] = parse_phoneme("m");
  recon["e2"] = parse_phoneme("tʃ");
  FeatureVector frac = parse_phoneme("p");
  frac.v[2] = 0.12345678901234567;
  frac.v[13] = -0.25;
  recon["e3"] = frac;

  fs::path dir = fresh_dir("recon_files");
  std::string path = (dir / "reconstruction.tsv").string();
  write_reconstruction(recon, path);
  Reconstruction back = read_reconstruction(path);
  REQUIRE(back.size() == recon.size());
  for (const auto& [id, vec] : recon) CHECK(back.at(id) == vec);

  // the advisory symbol column names the nearest chart member
  std::ifstream in(path);
  std::string first_line;
  std::getline(in, first_line);
  CHECK(first_line.substr(0, first_line.find('\t', 3)) == "e1\tm");

  put(dir, "bad.tsv", "e1\tm\t1\t2\n");
  CHECK_THROWS_AS(read_reconstruction((dir / "bad.tsv").string()), ParseError);
  put(dir, "dup.tsv",
      "e1\tm\t0\t0\t0\t0\t0\t0\t0\t0\t0\t0\t0\t0\t0\t0\n"
      "e1\tm\t0\t0\t0\t0\t0\t0\t0\t0\t0\t0\t0\t0\t0\t0\n");
  CHECK_THROWS_AS(read_reconstruction((dir / "dup.tsv").string()),
                  DuplicateEntryId);
  put(dir, "junk.tsv", "e1\tm\tx\t0\t0\t0\t0\t0\t0\t0\t0\t0\t0\t0\t0\t0\n");
  CHECK_THROWS_AS(read_reconstruction((dir / "junk.tsv").string()), ParseError);
}

}  // TEST_SUITE
