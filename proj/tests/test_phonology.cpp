#include "doctest.h"
#include "protophon/metric.hpp"
#include "protophon/phonology.hpp"
#include "protophon/rng.hpp"

#include <cmath>
#include <set>

using namespace protophon;

namespace {

FeatureVector vec(std::initializer_list<double> xs) {
  FeatureVector f;
  int i = 0;
  for (double x : xs) f[i++] = x;
  return f;
}

}  // namespace

TEST_SUITE("phonology") {

TEST_CASE("schema shape") {
  const FeatureSchema& s = schema();
  CHECK(s.independents.size() == 8);
  CHECK(s.dependents.size() == 6);
  CHECK(s.tau(kDelayedRelease) == kSonority);
  CHECK(s.tau(kLabiodental) == kLabial);
  CHECK(s.tau(kAnterior) == kCoronal);
  CHECK(s.tau(kDistributed) == kCoronal);
  CHECK(s.tau(kHigh) == kDorsal);
  CHECK(s.tau(kFront) == kDorsal);

  for (int k = 0; k < kFeatureCount; ++k) {
    CHECK(s.features[k].lo <= 0);  // every range contains 0
    CHECK(s.features[k].hi >= 0);
  }
  CHECK(s.features[kSonority].lo == 0);
  CHECK(s.features[kSonority].hi == 5);
  CHECK(s.features[kHigh].hi == 3);
  CHECK(s.features[kFront].hi == 3);
}

TEST_CASE("s_j equals max pairwise base distance over declared levels") {
  const FeatureSchema& s = schema();
  for (int j : s.dependents) {
    double sup = 0;
    for (double a : s.features[j].levels)
      for (double b : s.features[j].levels) sup = std::max(sup, base_distance(a, b));
    CHECK(s.features[j].s == sup);
  }
  CHECK(s.features[kDelayedRelease].s == 2);
  CHECK(s.features[kLabiodental].s == 2);
  CHECK(s.features[kAnterior].s == 2);
  CHECK(s.features[kDistributed].s == 2);
  CHECK(s.features[kHigh].s == 3);
  CHECK(s.features[kFront].s == 3);
}

TEST_CASE("parse m and f give the reference vectors") {
  // Order: continuant, delayed release, sonority, voice, spread glottis,
  // labial, labiodental, coronal, anterior, distributed, lateral, dorsal,
  // high, front.
  CHECK(parse_phoneme("m") ==
        vec({-1, 0, 2, 1, -1, 1, -1, -1, 0, 0, -1, -1, 0, 0}));
  CHECK(parse_phoneme("f") ==
        vec({1, 1, 1, -1, -1, 1, 1, -1, 0, 0, -1, -1, 0, 0}));
}

TEST_CASE("zero initial is the all-zero vector") {
  FeatureVector z = parse_phoneme("");
  CHECK(z.is_zero());
  CHECK(soundness_distance(z) == 0.0);
}

TEST_CASE("aspiration sets spread glottis") {
  FeatureVector t = parse_phoneme("t");
  FeatureVector th = parse_phoneme("tʰ");
  CHECK(t[kSpreadGlottis] == -1);
  CHECK(th[kSpreadGlottis] == 1);
  for (int k = 0; k < kFeatureCount; ++k)
    if (k != kSpreadGlottis) CHECK(t[k] == th[k]);
}

TEST_CASE("labialization and palatalization edit place features") {
  FeatureVector kw = parse_phoneme("kʷ");
  CHECK(kw[kLabial] == 1);
  CHECK(kw[kLabiodental] == -1);
  CHECK(kw[kDorsal] == 1);

  FeatureVector tj = parse_phoneme("tʲ");
  CHECK(tj[kDorsal] == 1);
  CHECK(tj[kHigh] == 3);
  CHECK(tj[kFront] == 3);
  CHECK(tj[kCoronal] == 1);

  // Palatalizing a velar reproduces the palatal stop.
  CHECK(parse_phoneme("kʲ") == parse_phoneme("c"));
}

TEST_CASE("unknown symbols and bad diacritic combinations throw") {
  CHECK_THROWS_AS(parse_phoneme("Q"), UnknownSymbol);
  CHECK_THROWS_AS(parse_phoneme("tʰʰ"), UnknownSymbol);
  CHECK_THROWS_AS(parse_phoneme("ʰ"), UnknownSymbol);
  CHECK_THROWS_AS(parse_phoneme("t!"), UnknownSymbol);
}

TEST_CASE("inventory entries are sound, distinct, and round-trip") {
  const PhonemeInventory& inv = full_inventory();
  CHECK(inv.size() >= 60);
  CHECK(inv.contains(""));

  std::set<std::array<double, kFeatureCount>> seen;
  for (const auto& e : inv.entries) {
    CHECK(soundness_distance(e.vector) == 0.0);
    CHECK(seen.insert(e.vector.v).second);  // no duplicate vectors
  }

  // parse ∘ nearest is the identity on inventory symbols.
  for (const auto& e : inv.entries) {
    CHECK(parse_phoneme(e.symbol) == e.vector);
    CHECK(nearest_phoneme(e.vector, inv) == e.symbol);
  }
}

TEST_CASE("nearest phoneme returns m for slightly perturbed m") {
  const PhonemeInventory& inv = full_inventory();
  FeatureVector v = parse_phoneme("m");
  v[kVoice] += 0.05;
  CHECK(nearest_phoneme(v, inv) == "m");
}

TEST_CASE("all-zero vector maps to the zero-initial entry") {
  const PhonemeInventory& inv = full_inventory();
  CHECK(nearest_phoneme(FeatureVector{}, inv) == "");
}

TEST_CASE("soundness distance of an off-table combination") {
  // labial = 1 with labiodental = 0 sits 1 away from both (1, ±1) rows.
  FeatureVector v = parse_phoneme("m");
  v[kLabiodental] = 0;
  CHECK(soundness_distance(v) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("inventory TSV round-trips") {
  const PhonemeInventory& inv = full_inventory();
  std::string tsv = inventory_to_tsv(inv);
  PhonemeInventory back = inventory_from_tsv(tsv);
  REQUIRE(back.size() == inv.size());
  for (std::size_t i = 0; i < inv.size(); ++i) {
    CHECK(back.entries[i].symbol == inv.entries[i].symbol);
    CHECK(back.entries[i].vector == inv.entries[i].vector);
  }
}

TEST_CASE("subset picks named symbols and rejects unknown ones") {
  const PhonemeInventory& inv = full_inventory();
  PhonemeInventory sub = inv.subset({"m", "f", "p"});
  CHECK(sub.size() == 3);
  CHECK(sub.contains("f"));
  CHECK_THROWS_AS(inv.subset({"zzz"}), UnknownSymbol);
}

}  // TEST_SUITE
