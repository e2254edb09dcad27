#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "protophon/errors.hpp"

namespace protophon {

inline constexpr int kFeatureCount = 14;

// Canonical feature order. Dependent (D-) features sit right after the
// independent (I-) feature that governs them, which is also the order the
// serialized tables use.
enum Feat : int {
  kContinuant = 0,
  kDelayedRelease,  // D, governed by sonority
  kSonority,
  kVoice,
  kSpreadGlottis,
  kLabial,
  kLabiodental,  // D, governed by labial
  kCoronal,
  kAnterior,     // D, governed by coronal
  kDistributed,  // D, governed by coronal
  kLateral,
  kDorsal,
  kHigh,   // D, governed by dorsal
  kFront,  // D, governed by dorsal
};

// One phoneme as a point in feature space. Zero-initialized = the zero
// initial (the empty syllable onset), which is a legal phoneme.
struct FeatureVector {
  std::array<double, kFeatureCount> v{};

  double& operator[](int i) { return v[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return v[static_cast<std::size_t>(i)]; }
  bool operator==(const FeatureVector&) const = default;
  bool is_zero() const {
    for (double x : v)
      if (x != 0) return false;
    return true;
  }
};

struct FeatureDef {
  const char* name;
  double lo, hi;               // declared range; always contains 0
  std::vector<double> levels;  // attested discrete values incl. 0
  int tau;                     // governing I-feature index; -1 if independent
  double s;                    // sup of |x-y| over the range; D-features only
};

// (I-feature value, D-feature value) combination that well-formed phonemes
// may take. Everything else is off-table and scores positive soundness.
struct ValidCombo {
  double i_value;
  double d_value;
};

struct FeatureSchema {
  std::array<FeatureDef, kFeatureCount> features;
  // Per D-feature: the attested (tau value, own value) combinations.
  std::array<std::vector<ValidCombo>, kFeatureCount> valid_combos;
  std::vector<int> independents;  // 8 entries
  std::vector<int> dependents;    // 6 entries

  bool is_dependent(int j) const { return features[static_cast<std::size_t>(j)].tau >= 0; }
  int tau(int j) const { return features[static_cast<std::size_t>(j)].tau; }
  double span(int j) const {
    const FeatureDef& f = features[static_cast<std::size_t>(j)];
    return f.hi - f.lo;
  }
};

FeatureSchema build_schema();

// Process-wide schema instance; the feature system is fixed.
const FeatureSchema& schema();

struct PhonemeInventory {
  struct Entry {
    std::string symbol;
    FeatureVector vector;
  };

  // Sorted by symbol (byte-wise), unique symbols, unique vectors.
  std::vector<Entry> entries;

  std::size_t size() const { return entries.size(); }
  bool contains(const std::string& symbol) const;
  const FeatureVector& at(const std::string& symbol) const;  // throws UnknownSymbol

  // Subset by symbol list; throws UnknownSymbol on a miss.
  PhonemeInventory subset(const std::vector<std::string>& symbols) const;
};

// The checked-in chart: pulmonic consonants (no taps, flaps or trills),
// common affricates, single diacritics ʰ (obstruents) / ʷ / ʲ, and the zero
// initial under the empty symbol. Entries whose derived vector collides with
// an earlier one are dropped, so e.g. kʲ is subsumed by c.
const PhonemeInventory& full_inventory();

// IPA -> features. Grammar: base consonant (or empty string for the zero
// initial) followed by distinct diacritics among ʰ ʷ ʲ. Throws UnknownSymbol.
FeatureVector parse_phoneme(const std::string& ipa);

// Nearest inventory symbol under the reconstruction metric; ties broken by
// lexicographic symbol order. Throws Error on an empty inventory.
const std::string& nearest_phoneme(const FeatureVector& v, const PhonemeInventory& inv);

// Sum over D-features of the L1 distance from (tau value, own value) to the
// nearest valid combination. Zero exactly on well-formed phonemes.
double soundness_distance(const FeatureVector& v);

// TSV round trip: header "symbol<TAB>feature names...", one row per entry.
std::string inventory_to_tsv(const PhonemeInventory& inv);
PhonemeInventory inventory_from_tsv(const std::string& text);

}  // namespace protophon
