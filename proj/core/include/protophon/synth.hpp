#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "protophon/milp.hpp"
#include "protophon/phonology.hpp"
#include "protophon/rng.hpp"

namespace protophon {

struct GenerationConfig {
  int m_min = 35, m_max = 40;  // sampled initial count interval
  int n_min = 20, n_max = 80;  // characters per initial interval
  int num_varieties = 20;
  double p_fq = 0;    // fraction of speller pairs with a corrupted upper
  double p_dia = 0;   // per (variety, initial) regular-change probability
  double p_char = 0;  // per character irregular-change probability
  std::uint64_t seed = 0;
  // "sampled", or one of the checked-in consonant tables:
  // english, german, mandarin, latin.
  std::string system_source = "sampled";
  bool uniform_change = false;  // redraw uniformly instead of by closeness

  void validate() const;
};

// Step-1 output: the ground-truth initial set and the character table.
// Initial ids are the IPA symbols themselves.
struct CharacterSystem {
  PhonemeInventory initials;
  std::map<std::string, std::string> characters;  // character-id -> initial
};

struct SpellerPair {
  std::string x, xu;
  bool corrupted = false;
};

// character-id -> reading symbol, always a full-inventory member
using VarietyReadings = std::map<std::string, std::string>;

struct SyntheticDataset {
  GenerationConfig config;
  CharacterSystem system;
  std::vector<SpellerPair> pairs;
  std::vector<VarietyReadings> varieties;
};

// Uniform sample without replacement of m initials from the full chart, or
// the fixed table for a named system; either way each initial gets
// Uniform(n_range) characters. Throws InventoryTooSmall when the chart
// cannot supply max(m_range) initials.
CharacterSystem sample_system(const GenerationConfig& cfg, Rng& rng);

// One upper speller per character: a different character of the same
// initial, or with probability p_fq a character of a uniformly chosen
// different initial (corrupted). Characters with no legal choice in the
// drawn branch are skipped.
std::vector<SpellerPair> derive_fanqie(const CharacterSystem& sys, double p_fq,
                                       Rng& rng);

// Two-level change: per (variety, initial) the reading shifts with
// probability p_dia, then per character with probability p_char, both
// redrawn via draw_replacement from the full chart.
std::vector<VarietyReadings> generate_varieties(const CharacterSystem& sys,
                                                const GenerationConfig& cfg,
                                                Rng& rng);

// Replacement target for `source`: never the source itself; weighted by
// exp(-L1 distance) so change lands on close phonemes, or uniform when
// `uniform` is set.
std::string draw_replacement(const std::string& source, bool uniform, Rng& rng);

// Full pipeline. Phases draw from forked streams, so e.g. changing p_fq
// leaves the variety draws untouched. Same config, bit-identical dataset.
SyntheticDataset generate(const GenerationConfig& cfg);

// TSV + manifest serialization: entries.tsv, pairs.tsv, variety_<v>.tsv
// and config.json under dir, in the shared dataset layout (see
// dataset.hpp). Byte-stable for a given dataset;
// read_dataset(write_dataset(ds)) reproduces ds exactly.
void write_dataset(const SyntheticDataset& ds, const std::string& dir);
SyntheticDataset read_dataset(const std::string& dir);

// Bridges a dataset into solver input: one entry per character carrying its
// per-variety feature vectors, one relation per speller pair. The true
// initial rides along as the entry category so cluster scoring can use it.
ReconstructionProblem problem_from_dataset(const SyntheticDataset& ds,
                                           double lambda_fq = 0.5);

}  // namespace protophon
