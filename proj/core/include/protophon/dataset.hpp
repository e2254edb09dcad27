#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "protophon/eval.hpp"
#include "protophon/milp.hpp"

namespace protophon {

// On-disk dataset layout, shared between the synthetic generator and
// hand-authored corpora:
//
//   entries.tsv          entry-id  character  [category]  [medial-class]
//   pairs.tsv            X  X_u  [corrupted-flag]        (optional file)
//   variety_<name>.tsv   entry-id  IPA-initial           (one per variety)
//
// Readings are parsed against the feature chart; the optional third pairs
// column is the generator's ground-truth corruption marker and is ignored
// here. Varieties are indexed by file name in lexicographic order.
//
// Diagnostics: ParseError (malformed rows, unknown symbols, with file and
// line), DuplicateEntryId, DanglingSpeller. Unless allow_unsound is set,
// a reading whose vector sits off the valid-combination table is rejected;
// today every chart symbol composes to a sound vector, so this only guards
// chart extensions.
ReconstructionProblem ingest(const std::string& dir,
                             bool allow_unsound = false);

// Pair-level held-out split: each pair lands in held_out with the given
// fraction, drawn uniformly without replacement. Both halves preserve the
// input order. Same (pairs, fraction, seed) gives the same split.
struct PairSplit {
  std::vector<FanqiePair> train;
  std::vector<FanqiePair> held_out;
};
PairSplit split_pairs(const std::vector<FanqiePair>& pairs, double fraction,
                      std::uint64_t seed);

// Raw symbol tables of the variety files, in lexicographic file order.
// Symbols must parse; ids need not appear in entries.tsv, so disagreement
// geometry can run on reading files alone.
struct VarietyTables {
  std::vector<std::string> names;
  std::vector<ReadingTable> tables;
};
VarietyTables read_varieties(const std::string& dir);

// reconstruction.tsv: entry-id, nearest chart symbol, then the 14 feature
// values. The symbol column is advisory; read_reconstruction trusts the
// numbers.
void write_reconstruction(const Reconstruction& recon, const std::string& path);
Reconstruction read_reconstruction(const std::string& path);

}  // namespace protophon
