#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "protophon/phonology.hpp"

namespace protophon {

// Keyed reconstruction output; the same shape doubles as the ground truth.
using Reconstruction = std::map<std::string, FeatureVector>;

// One variety's readings, entry id -> IPA initial. Structurally identical to
// synth's VarietyReadings, so generated data plugs in directly.
using ReadingTable = std::map<std::string, std::string>;

struct EvalReport {
  double avg_l1 = 0.0;
  double equal_rate = 0.0;
  double sound_rate = 0.0;
  long n_entries = 0;

  // Held-out block. n_pairs == 0 means no pairs were scored.
  double matching_rate = 0.0;
  double avg_l2 = 0.0;
  long n_pairs = 0;
};

// Fraction of entries whose reconstruction sits within L1 1e-4 of the truth.
// Throws IdMismatch unless both maps cover exactly the same ids.
double equal_rate(const Reconstruction& recon, const Reconstruction& truth);

double average_l1(const Reconstruction& recon, const Reconstruction& truth);

// Fraction of vectors that are valid phoneme encodings (soundness < 1e-4).
double sound_rate(const Reconstruction& recon);

// Held-out speller check: (fraction of pairs whose two reconstructions agree
// within L2 1e-4, mean pair L2). Throws IdMismatch on an unreconstructed id.
std::pair<double, double> matching_rate(
    const Reconstruction& recon,
    const std::vector<std::pair<std::string, std::string>>& pairs);

// Baselines. Per entry, the modal IPA reading (ties: lexicographically
// smallest symbol) or the coordinate-wise modal feature value (ties: smaller
// value). The feature-level vote can land off the phoneme chart; that is the
// behavior the sound-rate comparison is designed to expose.
Reconstruction majority_vote_ipa(const std::vector<ReadingTable>& varieties);
Reconstruction majority_vote_feature(const std::vector<ReadingTable>& varieties);

// Pooled two-proportion z statistic for success rates sr1 (n1 trials) vs sr2
// (n2 trials). Throws DegeneratePool when the pooled rate is 0 or 1.
double two_proportion_z(double sr1, long n1, double sr2, long n2);

EvalReport evaluate(const Reconstruction& recon, const Reconstruction& truth);
EvalReport evaluate(const Reconstruction& recon, const Reconstruction& truth,
                    const std::vector<std::pair<std::string, std::string>>& held_out);

// Two-line tab-separated table / key=value lines. Both byte-stable.
std::string render_report_tsv(const EvalReport& r);
std::string render_report_keyvalue(const EvalReport& r);

}  // namespace protophon
