#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "protophon/phonology.hpp"

namespace protophon {

struct Labeling {
  std::map<std::string, int> assignment;  // entry id -> label
  int k = 0;                              // labels are dense in [0, k)
  double wcss = 0.0;  // within-cluster sum of squares of the producing run

  void validate() const;  // throws Error unless labels are dense in [0, k)
};

// Lloyd iterations with kmeans++ seeding, best of `restarts` runs by WCSS.
// Restarts draw from streams forked off (seed, restart index) and may run
// concurrently; the result is schedule-independent. Convergence: centroid
// shift below 1e-8 or 500 iterations. Labels are canonicalized by first
// appearance in id order. Throws TooFewPoints when k exceeds the number of
// distinct vectors.
Labeling kmeans(const std::map<std::string, FeatureVector>& points, int k,
                std::uint64_t seed = 0, int restarts = 10);

// Reference labeling from categorical tags, labels in sorted tag order.
Labeling labels_from_categories(const std::map<std::string, std::string>& tags);

// Adjusted mutual information over the shared id set. Perfect agreement
// scores 1, independent labelings score near 0. The chance correction E[MI]
// is the exact permutation-model expectation, not a Monte Carlo estimate.
// A degenerate comparison (either side a single cluster) is defined as 0 and
// warned about. Throws IdMismatch unless the id sets coincide.
double ami(const Labeling& u, const Labeling& v);

// Building blocks, exposed so the expectation can be checked against a
// direct enumeration. Counts are cluster sizes; natural-log units.
double entropy(const std::vector<long>& counts);
double mutual_information(const std::vector<std::vector<long>>& table);
double expected_mutual_information(const std::vector<long>& row_sums,
                                   const std::vector<long>& col_sums);

// Two-column id<TAB>label text, one row per entry.
std::string labeling_to_tsv(const Labeling& L);
Labeling labeling_from_tsv(const std::string& text);

}  // namespace protophon
