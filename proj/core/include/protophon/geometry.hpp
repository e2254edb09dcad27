#pragma once

#include <string>
#include <vector>

#include "protophon/eval.hpp"

namespace protophon {

// Pairwise fraction of shared characters whose initials differ. Entries live
// in [0,1], the diagonal is zero, and the fractions obey the triangle
// inequality; validate() asserts all three.
struct DisagreementMatrix {
  std::vector<std::string> names;
  std::vector<std::vector<double>> d;

  std::size_t size() const { return names.size(); }
  void validate() const;
};

// Builds the matrix over the characters every variety covers (their reading
// vectors compared exactly). Throws EmptyIntersection when no character is
// shared, Error on fewer than two varieties.
DisagreementMatrix disagreement(const std::vector<ReadingTable>& varieties,
                                const std::vector<std::string>& names = {});

struct Embedding {
  std::vector<std::vector<double>> points;  // one row per variety, dim <= n-1
  // Frobenius mass of the clamped negative spectrum; zero means the input
  // was Euclidean and pairwise distances are reproduced exactly.
  double distortion = 0.0;
};

// Classical multidimensional scaling: double-center the squared distances,
// eigendecompose (cyclic Jacobi, tolerance 1e-12), keep the non-negative
// spectrum. Never throws; non-Euclidean input shows up as distortion.
Embedding mds_embed(const DisagreementMatrix& D);

struct Ball {
  std::vector<double> center;
  double radius = 0.0;
};

// Exact smallest enclosing ball (Welzl recursion over a deterministically
// shuffled point order). The returned radius is the exact covering radius of
// the returned center. Throws Error on an empty set or mixed dimensions.
Ball min_enclosing_ball(const std::vector<std::vector<double>>& points);

// Radius of the smallest ball around all varieties in disagreement space:
// the empirical lower bound for the regular-change rate. Halves a single
// pairwise disagreement by construction.
double pdia_lower_bound(const std::vector<ReadingTable>& varieties);

// Square matrix with a variety-name header row and column.
std::string matrix_to_tsv(const DisagreementMatrix& D);
DisagreementMatrix matrix_from_tsv(const std::string& text);

}  // namespace protophon
