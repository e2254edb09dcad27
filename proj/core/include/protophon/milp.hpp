#pragma once

#include <map>
#include <string>
#include <vector>

#include "protophon/phonology.hpp"
#include "protophon/simplex.hpp"

namespace protophon {

// One character whose proto-initial is reconstructed jointly across
// varieties. Readings are keyed by variety index and may be sparse.
struct ReconstructionEntry {
  std::string id;
  std::string character;
  std::string category;      // optional grouping label, carried through
  std::string medial_class;  // optional; pairs with equal class get k_medial
  std::map<int, FeatureVector> readings;
};

// Spelling relation: the initial of x should match the initial of xu.
struct FanqiePair {
  std::string x, xu;
  bool medial_match = false;
};

struct ReconstructionProblem {
  std::vector<ReconstructionEntry> entries;
  std::vector<std::string> varieties;
  std::vector<FanqiePair> pairs;
  double lambda_fq = 0.5;  // pair terms get lambda, variety terms 1 - lambda
  double k_medial = 1.0;   // extra multiplier for medial-matching pairs

  void validate() const;
};

struct BigMConfig {
  double big_m = 10.0;
  double epsilon = 1e-3;  // strict-threshold slack for indicator rows
};

// Column layout of one entry: 14 feature columns, the low-sonority
// disjunction binary, three gate binaries thresholding labial, coronal and
// dorsal at 0.5, and sign-split binaries for the three {-1,0,1} dependents
// (labiodental, anterior, distributed).
struct EntryBlock {
  int f = 0;
  int w_low = 0;
  int b_gate[3] = {0, 0, 0};     // labial, coronal, dorsal
  int b_sign[3][2] = {{0, 0}, {0, 0}, {0, 0}};  // (plus, minus)
};

// Column layout of one objective term: 14 absolute-difference columns,
// one gate-exceeded binary per governing feature, and one product column
// per dependent feature.
struct TermBlock {
  enum class Kind { Variety, Pair };
  Kind kind = Kind::Variety;
  int entry_a = 0;
  int entry_b = -1;  // pair partner
  int variety = -1;
  double weight = 0;
  FeatureVector observed;  // variety terms only
  int t = 0;     // t .. t+13
  int chat = 0;  // chat .. chat+3: sonority, labial, coronal, dorsal
  int w = 0;     // w .. w+5 in dependent-feature order
};

struct MilpModel {
  lp::LpProblem problem;
  std::vector<int> binary_cols;  // columns constrained to {0,1}
  std::vector<EntryBlock> entries;
  std::vector<TermBlock> terms;
  std::vector<std::string> col_names, row_names;
};

// Encode the reconstruction as a mixed binary model whose objective equals
// the feature metric at integral solutions. The relaxation keeps every
// constraint linear: disjunctive sonority bounds, 0.5-threshold indicator
// rows and a McCormick envelope for gate * difference products.
MilpModel build_model(const ReconstructionProblem& rp, const BigMConfig& cfg = {});

// Proto vectors from a solution vector of the model.
std::vector<FeatureVector> extract_assignment(const MilpModel& mm,
                                              const std::vector<double>& x);

// Full feasible solution vector from integral proto vectors with valid
// feature combinations. Inverse of extract_assignment on the feature
// columns; auxiliary columns are set to the values the constraints force.
std::vector<double> lift_assignment(const MilpModel& mm,
                                    const std::vector<FeatureVector>& proto);

// Objective of the original weighted-distance problem at a proto assignment.
double exact_objective(const ReconstructionProblem& rp,
                       const std::vector<FeatureVector>& proto);

// c'x + c0 of the encoded model at any solution vector.
double model_objective(const MilpModel& mm, const std::vector<double>& x);

}  // namespace protophon
