#pragma once

#include <string>
#include <vector>

#include "protophon/milp.hpp"

namespace protophon {

// Renders the model as CPLEX-style LP text: Minimize / Subject To / Bounds /
// Binaries / End. Names come from the model (defaults x<j> / c<i> when the
// model carries none) and the output is byte-stable for a given model.
// The format has no ranged constraints, so a row with two finite distinct
// bounds is split into `<name>_lo` (>=) and `<name>_hi` (<=) written
// adjacently; parse_lp recognizes that shape and folds it back. Rows with
// no finite bound at all are not representable and raise Error.
std::string export_lp(const MilpModel& m);

struct ParsedLp {
  lp::LpProblem problem;
  std::vector<int> binary_cols;
  std::vector<std::string> col_names, row_names;
};

// Parses what export_lp emits plus the usual latitude of hand-written LP
// files: `\` comments, implicit unit coefficients, constants folded into
// the right-hand side, default [0, +inf) bounds, `free`, and infinities.
// Column order follows the Bounds section where present so that a
// round-trip reproduces the exporting model's column order; names first
// seen in expressions are appended after. Throws ParseError on malformed
// input; only minimization is accepted.
ParsedLp parse_lp(const std::string& text);

}  // namespace protophon
