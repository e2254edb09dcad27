#pragma once

#include <stdexcept>
#include <string>

namespace protophon {

// Base for everything thrown by the library. CLI maps these to exit code 2
// (validation / input problems); solver infeasibility travels through
// Solution::status instead and maps to exit code 3.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An IPA string that is not a known base consonant plus supported diacritics.
struct UnknownSymbol : Error {
  explicit UnknownSymbol(const std::string& sym)
      : Error("unknown phoneme symbol: \"" + sym + "\"") {}
};

// Malformed input file content. Carries file and 1-based line when known.
struct ParseError : Error {
  ParseError(const std::string& what, const std::string& file, long line)
      : Error(file + ":" + std::to_string(line) + ": " + what) {}
  explicit ParseError(const std::string& what) : Error(what) {}
};

// Id sets of two collections that must match do not.
struct IdMismatch : Error {
  using Error::Error;
};

struct EmptyProblem : Error {
  using Error::Error;
};

struct InvalidWeight : Error {
  using Error::Error;
};

// Enumeration or model construction would exceed a hard size cap.
struct TooLarge : Error {
  using Error::Error;
};

// Model handed to the branch-and-bound solver exceeds its variable cap.
struct ModelTooLarge : Error {
  using Error::Error;
};

struct InventoryTooSmall : Error {
  using Error::Error;
};

struct DuplicateEntryId : Error {
  explicit DuplicateEntryId(const std::string& id)
      : Error("duplicate entry id: \"" + id + "\"") {}
};

struct EmptyIntersection : Error {
  using Error::Error;
};

// Pooled success rate of a two-proportion z-test is 0 or 1, so the statistic
// has no variance. Callers that prefer a number over an exception report the
// comparison as +inf alongside a warning.
struct DegeneratePool : Error {
  using Error::Error;
};

// KMeans asked for more clusters than there are distinct points.
struct TooFewPoints : Error {
  using Error::Error;
};

// A speller pair references an entry id that was never defined.
struct DanglingSpeller : Error {
  explicit DanglingSpeller(const std::string& id)
      : Error("speller pair references unknown entry id: \"" + id + "\"") {}
};

}  // namespace protophon
