#include "protophon/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "io_util.hpp"
#include "protophon/errors.hpp"
#include "protophon/phonology.hpp"
#include "protophon/rng.hpp"

namespace protophon {

namespace fs = std::filesystem;

namespace {

std::string fmt(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

double parse_double(const std::string& s, const std::string& file, int line) {
  double x = 0;
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, x);
  if (ec != std::errc() || p != e)
    throw ParseError("bad number \"" + s + "\"", file, line);
  return x;
}

}  // namespace

ReconstructionProblem ingest(const std::string& dir, bool allow_unsound) {
  ReconstructionProblem prob;
  std::unordered_map<std::string, std::size_t> index;

  for (const auto& row : detail::parse_tsv_rows(
           detail::read_file(fs::path(dir) / "entries.tsv"), "entries.tsv", 2,
           4)) {
    ReconstructionEntry e;
    e.id = row.cells[0];
    e.character = row.cells[1];
    if (row.cells.size() > 2) e.category = row.cells[2];
    if (row.cells.size() > 3) e.medial_class = row.cells[3];
    if (!index.emplace(e.id, prob.entries.size()).second)
      throw DuplicateEntryId(e.id);
    prob.entries.push_back(std::move(e));
  }

  // Variety files are keyed by name; sorting pins the index order no matter
  // how the directory iterates.
  std::vector<std::string> variety_files;
  for (const auto& de : fs::directory_iterator(dir)) {
    std::string name = de.path().filename().string();
    if (name.rfind("variety_", 0) == 0 && name.size() > 12 &&
        name.compare(name.size() - 4, 4, ".tsv") == 0)
      variety_files.push_back(name);
  }
  std::sort(variety_files.begin(), variety_files.end());

  for (const std::string& file : variety_files) {
    int v = static_cast<int>(prob.varieties.size());
    prob.varieties.push_back(file.substr(0, file.size() - 4));
    for (const auto& row : detail::parse_tsv_rows(
             detail::read_file(fs::path(dir) / file), file, 2, 2)) {
      auto it = index.find(row.cells[0]);
      if (it == index.end())
        throw ParseError("reading for unknown entry id \"" + row.cells[0] +
                             "\"",
                         file, row.line);
      ReconstructionEntry& e = prob.entries[it->second];
      if (e.readings.count(v))
        throw ParseError("duplicate reading for entry id \"" + row.cells[0] +
                             "\"",
                         file, row.line);
      FeatureVector vec;
      try {
        vec = parse_phoneme(row.cells[1]);
      } catch (const UnknownSymbol& u) {
        throw ParseError(std::string(u.what()), file, row.line);
      }
      if (!allow_unsound && soundness_distance(vec) > 1e-9)
        throw ParseError("unsound reading \"" + row.cells[1] +
                             "\" (pass allow_unsound to keep it)",
                         file, row.line);
      e.readings.emplace(v, vec);
    }
  }

  if (fs::exists(fs::path(dir) / "pairs.tsv")) {
    for (const auto& row : detail::parse_tsv_rows(
             detail::read_file(fs::path(dir) / "pairs.tsv"), "pairs.tsv", 2,
             3)) {
      for (int side = 0; side < 2; ++side)
        if (!index.count(row.cells[side]))
          throw DanglingSpeller(row.cells[side]);
      if (row.cells.size() > 2 && row.cells[2] != "0" && row.cells[2] != "1")
        throw ParseError("corrupted flag must be 0 or 1", "pairs.tsv",
                         row.line);
      FanqiePair p;
      p.x = row.cells[0];
      p.xu = row.cells[1];
      const std::string& mx = prob.entries[index[p.x]].medial_class;
      const std::string& mu = prob.entries[index[p.xu]].medial_class;
      p.medial_match = !mx.empty() && mx == mu;
      prob.pairs.push_back(std::move(p));
    }
  }

  prob.validate();
  return prob;
}

PairSplit split_pairs(const std::vector<FanqiePair>& pairs, double fraction,
                      std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0))
    throw InvalidWeight("held-out fraction must lie in [0, 1)");
  std::size_t n = pairs.size();
  std::size_t k =
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));

  // Partial Fisher-Yates marks k indices; both halves keep the input order.
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  std::vector<char> held(n, 0);
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(idx[i], idx[i + rng.uniform_index(n - i)]);
    held[idx[i]] = 1;
  }

  PairSplit out;
  for (std::size_t i = 0; i < n; ++i)
    (held[i] ? out.held_out : out.train).push_back(pairs[i]);
  return out;
}

VarietyTables read_varieties(const std::string& dir) {
  std::vector<std::string> files;
  for (const auto& de : fs::directory_iterator(dir)) {
    std::string name = de.path().filename().string();
    if (name.rfind("variety_", 0) == 0 && name.size() > 12 &&
        name.compare(name.size() - 4, 4, ".tsv") == 0)
      files.push_back(name);
  }
  std::sort(files.begin(), files.end());

  VarietyTables out;
  for (const std::string& file : files) {
    ReadingTable table;
    for (const auto& row : detail::parse_tsv_rows(
             detail::read_file(fs::path(dir) / file), file, 2, 2)) {
      try {
        parse_phoneme(row.cells[1]);
      } catch (const UnknownSymbol& u) {
        throw ParseError(std::string(u.what()), file, row.line);
      }
      if (!table.emplace(row.cells[0], row.cells[1]).second)
        throw ParseError("duplicate reading for entry id \"" + row.cells[0] +
                             "\"",
                         file, row.line);
    }
    out.names.push_back(file.substr(0, file.size() - 4));
    out.tables.push_back(std::move(table));
  }
  return out;
}

void write_reconstruction(const Reconstruction& recon,
                          const std::string& path) {
  const PhonemeInventory& chart = full_inventory();
  std::string body;
  for (const auto& [id, vec] : recon) {
    body += id + "\t" + nearest_phoneme(vec, chart);
    for (std::size_t j = 0; j < kFeatureCount; ++j) body += "\t" + fmt(vec[j]);
    body += "\n";
  }
  detail::write_file(path, body);
}

Reconstruction read_reconstruction(const std::string& path) {
  std::string file = fs::path(path).filename().string();
  Reconstruction recon;
  for (const auto& row : detail::parse_tsv_rows(detail::read_file(path), file,
                                                2 + kFeatureCount,
                                                2 + kFeatureCount)) {
    FeatureVector vec;
    for (std::size_t j = 0; j < kFeatureCount; ++j)
      vec.v[j] = parse_double(row.cells[2 + j], file, row.line);
    if (!recon.emplace(row.cells[0], vec).second)
      throw DuplicateEntryId(row.cells[0]);
  }
  return recon;
}

}  // namespace protophon
