#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "protophon/errors.hpp"

// Internal file and TSV plumbing shared by the dataset readers. Not installed.

namespace protophon::detail {

inline void write_file(const std::filesystem::path& path,
                       const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << body;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct TsvRow {
  int line = 0;
  std::vector<std::string> cells;
};

// Splits body into tab-separated rows, skipping blank lines. Every row must
// carry between min_fields and max_fields cells.
inline std::vector<TsvRow> parse_tsv_rows(const std::string& body,
                                          const std::string& file,
                                          std::size_t min_fields,
                                          std::size_t max_fields) {
  std::vector<TsvRow> rows;
  std::size_t start = 0;
  int line = 0;
  while (start < body.size()) {
    std::size_t end = body.find('\n', start);
    if (end == std::string::npos) end = body.size();
    ++line;
    std::string row = body.substr(start, end - start);
    start = end + 1;
    if (row.empty()) continue;
    TsvRow out;
    out.line = line;
    std::size_t cell_start = 0;
    for (;;) {
      std::size_t tab = row.find('\t', cell_start);
      if (tab == std::string::npos) {
        out.cells.push_back(row.substr(cell_start));
        break;
      }
      out.cells.push_back(row.substr(cell_start, tab - cell_start));
      cell_start = tab + 1;
    }
    if (out.cells.size() < min_fields || out.cells.size() > max_fields)
      throw ParseError("expected " + std::to_string(min_fields) +
                           (max_fields > min_fields
                                ? ".." + std::to_string(max_fields)
                                : "") +
                           " fields, got " + std::to_string(out.cells.size()),
                       file, line);
    rows.push_back(std::move(out));
  }
  return rows;
}

}  // namespace protophon::detail
