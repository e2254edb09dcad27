#include "protophon/lp_format.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "protophon/errors.hpp"

namespace protophon {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Shortest decimal that parses back to the identical double.
std::string fmt(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void append_piece(std::string& out, std::size_t& len, const std::string& piece) {
  if (len + piece.size() > 76 && len > 1) {
    out += "\n ";
    len = 1;
  }
  out += piece;
  len += piece.size();
}

void emit_terms(std::string& out, std::size_t& len,
                const std::vector<std::pair<int, double>>& terms,
                const std::vector<std::string>& names) {
  for (const auto& [col, v] : terms) {
    if (v == 0) continue;
    std::string piece = v < 0 ? " - " : " + ";
    double a = std::fabs(v);
    if (a != 1) piece += fmt(a) + " ";
    piece += names[static_cast<std::size_t>(col)];
    append_piece(out, len, piece);
  }
}

}  // namespace

std::string export_lp(const MilpModel& m) {
  const lp::LpProblem& p = m.problem;
  int ncols = p.num_cols();
  int nrows = p.num_rows();
  std::vector<std::string> cn = m.col_names;
  std::vector<std::string> rn = m.row_names;
  if (cn.empty())
    for (int j = 0; j < ncols; ++j) cn.push_back("x" + std::to_string(j));
  if (rn.empty())
    for (int i = 0; i < nrows; ++i) rn.push_back("c" + std::to_string(i));
  if (static_cast<int>(cn.size()) != ncols ||
      static_cast<int>(rn.size()) != nrows)
    throw Error("name lists do not match model shape");

  std::vector<std::vector<std::pair<int, double>>> row_terms(
      static_cast<std::size_t>(nrows));
  for (int j = 0; j < ncols; ++j)
    for (int k = p.A.col_start[static_cast<std::size_t>(j)];
         k < p.A.col_start[static_cast<std::size_t>(j) + 1]; ++k)
      row_terms[static_cast<std::size_t>(p.A.index[static_cast<std::size_t>(k)])]
          .emplace_back(j, p.A.value[static_cast<std::size_t>(k)]);

  std::string out = "\\ protophon model\nMinimize\n obj:";
  std::size_t len = 5;
  bool any = false;
  {
    std::vector<std::pair<int, double>> obj;
    for (int j = 0; j < ncols; ++j)
      if (p.c[static_cast<std::size_t>(j)] != 0) {
        obj.emplace_back(j, p.c[static_cast<std::size_t>(j)]);
        any = true;
      }
    emit_terms(out, len, obj, cn);
  }
  if (p.c0 != 0) {
    append_piece(out, len,
                 std::string(p.c0 < 0 ? " - " : " + ") + fmt(std::fabs(p.c0)));
    any = true;
  }
  if (!any) append_piece(out, len, " 0");

  out += "\nSubject To\n";
  for (int i = 0; i < nrows; ++i) {
    double lb = p.rowlb[static_cast<std::size_t>(i)];
    double ub = p.rowub[static_cast<std::size_t>(i)];
    const auto& terms = row_terms[static_cast<std::size_t>(i)];
    if (lb == -kInf && ub == kInf)
      throw Error("row " + rn[static_cast<std::size_t>(i)] +
                  " has no finite bound");
    auto emit_row = [&](const std::string& name, const char* rel, double rhs) {
      out += " " + name + ":";
      len = name.size() + 2;
      emit_terms(out, len, terms, cn);
      append_piece(out, len, std::string(" ") + rel + " " + fmt(rhs));
      out += "\n";
    };
    const std::string& name = rn[static_cast<std::size_t>(i)];
    if (lb == ub) {
      emit_row(name, "=", lb);
    } else if (lb != -kInf && ub != kInf) {
      emit_row(name + "_lo", ">=", lb);
      emit_row(name + "_hi", "<=", ub);
    } else if (ub != kInf) {
      emit_row(name, "<=", ub);
    } else {
      emit_row(name, ">=", lb);
    }
  }

  out += "Bounds\n";
  for (int j = 0; j < ncols; ++j) {
    double lb = p.collb[static_cast<std::size_t>(j)];
    double ub = p.colub[static_cast<std::size_t>(j)];
    const std::string& name = cn[static_cast<std::size_t>(j)];
    if (lb == ub) {
      out += " " + name + " = " + fmt(lb) + "\n";
    } else {
      std::string lo = lb == -kInf ? "-infinity" : fmt(lb);
      std::string hi = ub == kInf ? "+infinity" : fmt(ub);
      out += " " + lo + " <= " + name + " <= " + hi + "\n";
    }
  }

  if (!m.binary_cols.empty()) {
    out += "Binaries\n ";
    len = 1;
    for (int col : m.binary_cols)
      append_piece(out, len, " " + cn[static_cast<std::size_t>(col)]);
    out += "\n";
  }
  out += "End\n";
  return out;
}

namespace {

struct Tok {
  enum Kind { Name, Num, Le, Ge, Eq, Plus, Minus, Colon, Eof } kind = Eof;
  std::string text;
  double value = 0;
  int line = 0;
};

bool name_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<Tok> tokenize(const std::string& text) {
  std::vector<Tok> toks;
  int line = 1;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == '\n') {
      ++line;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '\\') {  // comment to end of line
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    Tok t;
    t.line = line;
    if (name_start(c)) {
      std::size_t j = i;
      while (j < text.size() && name_char(text[j])) ++j;
      t.text = text.substr(i, j - i);
      std::string low = lower(t.text);
      if (low == "inf" || low == "infinity") {
        t.kind = Tok::Num;
        t.value = kInf;
      } else {
        t.kind = Tok::Name;
      }
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t j = i;
      while (j < text.size() &&
             (std::isdigit(static_cast<unsigned char>(text[j])) || text[j] == '.'))
        ++j;
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) {
          ++k;
          while (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k])))
            ++k;
          j = k;
        }
      }
      t.text = text.substr(i, j - i);
      t.kind = Tok::Num;
      t.value = std::strtod(t.text.c_str(), nullptr);
      i = j;
    } else if (c == '<' || c == '>' || c == '=') {
      std::size_t j = i + 1;
      char d = j < text.size() ? text[j] : '\0';
      if (c == '<') {
        t.kind = Tok::Le;
        if (d == '=') ++j;
      } else if (c == '>') {
        t.kind = Tok::Ge;
        if (d == '=') ++j;
      } else if (d == '<') {
        t.kind = Tok::Le;
        ++j;
      } else if (d == '>') {
        t.kind = Tok::Ge;
        ++j;
      } else {
        t.kind = Tok::Eq;
      }
      i = j;
    } else if (c == '+') {
      t.kind = Tok::Plus;
      ++i;
    } else if (c == '-') {
      t.kind = Tok::Minus;
      ++i;
    } else if (c == ':') {
      t.kind = Tok::Colon;
      ++i;
    } else {
      throw ParseError("lp text line " + std::to_string(line) +
                       ": unexpected character '" + std::string(1, c) + "'");
    }
    toks.push_back(std::move(t));
  }
  Tok eof;
  eof.kind = Tok::Eof;
  eof.line = line;
  toks.push_back(eof);
  return toks;
}

// Section openers; "subject"/"such" consume their partner word separately.
bool is_section_word(const std::string& low) {
  return low == "subject" || low == "st" || low == "s.t." || low == "such" ||
         low == "bounds" || low == "bound" || low == "binaries" ||
         low == "binary" || low == "bin" || low == "general" ||
         low == "generals" || low == "gen" || low == "end" ||
         low == "minimize" || low == "minimise" || low == "min" ||
         low == "maximize" || low == "maximise" || low == "max" ||
         low == "free";
}

struct ParsedRow {
  std::string name;
  std::map<int, double> terms;
  Tok::Kind rel = Tok::Le;
  double rhs = 0;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : toks_(tokenize(text)) {}

  ParsedLp run() {
    prescan_bounds_order();
    expect_keyword({"minimize", "minimise", "min"},
                   {"maximize", "maximise", "max"});
    parse_objective();
    expect_subject_to();
    parse_rows();
    parse_trailing_sections();
    merge_split_rows();
    return assemble();
  }

 private:
  std::vector<Tok> toks_;
  std::size_t pos_ = 0;

  std::vector<std::string> col_names_;
  std::unordered_map<std::string, int> col_index_;
  std::map<int, double> objective_;
  double c0_ = 0;
  std::vector<ParsedRow> rows_;
  std::unordered_map<std::string, double> lb_of_, ub_of_;
  std::vector<std::string> binaries_;
  std::unordered_set<std::string> binary_set_;

  const Tok& peek(std::size_t ahead = 0) const {
    std::size_t i = pos_ + ahead;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  const Tok& take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void fail(const Tok& t, const std::string& msg) const {
    throw ParseError("lp text line " + std::to_string(t.line) + ": " + msg);
  }

  bool at_section_keyword() const {
    return peek().kind == Tok::Name && is_section_word(lower(peek().text)) &&
           peek(1).kind != Tok::Colon;
  }

  int col_of(const std::string& name) {
    auto it = col_index_.find(name);
    if (it != col_index_.end()) return it->second;
    int idx = static_cast<int>(col_names_.size());
    col_index_.emplace(name, idx);
    col_names_.push_back(name);
    return idx;
  }

  // Registers Bounds-section names ahead of everything else so a parsed
  // round trip keeps the exporter's column order even for columns that
  // never appear in the objective.
  void prescan_bounds_order() {
    bool in_bounds = false;
    for (std::size_t i = 0; i + 1 < toks_.size(); ++i) {
      const Tok& t = toks_[i];
      if (t.kind != Tok::Name) continue;
      std::string low = lower(t.text);
      if (toks_[i + 1].kind == Tok::Colon) continue;
      if (is_section_word(low) && low != "free") {
        in_bounds = low == "bounds" || low == "bound";
        continue;
      }
      if (in_bounds && low != "free") col_of(t.text);
    }
  }

  void expect_keyword(std::initializer_list<const char*> accept,
                      std::initializer_list<const char*> reject) {
    const Tok& t = peek();
    if (t.kind != Tok::Name) fail(t, "expected an objective sense keyword");
    std::string low = lower(t.text);
    for (const char* r : reject)
      if (low == r) fail(t, "only minimization is supported");
    for (const char* a : accept)
      if (low == a) {
        take();
        return;
      }
    fail(t, "expected 'Minimize'");
  }

  void expect_subject_to() {
    const Tok& t = peek();
    if (t.kind != Tok::Name) fail(t, "expected 'Subject To'");
    std::string low = lower(t.text);
    if (low == "st" || low == "s.t.") {
      take();
      return;
    }
    if ((low == "subject" && lower(peek(1).text) == "to") ||
        (low == "such" && lower(peek(1).text) == "that")) {
      take();
      take();
      return;
    }
    fail(t, "expected 'Subject To'");
  }

  // Linear expression: signed terms plus bare constants. Stops before a
  // relation, a section keyword, a labeled row, or end of input.
  void parse_expr(std::map<int, double>& terms, double& constant) {
    bool any = false;
    for (;;) {
      const Tok& t = peek();
      if (t.kind == Tok::Le || t.kind == Tok::Ge || t.kind == Tok::Eq ||
          t.kind == Tok::Eof)
        break;
      if (t.kind == Tok::Name &&
          (at_section_keyword() || peek(1).kind == Tok::Colon))
        break;
      double sign = 1;
      if (t.kind == Tok::Plus || t.kind == Tok::Minus) {
        sign = t.kind == Tok::Minus ? -1 : 1;
        take();
      } else if (any) {
        fail(t, "missing '+' or '-' between terms");
      }
      const Tok& u = peek();
      if (u.kind == Tok::Num) {
        double v = u.value;
        take();
        if (peek().kind == Tok::Name && peek(1).kind != Tok::Colon &&
            !at_section_keyword()) {
          terms[col_of(take().text)] += sign * v;
        } else {
          constant += sign * v;
        }
      } else if (u.kind == Tok::Name) {
        if (at_section_keyword()) fail(u, "dangling sign before a keyword");
        terms[col_of(take().text)] += sign * 1.0;
      } else {
        fail(u, "expected a term");
      }
      any = true;
    }
    if (!any) fail(peek(), "empty expression");
  }

  void parse_objective() {
    if (peek().kind == Tok::Name && peek(1).kind == Tok::Colon) {
      take();
      take();
    }
    parse_expr(objective_, c0_);
  }

  double signed_number() {
    double sign = 1;
    if (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      sign = peek().kind == Tok::Minus ? -1 : 1;
      take();
    }
    const Tok& t = peek();
    if (t.kind != Tok::Num) fail(t, "expected a number");
    take();
    return sign * t.value;
  }

  void parse_rows() {
    std::unordered_set<std::string> row_names;
    while (!at_section_keyword() && peek().kind != Tok::Eof) {
      const Tok& t = peek();
      if (t.kind != Tok::Name || peek(1).kind != Tok::Colon)
        fail(t, "expected 'name:' to open a constraint");
      ParsedRow row;
      row.name = take().text;
      take();  // colon
      if (!row_names.insert(row.name).second)
        fail(t, "duplicate constraint name '" + row.name + "'");
      double shift = 0;
      parse_expr(row.terms, shift);
      const Tok& rel = peek();
      if (rel.kind != Tok::Le && rel.kind != Tok::Ge && rel.kind != Tok::Eq)
        fail(rel, "expected '<=', '>=' or '=' in constraint");
      row.rel = take().kind;
      row.rhs = signed_number() - shift;
      rows_.push_back(std::move(row));
    }
    if (rows_.empty()) fail(peek(), "no constraints after 'Subject To'");
  }

  void parse_bounds_entry() {
    const Tok& t = peek();
    if (t.kind == Tok::Num || t.kind == Tok::Plus || t.kind == Tok::Minus) {
      double lo = signed_number();
      if (peek().kind != Tok::Le) fail(peek(), "expected '<=' in bound");
      take();
      const Tok& nm = peek();
      if (nm.kind != Tok::Name) fail(nm, "expected a variable in bound");
      std::string name = take().text;
      int col = col_of(name);
      (void)col;
      lb_of_[name] = lo;
      if (peek().kind == Tok::Le) {
        take();
        ub_of_[name] = signed_number();
      }
      return;
    }
    if (t.kind != Tok::Name) fail(t, "expected a bound entry");
    std::string name = take().text;
    col_of(name);
    const Tok& u = peek();
    if (u.kind == Tok::Name && lower(u.text) == "free") {
      take();
      lb_of_[name] = -kInf;
      ub_of_[name] = kInf;
    } else if (u.kind == Tok::Le) {
      take();
      ub_of_[name] = signed_number();
    } else if (u.kind == Tok::Ge) {
      take();
      lb_of_[name] = signed_number();
    } else if (u.kind == Tok::Eq) {
      take();
      double v = signed_number();
      lb_of_[name] = v;
      ub_of_[name] = v;
    } else {
      fail(u, "malformed bound for '" + name + "'");
    }
  }

  void parse_trailing_sections() {
    for (;;) {
      const Tok& t = peek();
      if (t.kind == Tok::Eof) return;
      if (t.kind != Tok::Name || !at_section_keyword())
        fail(t, "expected a section keyword");
      std::string low = lower(take().text);
      if (low == "end") {
        if (peek().kind != Tok::Eof) fail(peek(), "content after 'End'");
        return;
      }
      if (low == "bounds" || low == "bound") {
        while (!at_section_keyword() && peek().kind != Tok::Eof)
          parse_bounds_entry();
      } else if (low == "binaries" || low == "binary" || low == "bin") {
        while (peek().kind == Tok::Name && !at_section_keyword()) {
          std::string name = take().text;
          if (binary_set_.insert(name).second) {
            col_of(name);
            binaries_.push_back(name);
          }
        }
      } else if (low == "general" || low == "generals" || low == "gen") {
        fail(t, "general integer variables are not supported");
      } else {
        fail(t, "unexpected section '" + low + "'");
      }
    }
  }

  // Folds `name_lo: e >= a` immediately followed by `name_hi: e <= b` with
  // identical terms back into the ranged row the exporter split.
  void merge_split_rows() {
    std::vector<ParsedRow> merged;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      ParsedRow& r = rows_[i];
      constexpr const char* kLo = "_lo";
      constexpr const char* kHi = "_hi";
      if (i + 1 < rows_.size() && r.rel == Tok::Ge && r.name.size() > 3 &&
          r.name.compare(r.name.size() - 3, 3, kLo) == 0) {
        ParsedRow& s = rows_[i + 1];
        std::string base = r.name.substr(0, r.name.size() - 3);
        if (s.rel == Tok::Le && s.name == base + kHi && s.terms == r.terms) {
          ParsedRow row;
          row.name = base;
          row.terms = std::move(r.terms);
          row.rel = Tok::Colon;  // marks a ranged row
          row.rhs = r.rhs;       // lower side; upper kept alongside
          ranged_ub_.push_back(s.rhs);
          merged.push_back(std::move(row));
          ++i;
          continue;
        }
      }
      merged.push_back(std::move(r));
    }
    rows_ = std::move(merged);
  }

  std::vector<double> ranged_ub_;

  ParsedLp assemble() {
    ParsedLp out;
    lp::LpProblem& p = out.problem;
    int ncols = static_cast<int>(col_names_.size());
    int nrows = static_cast<int>(rows_.size());
    p.A.clear_to(nrows);
    std::vector<std::vector<std::pair<int, double>>> col_terms(
        static_cast<std::size_t>(ncols));
    for (int i = 0; i < nrows; ++i)
      for (const auto& [col, v] : rows_[static_cast<std::size_t>(i)].terms)
        col_terms[static_cast<std::size_t>(col)].emplace_back(i, v);

    std::size_t next_ranged = 0;
    for (int i = 0; i < nrows; ++i) {
      const ParsedRow& r = rows_[static_cast<std::size_t>(i)];
      double lb, ub;
      if (r.rel == Tok::Colon) {
        lb = r.rhs;
        ub = ranged_ub_[next_ranged++];
      } else if (r.rel == Tok::Le) {
        lb = -kInf;
        ub = r.rhs;
      } else if (r.rel == Tok::Ge) {
        lb = r.rhs;
        ub = kInf;
      } else {
        lb = ub = r.rhs;
      }
      p.rowlb.push_back(lb);
      p.rowub.push_back(ub);
      out.row_names.push_back(r.name);
    }

    for (int j = 0; j < ncols; ++j) {
      p.A.add_column(col_terms[static_cast<std::size_t>(j)]);
      const std::string& name = col_names_[static_cast<std::size_t>(j)];
      auto lit = lb_of_.find(name);
      auto uit = ub_of_.find(name);
      bool is_bin = binary_set_.count(name) > 0;
      double lb = lit != lb_of_.end() ? lit->second : 0.0;
      double ub = uit != ub_of_.end() ? uit->second : is_bin ? 1.0 : kInf;
      p.collb.push_back(lb);
      p.colub.push_back(ub);
      auto oit = objective_.find(j);
      p.c.push_back(oit != objective_.end() ? oit->second : 0.0);
    }
    p.c0 = c0_;
    out.col_names = col_names_;
    for (const std::string& b : binaries_) out.binary_cols.push_back(col_index_.at(b));
    return out;
  }
};

}  // namespace

ParsedLp parse_lp(const std::string& text) { return Parser(text).run(); }

}  // namespace protophon
