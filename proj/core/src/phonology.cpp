#include "protophon/phonology.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "protophon/metric.hpp"

namespace protophon {

namespace {

std::vector<double> binary_levels() { return {-1.0, 0.0, 1.0}; }

}  // namespace

FeatureSchema build_schema() {
  FeatureSchema s;
  auto def = [&](int idx, const char* name, double lo, double hi,
                 std::vector<double> levels, int tau, double sup) {
    s.features[static_cast<std::size_t>(idx)] =
        FeatureDef{name, lo, hi, std::move(levels), tau, sup};
  };
  def(kContinuant, "continuant", -1, 1, binary_levels(), -1, 0);
  def(kDelayedRelease, "delayed release", -1, 1, binary_levels(), kSonority, 2);
  def(kSonority, "sonority", 0, 5, {0, 1, 2, 3, 4, 5}, -1, 0);
  def(kVoice, "voice", -1, 1, binary_levels(), -1, 0);
  def(kSpreadGlottis, "spread glottis", -1, 1, binary_levels(), -1, 0);
  def(kLabial, "labial", -1, 1, binary_levels(), -1, 0);
  def(kLabiodental, "labiodental", -1, 1, binary_levels(), kLabial, 2);
  def(kCoronal, "coronal", -1, 1, binary_levels(), -1, 0);
  def(kAnterior, "anterior", -1, 1, binary_levels(), kCoronal, 2);
  def(kDistributed, "distributed", -1, 1, binary_levels(), kCoronal, 2);
  def(kLateral, "lateral", -1, 1, binary_levels(), -1, 0);
  def(kDorsal, "dorsal", -1, 1, binary_levels(), -1, 0);
  def(kHigh, "high", 0, 3, {0, 1, 2, 3}, kDorsal, 3);
  def(kFront, "front", 0, 3, {0, 1, 2, 3}, kDorsal, 3);

  // Attested (governing value, own value) pairs. A sonority-1 obstruent is
  // either a stop (-1) or fricated (+1); sonorants and the zero initial take
  // 0. Place features are contoured only when the articulator is active.
  s.valid_combos[kDelayedRelease] = {{1, 1}, {1, -1}, {2, 0}, {3, 0}, {4, 0}, {5, 0}, {0, 0}};
  s.valid_combos[kLabiodental] = {{1, 1}, {1, -1}, {-1, 0}, {0, 0}};
  s.valid_combos[kAnterior] = {{1, 1}, {1, -1}, {-1, 0}, {0, 0}};
  s.valid_combos[kDistributed] = {{1, 1}, {1, -1}, {-1, 0}, {0, 0}};
  s.valid_combos[kHigh] = {{-1, 0}, {1, 1}, {1, 2}, {1, 3}, {0, 0}};
  s.valid_combos[kFront] = {{-1, 0}, {1, 1}, {1, 2}, {1, 3}, {0, 0}};

  for (int j = 0; j < kFeatureCount; ++j) {
    if (s.features[static_cast<std::size_t>(j)].tau >= 0)
      s.dependents.push_back(j);
    else
      s.independents.push_back(j);
  }
  return s;
}

const FeatureSchema& schema() {
  static const FeatureSchema s = build_schema();
  return s;
}

namespace {

enum class Manner {
  Stop,
  Nasal,
  Fricative,
  Affricate,
  LateralFricative,
  Liquid,            // central approximant liquids (ɹ ɻ)
  LateralApproximant,
  Glide,
};

enum class Place {
  Bilabial,
  Labiodental,
  Dental,
  Alveolar,
  PalatoAlveolar,
  Retroflex,
  AlveoloPalatal,
  Palatal,
  Velar,
  Uvular,
  Pharyngeal,
  Glottal,
  LabialVelar,
  LabialPalatal,
};

struct BaseDef {
  const char* symbol;
  Manner manner;
  Place place;
  bool voiced;
  bool spread_glottis = false;  // h-like segments
};

FeatureVector make_base(const BaseDef& b) {
  FeatureVector f;
  for (int k = 0; k < kFeatureCount; ++k) f[k] = 0;
  f[kLabial] = -1;
  f[kCoronal] = -1;
  f[kLateral] = -1;
  f[kDorsal] = -1;
  f[kVoice] = b.voiced ? 1 : -1;
  f[kSpreadGlottis] = b.spread_glottis ? 1 : -1;

  switch (b.manner) {
    case Manner::Stop:
      f[kContinuant] = -1; f[kSonority] = 1; f[kDelayedRelease] = -1;
      break;
    case Manner::Nasal:
      f[kContinuant] = -1; f[kSonority] = 2;
      break;
    case Manner::Fricative:
      f[kContinuant] = 1; f[kSonority] = 1; f[kDelayedRelease] = 1;
      break;
    case Manner::Affricate:
      f[kContinuant] = -1; f[kSonority] = 1; f[kDelayedRelease] = 1;
      break;
    case Manner::LateralFricative:
      f[kContinuant] = 1; f[kSonority] = 1; f[kDelayedRelease] = 1; f[kLateral] = 1;
      break;
    case Manner::Liquid:
      f[kContinuant] = 1; f[kSonority] = 3;
      break;
    case Manner::LateralApproximant:
      f[kContinuant] = 1; f[kSonority] = 3; f[kLateral] = 1;
      break;
    case Manner::Glide:
      f[kContinuant] = 1; f[kSonority] = 4;
      break;
  }

  auto coronal = [&](double ant, double dist) {
    f[kCoronal] = 1; f[kAnterior] = ant; f[kDistributed] = dist;
  };
  auto dorsal = [&](double high, double front) {
    f[kDorsal] = 1; f[kHigh] = high; f[kFront] = front;
  };
  auto labial = [&](double ld) { f[kLabial] = 1; f[kLabiodental] = ld; };

  switch (b.place) {
    case Place::Bilabial: labial(-1); break;
    case Place::Labiodental: labial(1); break;
    case Place::Dental: coronal(1, 1); break;
    case Place::Alveolar: coronal(1, -1); break;
    case Place::PalatoAlveolar: coronal(-1, 1); break;
    case Place::Retroflex: coronal(-1, -1); break;
    case Place::AlveoloPalatal: coronal(-1, 1); dorsal(3, 3); break;
    case Place::Palatal: dorsal(3, 3); break;
    case Place::Velar: dorsal(3, 2); break;
    case Place::Uvular: dorsal(2, 1); break;
    case Place::Pharyngeal: dorsal(1, 1); break;
    case Place::Glottal: break;
    case Place::LabialVelar: labial(-1); dorsal(3, 2); break;
    case Place::LabialPalatal: labial(-1); dorsal(3, 3); break;
  }
  return f;
}

// Chart bases. Taps, flaps and trills are deliberately absent; affricates
// cover the families that Sinitic and the named Western systems need.
const std::vector<BaseDef>& base_table() {
  static const std::vector<BaseDef> t = {
      {"p", Manner::Stop, Place::Bilabial, false},
      {"b", Manner::Stop, Place::Bilabial, true},
      {"t", Manner::Stop, Place::Alveolar, false},
      {"d", Manner::Stop, Place::Alveolar, true},
      {"ʈ", Manner::Stop, Place::Retroflex, false},
      {"ɖ", Manner::Stop, Place::Retroflex, true},
      {"c", Manner::Stop, Place::Palatal, false},
      {"ɟ", Manner::Stop, Place::Palatal, true},
      {"k", Manner::Stop, Place::Velar, false},
      {"ɡ", Manner::Stop, Place::Velar, true},
      {"q", Manner::Stop, Place::Uvular, false},
      {"ɢ", Manner::Stop, Place::Uvular, true},
      {"ʔ", Manner::Stop, Place::Glottal, false},

      {"m", Manner::Nasal, Place::Bilabial, true},
      {"ɱ", Manner::Nasal, Place::Labiodental, true},
      {"n", Manner::Nasal, Place::Alveolar, true},
      {"ɳ", Manner::Nasal, Place::Retroflex, true},
      {"ɲ", Manner::Nasal, Place::Palatal, true},
      {"ŋ", Manner::Nasal, Place::Velar, true},
      {"ɴ", Manner::Nasal, Place::Uvular, true},

      {"ɸ", Manner::Fricative, Place::Bilabial, false},
      {"β", Manner::Fricative, Place::Bilabial, true},
      {"f", Manner::Fricative, Place::Labiodental, false},
      {"v", Manner::Fricative, Place::Labiodental, true},
      {"θ", Manner::Fricative, Place::Dental, false},
      {"ð", Manner::Fricative, Place::Dental, true},
      {"s", Manner::Fricative, Place::Alveolar, false},
      {"z", Manner::Fricative, Place::Alveolar, true},
      {"ʃ", Manner::Fricative, Place::PalatoAlveolar, false},
      {"ʒ", Manner::Fricative, Place::PalatoAlveolar, true},
      {"ʂ", Manner::Fricative, Place::Retroflex, false},
      {"ʐ", Manner::Fricative, Place::Retroflex, true},
      {"ɕ", Manner::Fricative, Place::AlveoloPalatal, false},
      {"ʑ", Manner::Fricative, Place::AlveoloPalatal, true},
      {"ç", Manner::Fricative, Place::Palatal, false},
      {"ʝ", Manner::Fricative, Place::Palatal, true},
      {"x", Manner::Fricative, Place::Velar, false},
      {"ɣ", Manner::Fricative, Place::Velar, true},
      {"χ", Manner::Fricative, Place::Uvular, false},
      {"ʁ", Manner::Fricative, Place::Uvular, true},
      {"ħ", Manner::Fricative, Place::Pharyngeal, false},
      {"ʕ", Manner::Fricative, Place::Pharyngeal, true},
      {"h", Manner::Fricative, Place::Glottal, false, true},
      {"ɦ", Manner::Fricative, Place::Glottal, true, true},

      {"ɬ", Manner::LateralFricative, Place::Alveolar, false},
      {"ɮ", Manner::LateralFricative, Place::Alveolar, true},

      {"pf", Manner::Affricate, Place::Labiodental, false},
      {"ts", Manner::Affricate, Place::Alveolar, false},
      {"dz", Manner::Affricate, Place::Alveolar, true},
      {"tʃ", Manner::Affricate, Place::PalatoAlveolar, false},
      {"dʒ", Manner::Affricate, Place::PalatoAlveolar, true},
      {"ʈʂ", Manner::Affricate, Place::Retroflex, false},
      {"ɖʐ", Manner::Affricate, Place::Retroflex, true},
      {"tɕ", Manner::Affricate, Place::AlveoloPalatal, false},
      {"dʑ", Manner::Affricate, Place::AlveoloPalatal, true},

      {"ʋ", Manner::Glide, Place::Labiodental, true},
      {"ɹ", Manner::Liquid, Place::Alveolar, true},
      {"ɻ", Manner::Liquid, Place::Retroflex, true},
      {"j", Manner::Glide, Place::Palatal, true},
      {"ɰ", Manner::Glide, Place::Velar, true},
      {"w", Manner::Glide, Place::LabialVelar, true},
      {"ɥ", Manner::Glide, Place::LabialPalatal, true},

      {"l", Manner::LateralApproximant, Place::Alveolar, true},
      {"ɭ", Manner::LateralApproximant, Place::Retroflex, true},
      {"ʎ", Manner::LateralApproximant, Place::Palatal, true},
      {"ʟ", Manner::LateralApproximant, Place::Velar, true},
  };
  return t;
}

const std::map<std::string, FeatureVector>& base_map() {
  static const std::map<std::string, FeatureVector> m = [] {
    std::map<std::string, FeatureVector> r;
    for (const BaseDef& b : base_table()) r.emplace(b.symbol, make_base(b));
    return r;
  }();
  return m;
}

constexpr const char* kAspirated = "ʰ";   // ʰ
constexpr const char* kLabialized = "ʷ";  // ʷ
constexpr const char* kPalatalized = "ʲ"; // ʲ

void apply_diacritic(FeatureVector& f, int which) {
  switch (which) {
    case 0:  // ʰ
      f[kSpreadGlottis] = 1;
      break;
    case 1:  // ʷ
      if (f[kLabial] != 1) {
        f[kLabial] = 1;
        f[kLabiodental] = -1;
      }
      break;
    case 2:  // ʲ
      f[kDorsal] = 1;
      f[kHigh] = 3;
      f[kFront] = 3;
      break;
  }
}

}  // namespace

FeatureVector parse_phoneme(const std::string& ipa) {
  if (ipa.empty()) return FeatureVector{};  // zero initial

  // Longest base prefix; bases are 1-2 codepoints, diacritics never start one.
  const auto& bases = base_map();
  std::size_t best_len = 0;
  const FeatureVector* best = nullptr;
  for (const auto& [sym, vec] : bases) {
    if (sym.size() > best_len && ipa.compare(0, sym.size(), sym) == 0) {
      best_len = sym.size();
      best = &vec;
    }
  }
  if (!best) throw UnknownSymbol(ipa);

  FeatureVector f = *best;
  const std::array<const char*, 3> marks = {kAspirated, kLabialized, kPalatalized};
  std::array<bool, 3> seen = {false, false, false};
  std::size_t pos = best_len;
  while (pos < ipa.size()) {
    bool matched = false;
    for (int d = 0; d < 3; ++d) {
      std::size_t len = std::char_traits<char>::length(marks[static_cast<std::size_t>(d)]);
      if (ipa.compare(pos, len, marks[static_cast<std::size_t>(d)]) == 0) {
        if (seen[static_cast<std::size_t>(d)]) throw UnknownSymbol(ipa);
        seen[static_cast<std::size_t>(d)] = true;
        apply_diacritic(f, d);
        pos += len;
        matched = true;
        break;
      }
    }
    if (!matched) throw UnknownSymbol(ipa);
  }
  return f;
}

bool PhonemeInventory::contains(const std::string& symbol) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), symbol,
                             [](const Entry& e, const std::string& s) { return e.symbol < s; });
  return it != entries.end() && it->symbol == symbol;
}

const FeatureVector& PhonemeInventory::at(const std::string& symbol) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), symbol,
                             [](const Entry& e, const std::string& s) { return e.symbol < s; });
  if (it == entries.end() || it->symbol != symbol) throw UnknownSymbol(symbol);
  return it->vector;
}

PhonemeInventory PhonemeInventory::subset(const std::vector<std::string>& symbols) const {
  PhonemeInventory out;
  for (const std::string& s : symbols) out.entries.push_back({s, at(s)});
  std::sort(out.entries.begin(), out.entries.end(),
            [](const Entry& a, const Entry& b) { return a.symbol < b.symbol; });
  out.entries.erase(std::unique(out.entries.begin(), out.entries.end(),
                                [](const Entry& a, const Entry& b) { return a.symbol == b.symbol; }),
                    out.entries.end());
  return out;
}

const PhonemeInventory& full_inventory() {
  static const PhonemeInventory inv = [] {
    PhonemeInventory r;
    std::vector<PhonemeInventory::Entry> staged;
    staged.push_back({"", FeatureVector{}});

    auto push = [&](const std::string& sym, const FeatureVector& f) {
      for (const auto& e : staged)
        if (e.vector == f) return;  // first spelling wins
      staged.push_back({sym, f});
    };

    for (const BaseDef& b : base_table()) push(b.symbol, make_base(b));
    // ʰ only where Table 1 attests aspiration: obstruents.
    for (const BaseDef& b : base_table()) {
      FeatureVector f = make_base(b);
      if (f[kSonority] != 1) continue;
      FeatureVector g = f;
      apply_diacritic(g, 0);
      push(std::string(b.symbol) + kAspirated, g);
    }
    for (const BaseDef& b : base_table()) {
      FeatureVector g = make_base(b);
      apply_diacritic(g, 1);
      push(std::string(b.symbol) + kLabialized, g);
    }
    for (const BaseDef& b : base_table()) {
      FeatureVector g = make_base(b);
      apply_diacritic(g, 2);
      push(std::string(b.symbol) + kPalatalized, g);
    }

    std::sort(staged.begin(), staged.end(),
              [](const PhonemeInventory::Entry& a, const PhonemeInventory::Entry& b) {
                return a.symbol < b.symbol;
              });
    r.entries = std::move(staged);
    return r;
  }();
  return inv;
}

const std::string& nearest_phoneme(const FeatureVector& v, const PhonemeInventory& inv) {
  if (inv.entries.empty()) throw Error("nearest_phoneme: empty inventory");
  // Entries are symbol-sorted, so strict < yields the lexicographically
  // smallest symbol among distance ties.
  std::size_t best = 0;
  double best_d = distance(v, inv.entries[0].vector);
  for (std::size_t i = 1; i < inv.entries.size(); ++i) {
    double d = distance(v, inv.entries[i].vector);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return inv.entries[best].symbol;
}

double soundness_distance(const FeatureVector& v) {
  const FeatureSchema& s = schema();
  double total = 0;
  for (int j : s.dependents) {
    double ti = v[s.tau(j)];
    double dj = v[j];
    double best = std::numeric_limits<double>::infinity();
    for (const ValidCombo& c : s.valid_combos[static_cast<std::size_t>(j)]) {
      double d = std::abs(ti - c.i_value) + std::abs(dj - c.d_value);
      if (d < best) best = d;
    }
    total += best;
  }
  return total;
}

namespace {

std::string format_value(double x) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  (void)ec;
  return std::string(buf, p);
}

double parse_value(const std::string& tok, long line) {
  double x = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw ParseError("bad numeric field \"" + tok + "\"", "<inventory>", line);
  return x;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::string inventory_to_tsv(const PhonemeInventory& inv) {
  const FeatureSchema& s = schema();
  std::string out = "symbol";
  for (const FeatureDef& f : s.features) {
    out += '\t';
    out += f.name;
  }
  out += '\n';
  for (const auto& e : inv.entries) {
    out += e.symbol;
    for (int k = 0; k < kFeatureCount; ++k) {
      out += '\t';
      out += format_value(e.vector[k]);
    }
    out += '\n';
  }
  return out;
}

PhonemeInventory inventory_from_tsv(const std::string& text) {
  PhonemeInventory inv;
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() && !header) continue;
    if (header) {
      header = false;
      continue;
    }
    auto cols = split_tabs(line);
    if (cols.size() != 1 + kFeatureCount)
      throw ParseError("expected " + std::to_string(1 + kFeatureCount) + " columns, got " +
                           std::to_string(cols.size()),
                       "<inventory>", lineno);
    PhonemeInventory::Entry e;
    e.symbol = cols[0];
    for (int k = 0; k < kFeatureCount; ++k)
      e.vector[k] = parse_value(cols[static_cast<std::size_t>(k) + 1], lineno);
    inv.entries.push_back(std::move(e));
  }
  std::sort(inv.entries.begin(), inv.entries.end(),
            [](const PhonemeInventory::Entry& a, const PhonemeInventory::Entry& b) {
              return a.symbol < b.symbol;
            });
  return inv;
}

}  // namespace protophon
