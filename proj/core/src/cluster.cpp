#include "protophon/cluster.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "protophon/errors.hpp"
#include "protophon/rng.hpp"

namespace protophon {

namespace {

double dist2(const FeatureVector& a, const FeatureVector& b) {
  double s = 0;
  for (int j = 0; j < kFeatureCount; ++j) {
    double d = a[j] - b[j];
    s += d * d;
  }
  return s;
}

struct RunResult {
  std::vector<int> labels;  // per point, in id order
  double wcss = 0;
};

// One full kmeans++ / Lloyd run on its own stream.
RunResult run_once(const std::vector<FeatureVector>& pts, int k, Rng rng) {
  const std::size_t n = pts.size();
  const std::size_t kk = static_cast<std::size_t>(k);

  std::vector<FeatureVector> centers;
  centers.reserve(kk);
  centers.push_back(pts[rng.uniform_index(n)]);
  std::vector<double> best_d2(n);
  while (centers.size() < kk) {
    for (std::size_t i = 0; i < n; ++i) {
      double d = dist2(pts[i], centers[0]);
      for (std::size_t c = 1; c < centers.size(); ++c)
        d = std::min(d, dist2(pts[i], centers[c]));
      best_d2[i] = d;
    }
    // k <= distinct points, so some candidate always has positive weight.
    centers.push_back(pts[rng.weighted_index(best_d2)]);
  }

  std::vector<int> label(n, 0);
  std::vector<long> sizes(kk, 0);
  for (int iter = 0; iter < 500; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double bd = dist2(pts[i], centers[0]);
      for (std::size_t c = 1; c < kk; ++c) {
        double d = dist2(pts[i], centers[c]);
        if (d < bd) {
          bd = d;
          best = static_cast<int>(c);
        }
      }
      label[i] = best;
    }
    sizes.assign(kk, 0);
    for (std::size_t i = 0; i < n; ++i)
      ++sizes[static_cast<std::size_t>(label[i])];

    for (std::size_t c = 0; c < kk; ++c) {
      if (sizes[c] > 0) continue;
      // Re-seed an empty cluster with the farthest point of any cluster that
      // can spare one. A donor always exists: n >= k points sit in < k
      // clusters, so some cluster holds at least two.
      std::size_t far = n;
      double fd = -1;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[static_cast<std::size_t>(label[i])] < 2) continue;
        double d = dist2(pts[i], centers[static_cast<std::size_t>(label[i])]);
        if (d > fd) {
          fd = d;
          far = i;
        }
      }
      if (far == n) throw Error("kmeans lost a cluster it cannot refill");
      --sizes[static_cast<std::size_t>(label[far])];
      label[far] = static_cast<int>(c);
      sizes[c] = 1;
    }

    double shift = 0;
    for (std::size_t c = 0; c < kk; ++c) {
      FeatureVector sum;
      for (std::size_t i = 0; i < n; ++i)
        if (static_cast<std::size_t>(label[i]) == c)
          for (int j = 0; j < kFeatureCount; ++j) sum[j] += pts[i][j];
      FeatureVector mean;
      for (int j = 0; j < kFeatureCount; ++j)
        mean[j] = sum[j] / static_cast<double>(sizes[c]);
      shift = std::max(shift, std::sqrt(dist2(mean, centers[c])));
      centers[c] = mean;
    }
    if (shift < 1e-8) break;
  }

  // Score the final partition against its own cluster means; every cluster is
  // nonempty by construction, so all k labels appear.
  RunResult r;
  r.labels = label;
  r.wcss = 0;
  for (std::size_t i = 0; i < n; ++i)
    r.wcss += dist2(pts[i], centers[static_cast<std::size_t>(label[i])]);
  return r;
}

}  // namespace

void Labeling::validate() const {
  if (k < 1) throw Error("labeling needs at least one cluster");
  std::vector<bool> seen(static_cast<std::size_t>(k), false);
  for (const auto& [id, label] : assignment) {
    if (label < 0 || label >= k)
      throw Error("label " + std::to_string(label) + " for \"" + id +
                  "\" is outside [0, " + std::to_string(k) + ")");
    seen[static_cast<std::size_t>(label)] = true;
  }
  for (int c = 0; c < k; ++c)
    if (!seen[static_cast<std::size_t>(c)])
      throw Error("label " + std::to_string(c) + " is unused");
}

Labeling kmeans(const std::map<std::string, FeatureVector>& points, int k,
                std::uint64_t seed, int restarts) {
  if (points.empty()) throw TooFewPoints("kmeans over an empty point set");
  if (k < 1) throw TooFewPoints("kmeans needs k >= 1");
  if (restarts < 1) throw Error("kmeans needs at least one restart");

  std::vector<std::string> ids;
  std::vector<FeatureVector> pts;
  ids.reserve(points.size());
  for (const auto& [id, v] : points) {
    ids.push_back(id);
    pts.push_back(v);
  }
  std::set<std::array<double, kFeatureCount>> distinct;
  for (const FeatureVector& p : pts) distinct.insert(p.v);
  if (static_cast<std::size_t>(k) > distinct.size())
    throw TooFewPoints("k=" + std::to_string(k) + " exceeds the " +
                       std::to_string(distinct.size()) + " distinct points");

  Rng root(seed);
  std::vector<RunResult> results(static_cast<std::size_t>(restarts));
  std::atomic<int> next{0};
  auto work = [&]() {
    for (;;) {
      int r = next.fetch_add(1);
      if (r >= restarts) return;
      results[static_cast<std::size_t>(r)] =
          run_once(pts, k, root.fork(static_cast<std::uint64_t>(r)));
    }
  };
  unsigned hw = std::thread::hardware_concurrency();
  int nthreads = std::min<int>(restarts, hw ? static_cast<int>(hw) : 1);
  if (nthreads <= 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < nthreads; ++t) threads.emplace_back(work);
    for (std::thread& t : threads) t.join();
  }

  std::size_t best = 0;
  for (std::size_t r = 1; r < results.size(); ++r)
    if (results[r].wcss < results[best].wcss) best = r;

  // Canonical labels: first appearance in id order.
  std::map<int, int> relabel;
  Labeling L;
  L.k = k;
  L.wcss = results[best].wcss;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    int raw = results[best].labels[i];
    auto [it, inserted] = relabel.emplace(raw, static_cast<int>(relabel.size()));
    (void)inserted;
    L.assignment[ids[i]] = it->second;
  }
  L.validate();
  return L;
}

Labeling labels_from_categories(const std::map<std::string, std::string>& tags) {
  if (tags.empty()) throw TooFewPoints("no tagged entries");
  std::map<std::string, int> index;
  for (const auto& [id, tag] : tags) {
    (void)id;
    index.emplace(tag, 0);
  }
  int next = 0;
  for (auto& [tag, idx] : index) {
    (void)tag;
    idx = next++;
  }
  Labeling L;
  L.k = next;
  for (const auto& [id, tag] : tags) L.assignment[id] = index.at(tag);
  return L;
}

double entropy(const std::vector<long>& counts) {
  double n = 0;
  for (long c : counts) n += static_cast<double>(c);
  if (n <= 0) return 0;
  double h = 0;
  for (long c : counts)
    if (c > 0) {
      double p = static_cast<double>(c) / n;
      h -= p * std::log(p);
    }
  return h;
}

double mutual_information(const std::vector<std::vector<long>>& table) {
  double n = 0;
  std::vector<double> row, col;
  row.assign(table.size(), 0);
  for (std::size_t i = 0; i < table.size(); ++i)
    for (std::size_t j = 0; j < table[i].size(); ++j) {
      if (col.size() <= j) col.resize(j + 1, 0);
      row[i] += static_cast<double>(table[i][j]);
      col[j] += static_cast<double>(table[i][j]);
      n += static_cast<double>(table[i][j]);
    }
  if (n <= 0) return 0;
  double mi = 0;
  for (std::size_t i = 0; i < table.size(); ++i)
    for (std::size_t j = 0; j < table[i].size(); ++j) {
      double nij = static_cast<double>(table[i][j]);
      if (nij > 0) mi += (nij / n) * std::log(n * nij / (row[i] * col[j]));
    }
  return mi;
}

double expected_mutual_information(const std::vector<long>& row_sums,
                                   const std::vector<long>& col_sums) {
  long n = 0;
  for (long a : row_sums) n += a;
  long check = 0;
  for (long b : col_sums) check += b;
  if (n != check) throw Error("marginal totals disagree");
  if (n <= 0) return 0;
  double dn = static_cast<double>(n);

  // Exact expectation under the fixed-marginals permutation model: n_ij is
  // hypergeometric in each cell, and cells contribute independently.
  double emi = 0;
  for (long a : row_sums)
    for (long b : col_sums) {
      long lo = std::max<long>(1, a + b - n);
      long hi = std::min(a, b);
      for (long nij = lo; nij <= hi; ++nij) {
        double logp = std::lgamma(static_cast<double>(a + 1)) +
                      std::lgamma(static_cast<double>(b + 1)) +
                      std::lgamma(static_cast<double>(n - a + 1)) +
                      std::lgamma(static_cast<double>(n - b + 1)) -
                      std::lgamma(dn + 1) -
                      std::lgamma(static_cast<double>(nij + 1)) -
                      std::lgamma(static_cast<double>(a - nij + 1)) -
                      std::lgamma(static_cast<double>(b - nij + 1)) -
                      std::lgamma(static_cast<double>(n - a - b + nij + 1));
        double term = (static_cast<double>(nij) / dn) *
                      std::log(dn * static_cast<double>(nij) /
                               (static_cast<double>(a) * static_cast<double>(b)));
        emi += std::exp(logp) * term;
      }
    }
  return emi;
}

double ami(const Labeling& u, const Labeling& v) {
  u.validate();
  v.validate();
  if (u.assignment.size() != v.assignment.size())
    throw IdMismatch("labelings cover " + std::to_string(u.assignment.size()) +
                     " vs " + std::to_string(v.assignment.size()) + " ids");
  std::vector<std::vector<long>> table(
      static_cast<std::size_t>(u.k),
      std::vector<long>(static_cast<std::size_t>(v.k), 0));
  auto it = v.assignment.begin();
  for (const auto& [id, lu] : u.assignment) {
    if (it->first != id)
      throw IdMismatch("labeling ids diverge at \"" + id + "\"");
    ++table[static_cast<std::size_t>(lu)][static_cast<std::size_t>(it->second)];
    ++it;
  }

  std::vector<long> a(static_cast<std::size_t>(u.k), 0);
  std::vector<long> b(static_cast<std::size_t>(v.k), 0);
  for (std::size_t i = 0; i < table.size(); ++i)
    for (std::size_t j = 0; j < table[i].size(); ++j) {
      a[i] += table[i][j];
      b[j] += table[i][j];
    }

  double mi = mutual_information(table);
  double emi = expected_mutual_information(a, b);
  double denom = 0.5 * (entropy(a) + entropy(b)) - emi;
  if (std::fabs(denom) < 1e-12) {
    std::cerr << "warning: degenerate labeling comparison (no entropy to "
                 "adjust); AMI defined as 0\n";
    return 0.0;
  }
  return std::min(1.0, (mi - emi) / denom);
}

std::string labeling_to_tsv(const Labeling& L) {
  std::string out;
  for (const auto& [id, label] : L.assignment)
    out += id + "\t" + std::to_string(label) + "\n";
  return out;
}

Labeling labeling_from_tsv(const std::string& text) {
  Labeling L;
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  int max_label = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw ParseError("expected id<TAB>label", "labeling", lineno);
    std::string id = line.substr(0, tab);
    std::string rest = line.substr(tab + 1);
    int label = 0;
    try {
      std::size_t pos = 0;
      label = std::stoi(rest, &pos);
      if (pos != rest.size()) throw std::invalid_argument(rest);
    } catch (const std::exception&) {
      throw ParseError("label is not an integer", "labeling", lineno);
    }
    if (!L.assignment.emplace(id, label).second) throw DuplicateEntryId(id);
    max_label = std::max(max_label, label);
  }
  L.k = max_label + 1;
  L.validate();
  return L;
}

}  // namespace protophon
