#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "protophon/cluster.hpp"
#include "protophon/errors.hpp"
#include "protophon/phonology.hpp"
#include "protophon/rng.hpp"
#include "protophon/synth.hpp"
#include "test_support.hpp"

using namespace protophon;

namespace {

std::string id_of(int i) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "p%03d", i);
  return buf;
}

// Dense random labeling: the first k ids pin down every label.
Labeling random_labeling(int n, int k, Rng& rng) {
  Labeling L;
  L.k = k;
  for (int i = 0; i < n; ++i)
    L.assignment[id_of(i)] =
        i < k ? i : static_cast<int>(rng.uniform_index(static_cast<std::size_t>(k)));
  return L;
}

std::vector<std::vector<long>> contingency(const std::vector<int>& u,
                                           const std::vector<int>& v, int ku,
                                           int kv) {
  std::vector<std::vector<long>> t(static_cast<std::size_t>(ku),
                                   std::vector<long>(static_cast<std::size_t>(kv), 0));
  for (std::size_t i = 0; i < u.size(); ++i)
    ++t[static_cast<std::size_t>(u[i])][static_cast<std::size_t>(v[i])];
  return t;
}

}  // namespace

TEST_SUITE("cluster") {

TEST_CASE("k equal to the point count isolates every point") {
  const PhonemeInventory& inv = full_inventory();
  std::map<std::string, FeatureVector> pts;
  for (int i = 0; i < 6; ++i)
    pts[id_of(i)] = inv.entries[static_cast<std::size_t>(11 * i + 2)].vector;
  Labeling L = kmeans(pts, 6, 3, 4);
  CHECK(L.k == 6);
  CHECK(L.wcss == 0.0);
  std::vector<bool> used(6, false);
  for (const auto& [id, label] : L.assignment) {
    (void)id;
    CHECK(!used[static_cast<std::size_t>(label)]);
    used[static_cast<std::size_t>(label)] = true;
  }
}

TEST_CASE("well-separated blobs come back pure") {
  std::map<std::string, FeatureVector> pts;
  for (int i = 0; i < 5; ++i) {
    FeatureVector a;
    a[0] = 0.01 * i;
    pts["a" + std::to_string(i)] = a;
    FeatureVector b;
    b[0] = 0.01 * i;
    b[3] = 8.0;
    pts["b" + std::to_string(i)] = b;
  }
  Labeling L = kmeans(pts, 2, 1, 5);
  for (int i = 1; i < 5; ++i) {
    CHECK(L.assignment.at("a" + std::to_string(i)) == L.assignment.at("a0"));
    CHECK(L.assignment.at("b" + std::to_string(i)) == L.assignment.at("b0"));
  }
  CHECK(L.assignment.at("a0") != L.assignment.at("b0"));
  // Canonical labels start at the alphabetically first id.
  CHECK(L.assignment.at("a0") == 0);
}

TEST_CASE("kmeans is deterministic for a fixed seed") {
  Rng rng(13);
  std::map<std::string, FeatureVector> pts;
  const PhonemeInventory& inv = full_inventory();
  for (int i = 0; i < 40; ++i)
    pts[id_of(i)] = inv.entries[rng.uniform_index(inv.size())].vector;
  Labeling a = kmeans(pts, 5, 21, 8);
  Labeling b = kmeans(pts, 5, 21, 8);
  CHECK(a.assignment == b.assignment);
  CHECK(a.wcss == b.wcss);
  CHECK(a.k == 5);
  a.validate();
}

TEST_CASE("more clusters than distinct points is refused") {
  std::map<std::string, FeatureVector> pts;
  FeatureVector v;
  v[0] = 1;
  pts["a"] = v;
  pts["b"] = v;
  FeatureVector w;
  w[0] = 2;
  pts["c"] = w;
  CHECK_THROWS_AS(kmeans(pts, 3, 0, 2), TooFewPoints);
  CHECK(kmeans(pts, 2, 0, 2).k == 2);
  CHECK_THROWS_AS(kmeans({}, 1, 0, 1), TooFewPoints);
  CHECK_THROWS_AS(kmeans(pts, 0, 0, 1), TooFewPoints);
}

TEST_CASE("zero-noise reconstruction clusters to the true initials") {
  GenerationConfig cfg;
  cfg.m_min = cfg.m_max = 37;
  cfg.n_min = cfg.n_max = 2;
  cfg.num_varieties = 2;
  cfg.seed = 71;
  SyntheticDataset ds = generate(cfg);
  Reconstruction recon = testutil::solve_dataset(ds, 300.0);
  REQUIRE(equal_rate(recon, testutil::truth_of(ds)) == 1.0);

  Labeling found = kmeans(recon, 37, 5, 4);
  Labeling truth = labels_from_categories(ds.system.characters);
  CHECK(ami(found, truth) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("identical labelings score one") {
  Rng rng(31);
  for (int t = 0; t < 4; ++t) {
    Labeling u = random_labeling(60, 5, rng);
    CHECK(ami(u, u) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("independent labelings score near zero") {
  Rng rng(47);
  for (int t = 0; t < 3; ++t) {
    Labeling u = random_labeling(1000, 10, rng);
    Labeling v = random_labeling(1000, 10, rng);
    CHECK(std::fabs(ami(u, v)) < 0.05);
  }
}

TEST_CASE("expected mutual information matches direct enumeration") {
  // Two clusterings of four points, one point moved across. The permutation
  // model fixes both marginals and averages MI over every arrangement.
  std::vector<int> u = {0, 0, 1, 1};
  std::vector<int> v = {0, 1, 1, 1};
  std::vector<long> a = {2, 2}, b = {1, 3};

  std::vector<int> perm = v;
  std::sort(perm.begin(), perm.end());
  double total = 0;
  long count = 0;
  do {
    total += mutual_information(contingency(u, perm, 2, 2));
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  double enumerated = total / static_cast<double>(count);

  CHECK(expected_mutual_information(a, b) ==
        doctest::Approx(enumerated).epsilon(1e-12));

  // The adjusted score assembled from the exposed pieces equals ami().
  Labeling U, V;
  U.k = V.k = 2;
  for (int i = 0; i < 4; ++i) {
    U.assignment[id_of(i)] = u[static_cast<std::size_t>(i)];
    V.assignment[id_of(i)] = v[static_cast<std::size_t>(i)];
  }
  double mi = mutual_information(contingency(u, v, 2, 2));
  double emi = expected_mutual_information(a, b);
  double denom = 0.5 * (entropy(a) + entropy(b)) - emi;
  CHECK(ami(U, V) == doctest::Approx((mi - emi) / denom).epsilon(1e-12));
}

TEST_CASE("expectation oracle on a three-cluster example") {
  std::vector<int> u = {0, 0, 0, 1, 1, 2};
  std::vector<int> v = {0, 1, 2, 2, 1, 1};
  std::vector<long> a = {3, 2, 1}, b = {1, 3, 2};
  std::vector<int> perm = v;
  std::sort(perm.begin(), perm.end());
  double total = 0;
  long count = 0;
  do {
    total += mutual_information(contingency(u, perm, 3, 3));
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  CHECK(expected_mutual_information(a, b) ==
        doctest::Approx(total / static_cast<double>(count)).epsilon(1e-12));
}

TEST_CASE("ami is symmetric and label-permutation invariant") {
  Rng rng(59);
  for (int t = 0; t < 3; ++t) {
    Labeling u = random_labeling(200, 4, rng);
    Labeling v = random_labeling(200, 7, rng);
    double base = ami(u, v);
    CHECK(base == doctest::Approx(ami(v, u)).epsilon(1e-10));

    Labeling w = v;  // rotate labels: invariant under renaming
    for (auto& [id, label] : w.assignment) {
      (void)id;
      label = (label + 3) % 7;
    }
    CHECK(ami(u, w) == doctest::Approx(base).epsilon(1e-10));
    CHECK(base <= 1.0);
  }
}

TEST_CASE("degenerate single-cluster comparisons are defined as zero") {
  Labeling u;
  u.k = 1;
  for (int i = 0; i < 5; ++i) u.assignment[id_of(i)] = 0;
  CHECK(ami(u, u) == 0.0);

  Rng rng(61);
  Labeling v = random_labeling(5, 3, rng);
  CHECK(ami(u, v) == 0.0);
}

TEST_CASE("mismatched id sets are rejected") {
  Rng rng(67);
  Labeling u = random_labeling(10, 3, rng);
  Labeling v = random_labeling(11, 3, rng);
  CHECK_THROWS_AS(ami(u, v), IdMismatch);
}

TEST_CASE("labeling text round-trips and malformed text is rejected") {
  Rng rng(73);
  Labeling L = random_labeling(25, 4, rng);
  Labeling back = labeling_from_tsv(labeling_to_tsv(L));
  CHECK(back.assignment == L.assignment);
  CHECK(back.k == L.k);

  CHECK_THROWS_AS(labeling_from_tsv("no_tab_here\n"), ParseError);
  CHECK_THROWS_AS(labeling_from_tsv("a\tx\n"), ParseError);
  CHECK_THROWS_AS(labeling_from_tsv("a\t0\na\t1\n"), DuplicateEntryId);
  // Labels {0,2} leave 1 unused: not a dense labeling.
  CHECK_THROWS_AS(labeling_from_tsv("a\t0\nb\t2\n"), Error);
}

}  // TEST_SUITE
