#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "protophon/errors.hpp"
#include "protophon/geometry.hpp"
#include "protophon/rng.hpp"

using namespace protophon;

namespace {

double euclid(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// All-pairwise-one disagreement over n varieties: a regular simplex.
DisagreementMatrix simplex_matrix(std::size_t n) {
  DisagreementMatrix D;
  for (std::size_t i = 0; i < n; ++i) D.names.push_back("v" + std::to_string(i));
  D.d.assign(n, std::vector<double>(n, 1.0));
  for (std::size_t i = 0; i < n; ++i) D.d[i][i] = 0;
  return D;
}

DisagreementMatrix from_points(const std::vector<std::vector<double>>& pts) {
  DisagreementMatrix D;
  for (std::size_t i = 0; i < pts.size(); ++i) D.names.push_back("p" + std::to_string(i));
  D.d.assign(pts.size(), std::vector<double>(pts.size(), 0));
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j) D.d[i][j] = euclid(pts[i], pts[j]);
  return D;
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("identical varieties disagree nowhere") {
  ReadingTable t = {{"c1", "p"}, {"c2", "m"}, {"c3", "s"}};
  DisagreementMatrix D = disagreement({t, t, t});
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(D.d[i][j] == 0.0);
  CHECK(pdia_lower_bound({t, t, t}) == 0.0);
}

TEST_CASE("totally different varieties disagree everywhere") {
  ReadingTable a = {{"c1", "p"}, {"c2", "t"}};
  ReadingTable b = {{"c1", "b"}, {"c2", "d"}};
  ReadingTable c = {{"c1", "m"}, {"c2", "n"}};
  DisagreementMatrix D = disagreement({a, b, c});
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(D.d[i][j] == (i == j ? 0.0 : 1.0));
}

TEST_CASE("disagreement counts exactly the changed characters") {
  ReadingTable a, b;
  for (int i = 0; i < 10; ++i) {
    std::string id = "c" + std::to_string(i);
    a[id] = "p";
    b[id] = i < 3 ? "k" : "p";  // 3 of 10 differ
  }
  DisagreementMatrix D = disagreement({a, b}, {"left", "right"});
  CHECK(D.names[0] == "left");
  CHECK(D.d[0][1] == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("shared-character preconditions are enforced") {
  ReadingTable a = {{"x", "p"}};
  ReadingTable b = {{"y", "p"}};
  CHECK_THROWS_AS(disagreement({a, b}), EmptyIntersection);
  CHECK_THROWS_AS(disagreement({a}), Error);
}

TEST_CASE("malformed matrices are rejected") {
  DisagreementMatrix D = simplex_matrix(3);
  D.d[0][1] = 0.4;  // breaks symmetry
  CHECK_THROWS_AS(D.validate(), Error);

  D = simplex_matrix(3);
  D.d[1][1] = 0.2;
  CHECK_THROWS_AS(D.validate(), Error);

  // 1 > 0.1 + 0.1: fractions cannot skip the middle variety.
  D = simplex_matrix(3);
  D.d[0][1] = D.d[1][0] = 0.1;
  D.d[1][2] = D.d[2][1] = 0.1;
  CHECK_THROWS_AS(D.validate(), Error);
}

TEST_CASE("two points embed at their stated distance") {
  DisagreementMatrix D = simplex_matrix(2);
  Embedding e = mds_embed(D);
  CHECK(e.distortion == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(euclid(e.points[0], e.points[1]) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("three mutually distant points embed as an equilateral triangle") {
  Embedding e = mds_embed(simplex_matrix(3));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i + 1; j < 3; ++j)
      CHECK(euclid(e.points[i], e.points[j]) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("euclidean distance matrices round-trip through the embedding") {
  Rng rng(17);
  std::vector<std::vector<double>> pts(8, std::vector<double>(4));
  for (auto& p : pts)
    for (double& x : p) x = 0.3 * rng.uniform_real();
  DisagreementMatrix D = from_points(pts);
  Embedding e = mds_embed(D);
  CHECK(e.distortion < 1e-8);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j)
      CHECK(euclid(e.points[i], e.points[j]) ==
            doctest::Approx(D.d[i][j]).epsilon(1e-6).scale(1.0));
}

TEST_CASE("non-euclidean input is clamped and reported, not fatal") {
  // A star metric: three leaves pairwise at 1 but a hub at 0.5 from each.
  // The hub would need to sit below the triangle's circumradius 0.577.
  DisagreementMatrix D = simplex_matrix(4);
  for (std::size_t leaf = 1; leaf < 4; ++leaf)
    D.d[0][leaf] = D.d[leaf][0] = 0.5;
  Embedding e = mds_embed(D);
  CHECK(e.distortion > 1e-6);
  CHECK(e.points.size() == 4);
}

TEST_CASE("two-point ball sits at the midpoint") {
  Ball b = min_enclosing_ball({{0, 0, 0}, {1, 0, 0}});
  CHECK(b.radius == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(b.center[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("equilateral triangle ball is the circumcircle") {
  Ball b = min_enclosing_ball({{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2}});
  CHECK(std::fabs(b.radius - 1 / std::sqrt(3.0)) < 1e-9);
}

TEST_CASE("regular simplexes have the closed-form radius") {
  for (std::size_t n : {3u, 5u, 10u, 20u}) {
    Embedding e = mds_embed(simplex_matrix(n));
    Ball b = min_enclosing_ball(e.points);
    double expected = std::sqrt((static_cast<double>(n) - 1) / (2.0 * static_cast<double>(n)));
    CHECK(std::fabs(b.radius - expected) < 1e-6);
  }
}

TEST_CASE("random balls are certified by coverage and perturbation") {
  Rng rng(23);
  std::vector<std::vector<double>> pts(20, std::vector<double>(10));
  for (auto& p : pts)
    for (double& x : p) x = rng.uniform_real() * 2 - 1;
  Ball b = min_enclosing_ball(pts);

  double max_d = 0, max_pair = 0;
  for (const auto& p : pts) max_d = std::max(max_d, euclid(b.center, p));
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      max_pair = std::max(max_pair, euclid(pts[i], pts[j]));

  CHECK(max_d == doctest::Approx(b.radius).epsilon(1e-12));  // exact coverage
  CHECK(b.radius >= 0.5 * max_pair - 1e-9);                  // ball sandwich
  CHECK(b.radius <= max_pair + 1e-9);

  // No nearby center does better: the minimum is at the returned point.
  for (int t = 0; t < 30; ++t) {
    std::vector<double> c = b.center;
    for (double& x : c) x += (rng.uniform_real() * 2 - 1) * 1e-3;
    double r = 0;
    for (const auto& p : pts) r = std::max(r, euclid(c, p));
    CHECK(r >= b.radius - 1e-9);
  }
}

TEST_CASE("ball is invariant under permutation and translation") {
  Rng rng(29);
  std::vector<std::vector<double>> pts(12, std::vector<double>(5));
  for (auto& p : pts)
    for (double& x : p) x = rng.uniform_real();
  Ball base = min_enclosing_ball(pts);

  std::vector<std::vector<double>> reversed(pts.rbegin(), pts.rend());
  CHECK(min_enclosing_ball(reversed).radius ==
        doctest::Approx(base.radius).epsilon(1e-9));

  std::vector<std::vector<double>> moved = pts;
  for (auto& p : moved)
    for (std::size_t j = 0; j < p.size(); ++j) p[j] += 7.5;
  Ball shifted = min_enclosing_ball(moved);
  CHECK(shifted.radius == doctest::Approx(base.radius).epsilon(1e-9));
  for (std::size_t j = 0; j < 5; ++j)
    CHECK(shifted.center[j] == doctest::Approx(base.center[j] + 7.5).epsilon(1e-6));
}

TEST_CASE("a single pairwise disagreement is halved") {
  ReadingTable a, b;
  for (int i = 0; i < 10; ++i) {
    std::string id = "c" + std::to_string(i);
    a[id] = "p";
    b[id] = i < 6 ? "t" : "p";  // disagreement 0.6
  }
  CHECK(pdia_lower_bound({a, b}) == doctest::Approx(0.3).epsilon(1e-9));
}

TEST_CASE("matrix text round-trips and rejects corruption") {
  DisagreementMatrix D = simplex_matrix(3);
  D.d[0][1] = D.d[1][0] = 0.25;
  D.d[0][2] = D.d[2][0] = 0.875;
  DisagreementMatrix back = matrix_from_tsv(matrix_to_tsv(D));
  CHECK(back.names == D.names);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(back.d[i][j] == D.d[i][j]);

  CHECK_THROWS_AS(matrix_from_tsv(""), ParseError);
  CHECK_THROWS_AS(matrix_from_tsv("\tv0\nwrong\t0\n"), ParseError);
  CHECK_THROWS_AS(matrix_from_tsv("\tv0\nv0\tabc\n"), ParseError);
  CHECK_THROWS_AS(matrix_from_tsv("\tv0\tv1\nv0\t0\t0.5\n"), Error);
}

}  // TEST_SUITE
