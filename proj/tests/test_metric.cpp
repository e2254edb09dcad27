#include "doctest.h"
#include "protophon/metric.hpp"
#include "protophon/phonology.hpp"
#include "protophon/rng.hpp"

#include <cmath>

using namespace protophon;

namespace {

// Uniform vector inside the declared feature box.
FeatureVector random_in_range(Rng& rng) {
  const FeatureSchema& s = schema();
  FeatureVector f;
  for (int k = 0; k < kFeatureCount; ++k) {
    const FeatureDef& d = s.features[k];
    f[k] = d.lo + rng.uniform_real() * (d.hi - d.lo);
  }
  return f;
}

}  // namespace

TEST_SUITE("metric") {

TEST_CASE("distance between m and f is exactly 9") {
  FeatureVector m = parse_phoneme("m");
  FeatureVector f = parse_phoneme("f");
  CHECK(distance(m, f) == 9.0);

  // Term-by-term decomposition, all integer arithmetic.
  CHECK(base_distance(m[kContinuant], f[kContinuant]) == 2.0);
  CHECK(base_distance(m[kSonority], f[kSonority]) == 1.0);
  CHECK(base_distance(m[kVoice], f[kVoice]) == 2.0);
  CHECK(dependent_distance(m, f, kDelayedRelease) == 2.0);  // sonority differs -> c = 1
  CHECK(dependent_distance(m, f, kLabiodental) == 2.0);     // labial agrees -> plain |Δ|
  CHECK(dependent_distance(m, f, kAnterior) == 0.0);
  CHECK(dependent_distance(m, f, kHigh) == 0.0);
}

TEST_CASE("dependent distance ramps with the governing feature") {
  FeatureVector a, b;
  a[kLabial] = 1;
  a[kLabiodental] = 1;
  b[kLabial] = 0.5;
  b[kLabiodental] = 1;
  // c = 0.5: g = 0.5 * 2 + 0.5 * 0 = 1
  CHECK(dependent_distance(a, b, kLabiodental) == doctest::Approx(1.0).epsilon(1e-12));
  b[kLabial] = -1;  // c saturates at 1
  CHECK(dependent_distance(a, b, kLabiodental) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("metric axioms over seeded in-range triples") {
  Rng rng(20260822);
  const int kTriples = 100000;
  double worst_triangle = 0;
  for (int i = 0; i < kTriples; ++i) {
    FeatureVector x = random_in_range(rng);
    FeatureVector y = random_in_range(rng);
    FeatureVector z = random_in_range(rng);

    double dxy = distance(x, y);
    double dyx = distance(y, x);
    double dxz = distance(x, z);
    double dzy = distance(z, y);

    REQUIRE(dxy >= 0.0);
    REQUIRE(std::abs(dxy - dyx) <= 1e-12);
    double slack = dxz + dzy - dxy;
    if (-slack > worst_triangle) worst_triangle = -slack;
    REQUIRE(slack >= -1e-12);
  }
  CHECK(worst_triangle <= 1e-12);

  // Identity of indiscernibles on a sample.
  FeatureVector x = random_in_range(rng);
  CHECK(distance(x, x) == 0.0);
}

TEST_CASE("zero distance implies equal vectors on inventory pairs") {
  const PhonemeInventory& inv = full_inventory();
  for (std::size_t i = 0; i < inv.size(); ++i)
    for (std::size_t j = i + 1; j < inv.size(); ++j)
      CHECK(distance(inv.entries[i].vector, inv.entries[j].vector) > 0.0);
}

TEST_CASE("config hook swaps the base distance") {
  MetricConfig cfg;
  cfg.base = [](double a, double b) { return (a - b) * (a - b); };
  FeatureVector m = parse_phoneme("m");
  FeatureVector f = parse_phoneme("f");
  // continuant 4, sonority 1, voice 4; dr: c=min(1,1)=1 -> s=2;
  // labiodental: c=0 -> (1-(-1))^2=4. Total 4+1+4+2+4 = 15.
  CHECK(distance(m, f, cfg) == doctest::Approx(15.0).epsilon(1e-12));
  // Default-constructed config behaves like the plain metric.
  MetricConfig plain;
  CHECK(distance(m, f, plain) == 9.0);
}

}  // TEST_SUITE
