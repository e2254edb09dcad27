#include "protophon/metric.hpp"

#include <cmath>

namespace protophon {

namespace {

inline double apply_base(const MetricConfig& cfg, double a, double b) {
  return cfg.base ? cfg.base(a, b) : base_distance(a, b);
}

}  // namespace

double dependent_distance(const FeatureVector& F1, const FeatureVector& F2, int j) {
  const FeatureSchema& s = schema();
  int t = s.tau(j);
  double c = base_distance(F1[t], F2[t]);
  if (c > 1) c = 1;
  return c * s.features[static_cast<std::size_t>(j)].s +
         (1 - c) * base_distance(F1[j], F2[j]);
}

double dependent_distance(const FeatureVector& F1, const FeatureVector& F2, int j,
                          const MetricConfig& cfg) {
  const FeatureSchema& s = schema();
  int t = s.tau(j);
  double c = apply_base(cfg, F1[t], F2[t]);
  if (c > 1) c = 1;
  return c * s.features[static_cast<std::size_t>(j)].s +
         (1 - c) * apply_base(cfg, F1[j], F2[j]);
}

double distance(const FeatureVector& F1, const FeatureVector& F2) {
  const FeatureSchema& s = schema();
  double total = 0;
  for (int k : s.independents) total += base_distance(F1[k], F2[k]);
  for (int j : s.dependents) total += dependent_distance(F1, F2, j);
  return total;
}

double distance(const FeatureVector& F1, const FeatureVector& F2, const MetricConfig& cfg) {
  const FeatureSchema& s = schema();
  double total = 0;
  for (int k : s.independents) total += apply_base(cfg, F1[k], F2[k]);
  for (int j : s.dependents) total += dependent_distance(F1, F2, j, cfg);
  return total;
}

double l1_distance(const FeatureVector& a, const FeatureVector& b) {
  double total = 0;
  for (int k = 0; k < kFeatureCount; ++k) total += base_distance(a[k], b[k]);
  return total;
}

double l2_distance(const FeatureVector& a, const FeatureVector& b) {
  double total = 0;
  for (int k = 0; k < kFeatureCount; ++k) {
    double d = a[k] - b[k];
    total += d * d;
  }
  return std::sqrt(total);
}

}  // namespace protophon
