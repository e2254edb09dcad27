#pragma once

#include <functional>

#include "protophon/phonology.hpp"

namespace protophon {

// Base distance f on single feature values.
inline double base_distance(double a, double b) { return a < b ? b - a : a - b; }

struct MetricConfig {
  // Hook for swapping the base distance; only the default is exercised by
  // the pipeline, but the distance definitions below honor it.
  std::function<double(double, double)> base;
};

// g for D-feature j: c * s_j + (1 - c) * f(F1^j, F2^j) with
// c = min(f over the governing feature, 1). Requires j dependent.
double dependent_distance(const FeatureVector& F1, const FeatureVector& F2, int j);
double dependent_distance(const FeatureVector& F1, const FeatureVector& F2, int j,
                          const MetricConfig& cfg);

// Full metric: base distance summed over I-features plus g over D-features.
double distance(const FeatureVector& F1, const FeatureVector& F2);
double distance(const FeatureVector& F1, const FeatureVector& F2, const MetricConfig& cfg);

// Plain vector norms used by evaluation and tests.
double l1_distance(const FeatureVector& a, const FeatureVector& b);
double l2_distance(const FeatureVector& a, const FeatureVector& b);

}  // namespace protophon
