// Microbenchmarks for the hot paths: feature metric evaluation, model
// construction, and the small-instance solver loop. Run with
// --benchmark_filter=<regex> to narrow.

#include <benchmark/benchmark.h>

#include <vector>

#include "protophon/cluster.hpp"
#include "protophon/geometry.hpp"
#include "protophon/metric.hpp"
#include "protophon/milp.hpp"
#include "protophon/phonology.hpp"
#include "protophon/rng.hpp"
#include "protophon/solver.hpp"

namespace {

using namespace protophon;

std::vector<FeatureVector> random_vectors(std::size_t n, std::uint64_t seed) {
  const FeatureSchema& sch = schema();
  Rng rng(seed);
  std::vector<FeatureVector> out(n);
  for (FeatureVector& v : out)
    for (int j = 0; j < kFeatureCount; ++j) {
      const FeatureDef& f = sch.features[static_cast<std::size_t>(j)];
      v[j] = f.lo + (f.hi - f.lo) * rng.uniform_real();
    }
  return out;
}

ReconstructionProblem small_instance(std::uint64_t seed) {
  PhonemeInventory inv =
      full_inventory().subset({"p", "b", "m", "f", "t", "d", "n", "s"});
  Rng rng(seed);
  ReconstructionProblem rp;
  rp.varieties = {"v0", "v1"};
  for (int e = 0; e < 3; ++e) {
    ReconstructionEntry en;
    en.id = "x" + std::to_string(e);
    en.character = en.id;
    for (int v = 0; v < 2; ++v)
      en.readings[v] = inv.entries[rng.uniform_index(inv.size())].vector;
    rp.entries.push_back(std::move(en));
  }
  rp.lambda_fq = 0.5;
  rp.k_medial = 1.0;
  return rp;
}

void BM_distance(benchmark::State& state) {
  std::vector<FeatureVector> vs = random_vectors(256, 1);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(distance(vs[i & 255], vs[(i + 1) & 255]));
    ++i;
  }
}
BENCHMARK(BM_distance);

void BM_soundness(benchmark::State& state) {
  std::vector<FeatureVector> vs = random_vectors(256, 2);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(soundness_distance(vs[i & 255]));
    ++i;
  }
}
BENCHMARK(BM_soundness);

void BM_parse_phoneme(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(parse_phoneme("tʃʰ"));
}
BENCHMARK(BM_parse_phoneme);

void BM_nearest_phoneme(benchmark::State& state) {
  const PhonemeInventory& inv = full_inventory();
  std::vector<FeatureVector> vs = random_vectors(256, 3);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(nearest_phoneme(vs[i & 255], inv));
    ++i;
  }
}
BENCHMARK(BM_nearest_phoneme);

void BM_build_model(benchmark::State& state) {
  ReconstructionProblem rp = small_instance(7);
  for (auto _ : state) benchmark::DoNotOptimize(build_model(rp));
}
BENCHMARK(BM_build_model)->Unit(benchmark::kMicrosecond);

void BM_solve_small(benchmark::State& state) {
  ReconstructionProblem rp = small_instance(7);
  MilpModel mm = build_model(rp);
  SolveOptions opts;
  opts.mip_gap = 0;
  for (auto _ : state) benchmark::DoNotOptimize(solve(mm, opts));
}
BENCHMARK(BM_solve_small)->Unit(benchmark::kMillisecond);

void BM_brute_force_small(benchmark::State& state) {
  PhonemeInventory inv =
      full_inventory().subset({"p", "b", "m", "f", "t", "d", "n", "s"});
  ReconstructionProblem rp = small_instance(7);
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_solve(rp, inv));
}
BENCHMARK(BM_brute_force_small)->Unit(benchmark::kMillisecond);

void BM_kmeans(benchmark::State& state) {
  std::vector<FeatureVector> vs =
      random_vectors(static_cast<std::size_t>(state.range(0)), 11);
  std::map<std::string, FeatureVector> points;
  for (std::size_t i = 0; i < vs.size(); ++i)
    points["p" + std::to_string(1000 + i)] = vs[i];
  for (auto _ : state)
    benchmark::DoNotOptimize(kmeans(points, 5, 0, 4));
}
BENCHMARK(BM_kmeans)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_min_enclosing_ball(benchmark::State& state) {
  Rng rng(13);
  std::vector<std::vector<double>> pts(50, std::vector<double>(10));
  for (auto& p : pts)
    for (double& x : p) x = rng.uniform_real();
  for (auto _ : state) benchmark::DoNotOptimize(min_enclosing_ball(pts));
}
BENCHMARK(BM_min_enclosing_ball)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
