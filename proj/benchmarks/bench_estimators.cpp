// Microbenchmarks for the hot paths: map evaluation, cocycle volume steps,
// bundle estimation, Bowen distances, and disk quadrature.

#include <benchmark/benchmark.h>

#include "torusdyn/bundles.hpp"
#include "torusdyn/entropy.hpp"
#include "torusdyn/growth.hpp"
#include "torusdyn/multilinear.hpp"
#include "torusdyn/rng.hpp"
#include "torusdyn/system.hpp"

namespace {

using namespace torusdyn;

IMat cat_matrix() {
  IMat a(2, 2);
  a << 2, 1, 1, 1;
  return a;
}

TorusMap perturbed_cat() {
  return TorusMap::perturbed(cat_matrix(), {Mode{0.02, 0, {1, 0}, 0.0}}, 0.5);
}

void BM_apply_perturbed(benchmark::State& state) {
  const TorusMap f = perturbed_cat();
  Point x = Point::canonical((Vec(2) << 0.37, 0.58).finished());
  for (auto _ : state) {
    x = f.apply(x);
    benchmark::DoNotOptimize(x.coords.data());
  }
}
BENCHMARK(BM_apply_perturbed);

void BM_newton_inverse(benchmark::State& state) {
  const TorusMap f = perturbed_cat();
  Point x = Point::canonical((Vec(2) << 0.37, 0.58).finished());
  for (auto _ : state) {
    x = f.apply_inverse(x);
    benchmark::DoNotOptimize(x.coords.data());
  }
}
BENCHMARK(BM_newton_inverse);

void BM_cocycle_volume(benchmark::State& state) {
  const TorusMap f = perturbed_cat();
  const Point x = Point::canonical((Vec(2) << 0.37, 0.58).finished());
  const Subspace F = Subspace::span((Vec(2) << 0.85, 0.53).finished());
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(log_cocycle_volume(f, x, F, n));
}
BENCHMARK(BM_cocycle_volume)->Arg(5)->Arg(20);

void BM_estimate_unstable(benchmark::State& state) {
  const TorusMap f = perturbed_cat();
  const Point x = Point::canonical((Vec(2) << 0.37, 0.58).finished());
  for (auto _ : state)
    benchmark::DoNotOptimize(estimate_unstable(f, x, 1, 60, 3));
}
BENCHMARK(BM_estimate_unstable);

void BM_bowen_distance(benchmark::State& state) {
  const TorusMap f = perturbed_cat();
  const Point x = Point::canonical((Vec(2) << 0.37, 0.58).finished());
  const Point y = Point::canonical((Vec(2) << 0.41, 0.55).finished());
  for (auto _ : state)
    benchmark::DoNotOptimize(bowen_distance(f, x, y, 10, 0.1));
}
BENCHMARK(BM_bowen_distance);

void BM_separated_count(benchmark::State& state) {
  const TorusMap f = TorusMap::linear(cat_matrix());
  MeasureSampler sampler;
  sampler.n_samples = 300;
  sampler.seed = 5;
  const std::vector<Point> pts = draw_sample(f, sampler);
  for (auto _ : state)
    benchmark::DoNotOptimize(separated_count(f, pts, 8, 0.1));
}
BENCHMARK(BM_separated_count);

void BM_exterior_power(benchmark::State& state) {
  Rng rng(11);
  Mat a(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) a(i, j) = rng.uniform(-1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(exterior_power(a, 2));
}
BENCHMARK(BM_exterior_power);

void BM_leaf_disk_volume(benchmark::State& state) {
  const TorusMap f = perturbed_cat();
  const Point x = Point::canonical((Vec(2) << 0.37, 0.58).finished());
  const ParamDisk base = make_leaf_disk(f, x, 1, 1.0, 20, 60, 3);
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    ParamDisk d = base;  // refinement mutates, so start fresh each pass
    benchmark::DoNotOptimize(log_disk_volume(f, d, n, 1e-2));
  }
}
BENCHMARK(BM_leaf_disk_volume)->Arg(2)->Arg(6);

}  // namespace

BENCHMARK_MAIN();
