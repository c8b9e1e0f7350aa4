#include "sda/algorithms.hpp"
#include "sda/analysis.hpp"

#include <benchmark/benchmark.h>

namespace {

sda::SyntheticInstance make_instance(int d) { return sda::generate_synthetic(d, 7); }

void bm_composite_map_simplex(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  const sda::Geometry geom = sda::Geometry::euclidean(d);
  const sda::Regularizer g = sda::Regularizer::simplex(1.0);
  sda::RngStream rng(3);
  const sda::Vector eta = rng.gaussian_vector(d);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sda::composite_map(geom, g, eta, 1.0));
  }
}
BENCHMARK(bm_composite_map_simplex)->Arg(100)->Arg(1000);

void bm_composite_map_entropy(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  const sda::Geometry geom = sda::Geometry::negative_entropy(d);
  const sda::Regularizer g = sda::Regularizer::simplex(1.0);
  sda::RngStream rng(3);
  const sda::Vector eta = rng.gaussian_vector(d);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sda::composite_map(geom, g, eta, 1.0));
  }
}
BENCHMARK(bm_composite_map_entropy)->Arg(100)->Arg(1000);

void bm_sda_least_squares_step(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto inst = make_instance(d);
  auto oracle = inst.make_stream(11);
  const sda::Geometry geom = sda::Geometry::euclidean(d);
  const sda::Regularizer g =
      sda::Regularizer::simplex(0.5 * inst.problem.theta_sigma().lpNorm<1>());
  sda::Vector theta = sda::default_start(geom, g);
  sda::Vector eta = theta;
  double tau = 0.0;
  const double gamma = 1.0 / (2.0 * inst.problem.sigma().trace());
  for (auto _ : state) {
    eta -= gamma * oracle.sample_grad(theta);
    tau += gamma;
    theta = sda::composite_map(geom, g, eta, tau);
    benchmark::DoNotOptimize(theta);
  }
}
BENCHMARK(bm_sda_least_squares_step)->Arg(20)->Arg(100);

void bm_spd_solve(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto inst = make_instance(d);
  sda::RngStream rng(5);
  const sda::Vector b = rng.gaussian_vector(d);
  for (auto _ : state) {
    benchmark::DoNotOptimize(inst.problem.sigma().solve(b));
  }
}
BENCHMARK(bm_spd_solve)->Arg(100);

void bm_lower_bound_exact(benchmark::State& state) {
  sda::LowerBoundInstance inst;
  inst.horizon = state.range(0);
  inst.gamma = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sda::lower_bound_exact(inst, inst.horizon));
  }
}
BENCHMARK(bm_lower_bound_exact)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
