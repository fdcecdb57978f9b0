// Serial reference versus OpenMP kernels for both first-stage designs.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "crc/reference.hpp"
#include "crc/rng.hpp"
#include "crc/simulation.hpp"
#include "crc/stats.hpp"

namespace {

const crc::FrequencyGrid& grid() {
  static const crc::FrequencyGrid g = crc::build_frequency_grid(4.0, 101, crc::WeightKind::kStandardNormal);
  return g;
}

crc::DifferencedSample irregular_sample(std::size_t n) {
  return crc::simulate(crc::dgp_preset("a"), n, 7).sample;
}

crc::IrregularConfig irregular_config(const crc::DifferencedSample& s) {
  crc::IrregularConfig c;
  c.tau_x = crc::tau_x_rule(s.x, 4.0);
  c.h0 = c.tau_x;
  c.bandwidth = crc::NumeratorBandwidth::fixed(0.5);
  return c;
}

crc::StackedSample regular_sample(std::size_t n) {
  crc::Engine rng = crc::make_engine(11, {});
  std::normal_distribution<double> z(0.0, 1.0);
  crc::StackedSample s;
  for (std::size_t i = 0; i < n; ++i) {
    const double x1 = z(rng), x2 = z(rng), b = 0.5 + 0.5 * z(rng);
    s.x1.push_back(x1);
    s.x2.push_back(x2);
    s.y1.push_back(b * x1 + z(rng));
    s.y2.push_back(b * x2 + z(rng));
  }
  return s;
}

void BM_IrregularReference(benchmark::State& state) {
  const auto s = irregular_sample(state.range(0));
  const auto c = irregular_config(s);
  for (auto _ : state) benchmark::DoNotOptimize(crc::reference::first_stage_irregular(s, c, grid()));
}

void BM_IrregularKernel(benchmark::State& state) {
  const auto s = irregular_sample(state.range(0));
  const auto c = irregular_config(s);
  omp_set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(crc::first_stage_irregular(s, c, grid()));
}

void BM_RegularReference(benchmark::State& state) {
  const auto s = regular_sample(state.range(0));
  const crc::RegularConfig c{0.1, 0.25, 1e-4};
  for (auto _ : state) benchmark::DoNotOptimize(crc::reference::first_stage_regular(s, c, grid()));
}

void BM_RegularKernel(benchmark::State& state) {
  const auto s = regular_sample(state.range(0));
  const crc::RegularConfig c{0.1, 0.25, 1e-4};
  omp_set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(crc::first_stage_regular(s, c, grid()));
}

}  // namespace

BENCHMARK(BM_IrregularReference)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_IrregularKernel)->ArgsProduct({{500, 2000}, {1, 2, 4}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RegularReference)->Arg(500)->Arg(1358)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RegularKernel)->ArgsProduct({{500, 1358}, {1, 2, 4}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
