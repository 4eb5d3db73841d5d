#include <benchmark/benchmark.h>

#include "ramsr/analysis.hpp"
#include "ramsr/cumulant_model.hpp"
#include "ramsr/experiments.hpp"

using namespace ramsr;

static void BM_CumulantRhs(benchmark::State& state) {
  const auto p = PhysicalParams::strontium_defaults();
  const CumulantModel m(build_cluster_grid(p, static_cast<int>(state.range(0)), 3), p);
  const auto y = m.product_state(2.0);
  StateVector dy(y.size());
  const Segment seg{1e-6, p.rabi, 0.0, 0.0, "drive"};
  for (auto _ : state) {
    m.rhs(seg, y, dy);
    benchmark::DoNotOptimize(dy.data());
  }
  state.counters["clusters"] = static_cast<double>(3 * state.range(0));
  state.counters["state_size"] = static_cast<double>(y.size());
}
BENCHMARK(BM_CumulantRhs)->Arg(4)->Arg(8)->Arg(16)->Arg(32);

static void BM_PiPulseRun(benchmark::State& state) {
  ExperimentConfig c;
  c.n_phase = static_cast<int>(state.range(0));
  c.n_doppler = 3;
  const Simulator sim(c);
  const auto seq = pi_pulse_sequence(c);
  for (auto _ : state) benchmark::DoNotOptimize(sim.run(seq).samples.size());
}
BENCHMARK(BM_PiPulseRun)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_FrequencyLocator(benchmark::State& state) {
  std::vector<double> peaks(216);
  for (std::size_t i = 0; i < peaks.size(); ++i) peaks[i] = 1.0 + 0.01 * static_cast<double>(i % 7);
  for (auto _ : state) benchmark::DoNotOptimize(frequency_locator(peaks).value);
}
BENCHMARK(BM_FrequencyLocator);
BENCHMARK_MAIN();
