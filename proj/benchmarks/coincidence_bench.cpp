#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>
#include <vector>

#include "qtb/coincidence.hpp"

namespace {

std::vector<std::int64_t> random_stream(std::size_t n, double rate_hz, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> gap(rate_hz * 1e-12);
  std::vector<std::int64_t> tags;
  tags.reserve(n);
  double t = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    t += gap(rng);
    tags.push_back(static_cast<std::int64_t>(t));
  }
  return tags;
}

void BM_CountCoincidences(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const auto a = random_stream(n, 1e6, 1);
  const auto b = random_stream(n, 1e6, 2);
  for (auto _ : state) {
    auto result = qtb::count_coincidences(a, b, 1000, 0, 1.0);
    benchmark::DoNotOptimize(result);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * 2 * n));
}

void BM_DelayHistogram(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const auto a = random_stream(n, 1e6, 3);
  const auto b = random_stream(n, 1e6, 4);
  for (auto _ : state) {
    auto h = qtb::delay_histogram(a, b, 101, 20000);
    benchmark::DoNotOptimize(h);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * 2 * n));
}

}  // namespace

BENCHMARK(BM_CountCoincidences)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_DelayHistogram)->Arg(1 << 16)->Arg(1 << 20);
