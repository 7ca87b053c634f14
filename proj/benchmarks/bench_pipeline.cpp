// Microbenchmarks for the three hot stages: signature hashing, graph
// construction from bucketed signatures, and greedy selection as the
// service catalog grows.
#include <benchmark/benchmark.h>

#include <vector>

#include "pdsr/federation.hpp"
#include "pdsr/graph.hpp"
#include "pdsr/lsh.hpp"
#include "pdsr/recommend.hpp"
#include "pdsr/rng.hpp"

namespace {

pdsr::PlatformDataset make_platform(uint32_t services, size_t users,
                                    uint64_t seed, double missing = 0.4,
                                    uint32_t platform_id = 1) {
  pdsr::PlatformDataset p;
  p.platform_id = platform_id;
  p.user_ids.resize(users);
  for (size_t j = 0; j < users; ++j) p.user_ids[j] = static_cast<uint32_t>(j);
  p.service_count = services;
  p.qos.resize(static_cast<size_t>(services) * users);
  pdsr::Rng rng(seed);
  for (auto& v : p.qos) {
    v = rng.uniform() < missing ? 0.0 : rng.uniform(0.05, 1.0);
  }
  return p;
}

void BM_HashSignatures(benchmark::State& state) {
  const auto services = static_cast<uint32_t>(state.range(0));
  const pdsr::PlatformDataset platform = make_platform(services, 128, 0xB111);
  const pdsr::LshFamily family =
      pdsr::sample_family(platform.user_count(), 3, 0xB112, 1);
  std::vector<double> column(platform.user_count());
  for (auto _ : state) {
    for (uint32_t s = 0; s < services; ++s) {
      for (size_t j = 0; j < column.size(); ++j) column[j] = platform.at(s, j);
      benchmark::DoNotOptimize(pdsr::hash_vector(family, s, column));
    }
  }
  state.SetItemsProcessed(state.iterations() * services);
}
BENCHMARK(BM_HashSignatures)->Arg(512)->Arg(2048)->Arg(5825);

void BM_GraphBuild(benchmark::State& state) {
  const auto services = static_cast<uint32_t>(state.range(0));
  const std::vector<pdsr::PlatformDataset> platforms = {
      make_platform(services, 135, 0xB210, 0.4, 1),
      make_platform(services, 204, 0xB211, 0.4, 2)};
  const std::vector<size_t> hash_counts = {3, 3};
  uint64_t seed = 0xB212;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        pdsr::build_graph(platforms, hash_counts, 9, seed++));
  }
}
BENCHMARK(BM_GraphBuild)->Arg(512)->Arg(2048)->Arg(5825)
    ->Unit(benchmark::kMillisecond);

void BM_GreedySelection(benchmark::State& state) {
  const auto services = static_cast<uint32_t>(state.range(0));
  const pdsr::PlatformDataset platform = make_platform(services, 64, 0xB310, 0.5);
  const std::vector<pdsr::PlatformDataset> platforms = {platform};
  const auto graph = pdsr::build_graph(platforms, std::vector<size_t>{3}, 9,
                                       0xB311);
  const auto pool = pdsr::CandidatePool::build(graph, platform, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pdsr::greedy_topk(graph, pool, 5, 0.1, 0.3));
  }
  state.SetLabel(std::to_string(pool.size()) + " candidates");
}
BENCHMARK(BM_GreedySelection)->Arg(250)->Arg(500)->Arg(1000)->Arg(2000);

}  // namespace

BENCHMARK_MAIN();
