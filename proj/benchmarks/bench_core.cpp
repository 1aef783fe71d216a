#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "hetdqcd/asymptotics.hpp"
#include "hetdqcd/fusion.hpp"
#include "hetdqcd/harness.hpp"
#include "hetdqcd/syndrome.hpp"

namespace {

using namespace hetdqcd;

NetworkConfig bench_network() {
  return build_network({gaussian_group(0.35, 4), gaussian_group(0.75, 3), gaussian_group(1.0, 3)});
}

void BM_cusum_step(benchmark::State& state) {
  NetworkConfig net = bench_network();
  ThresholdVector th = make_thresholds(net, 5.0);
  CusumState cusum = make_state(net);
  LlrStream stream(net, Regime::PostChange, 42);
  std::vector<double> llrs;
  for (auto _ : state) {
    stream.next(llrs);
    FeedbackFrame frame = step(cusum, llrs, net, th);
    benchmark::DoNotOptimize(frame.bits.data());
  }
  state.SetItemsProcessed(state.iterations() * net.total_sensors);
}
BENCHMARK(BM_cusum_step);

void BM_criticals_bruteforce(benchmark::State& state) {
  NetworkConfig net = bench_network();
  const double M = 2.0;
  for (auto _ : state) {
    SyndromeFamily family = criticals_bruteforce(
        [&](std::uint32_t mask) {
          return weighted_member(counts_of_mask(mask, net), net, M);
        },
        net);
    benchmark::DoNotOptimize(family.size());
  }
}
BENCHMARK(BM_criticals_bruteforce);

void BM_criticals_weighted(benchmark::State& state) {
  NetworkConfig net = bench_network();
  for (auto _ : state) {
    SyndromeFamily family = criticals_weighted(net, 2.0);
    benchmark::DoNotOptimize(family.size());
  }
}
BENCHMARK(BM_criticals_weighted);

void BM_pruning(benchmark::State& state) {
  NetworkConfig net = bench_network();
  for (auto _ : state) {
    PruningResult result = bar_M_pruning(net, 2.0);
    benchmark::DoNotOptimize(result.M_bar);
  }
}
BENCHMARK(BM_pruning);

void BM_xi_sampling(benchmark::State& state) {
  NetworkConfig net = bench_network();
  OrderStatSpec spec;
  spec.variances = variance_list(net, domain_all(net));
  spec.rank = 6;
  spec.samples = state.range(0);
  spec.seed = 7;
  for (auto _ : state) {
    MeanEstimate est = xi(spec);
    benchmark::DoNotOptimize(est.mean);
  }
  state.SetItemsProcessed(state.iterations() * spec.samples);
}
BENCHMARK(BM_xi_sampling)->Arg(10000)->Arg(100000);

void BM_edd_trial(benchmark::State& state) {
  NetworkConfig net = bench_network();
  ThresholdVector th = make_thresholds(net, 10.0);
  FusionRule rule = make_weighted_vote(net, 2.0);
  std::uint64_t trial = 0;
  for (auto _ : state) {
    LlrStream stream(net, Regime::PostChange, derive_seed(11, trial++));
    StoppingOutcome out = run_until_stop(rule, net, th, stream, 100000);
    benchmark::DoNotOptimize(out.time);
  }
}
BENCHMARK(BM_edd_trial);

}  // namespace

BENCHMARK_MAIN();
