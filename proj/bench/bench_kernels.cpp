#include <benchmark/benchmark.h>

#include "lnafim/io.hpp"
#include "lnafim/parser.hpp"

using namespace lnafim;

namespace {

std::string model_path(const std::string& file) { return std::string(LNAFIM_MODELS_DIR) + "/" + file; }

struct Fixture {
  ReactionNetwork net;
  Vector theta;
};

const Fixture& p53() {
  static const Fixture f = [] {
    ReactionNetwork net = parse_model(io::read_file(model_path("p53.lna")));
    Vector theta = io::parse_params(io::read_file(model_path("p53_params.json")), net);
    return Fixture{std::move(net), std::move(theta)};
  }();
  return f;
}

const Fixture& gene() {
  static const Fixture f = [] {
    ReactionNetwork net = parse_model(io::read_file(model_path("gene.lna")));
    Vector theta = io::parse_params(io::read_file(model_path("gene_params.json")), net);
    return Fixture{std::move(net), std::move(theta)};
  }();
  return f;
}

MomentStack p53_stack(int n) {
  ObservationDesign d;
  d.regime = Regime::TS;
  for (int i = 1; i <= n; ++i) d.times.push_back(i * 1.0);
  d.observed = {0, 1, 2};
  return compute_moments(p53().net, p53().theta, d);
}

void BM_FimSerial(benchmark::State& state) {
  const MomentStack s = p53_stack(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::fim_serial(s));
}

void BM_FimParallel(benchmark::State& state) {
  const MomentStack s = p53_stack(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::fim_parallel(s));
}

void BM_SsaSerial(benchmark::State& state) {
  const std::vector<long long> x0{50, 32};
  const std::vector<double> times{10.0, 20.0};
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::ssa_serial(gene().net, gene().theta, x0, times,
                                                 static_cast<int>(state.range(0)), 1));
}

void BM_SsaParallel(benchmark::State& state) {
  const std::vector<long long> x0{50, 32};
  const std::vector<double> times{10.0, 20.0};
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::ssa_parallel(gene().net, gene().theta, x0, times,
                                                   static_cast<int>(state.range(0)), 1));
}

SweepSpec gene_sweep(int count) {
  SweepSpec s;
  s.base.regime = Regime::TS;
  s.base.observed = {1};
  s.n = 50;
  s.deltas = logspace(0.01, 100.0, count);
  return s;
}

void BM_SweepSerial(benchmark::State& state) {
  const SweepSpec s = gene_sweep(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sweep_delta(gene().net, gene().theta, s, {}, ExecPolicy::Serial));
}

void BM_SweepParallel(benchmark::State& state) {
  const SweepSpec s = gene_sweep(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sweep_delta(gene().net, gene().theta, s, {}, ExecPolicy::Parallel));
}

}  // namespace

BENCHMARK(BM_FimSerial)->Arg(10)->Arg(30)->Arg(60)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FimParallel)->Arg(10)->Arg(30)->Arg(60)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SsaSerial)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SsaParallel)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepSerial)->Arg(16)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SweepParallel)->Arg(16)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
