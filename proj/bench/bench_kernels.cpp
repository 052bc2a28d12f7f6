// OpenMP kernels against their serial references.

#include "dse/evaluation.hpp"
#include "dse/scoring.hpp"
#include "dse/search.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

namespace {

std::vector<dse::Theta> random_thetas(std::size_t n)
{
  std::mt19937_64                        rng(7);
  std::uniform_real_distribution<double> alpha(0.25, 1.4);
  std::uniform_int_distribution<int>     res(64, 320);
  std::vector<dse::Theta>                out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    out.push_back({alpha(rng), res(rng)});
  return out;
}

std::vector<dse::EvaluationRecord> random_records(std::size_t n)
{
  std::mt19937_64                        rng(11);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  const auto                             thetas = random_thetas(n);
  std::vector<dse::EvaluationRecord>     out(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    out[i].theta     = thetas[i];
    out[i].accuracy  = 100.0 * u(rng);
    out[i].params_m  = 10.0 * u(rng);
    out[i].runtime_s = u(rng);
  }
  return out;
}

template <auto Kernel>
void BM_score(benchmark::State &state)
{
  const auto records = random_records(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(Kernel(records, dse::NetScoreWeights{}));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Kernel>
void BM_sweep(benchmark::State &state)
{
  const auto thetas = random_thetas(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(Kernel(thetas, dse::SurrogateParams{}, dse::ModelConfig{}));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Kernel>
void BM_select(benchmark::State &state)
{
  const auto records = random_records(static_cast<std::size_t>(state.range(0)));
  const auto scored  = dse::score_all_serial(records);
  for (auto _ : state)
    benchmark::DoNotOptimize(Kernel(scored));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

dse::ScoredRecord select_parallel(std::span<const dse::ScoredRecord> r) { return dse::select_best(r); }

}  // namespace

BENCHMARK(BM_score<dse::score_all>)->Name("score_all/omp")->Range(1 << 8, 1 << 18);
BENCHMARK(BM_score<dse::score_all_serial>)->Name("score_all/serial")->Range(1 << 8, 1 << 18);
BENCHMARK(BM_sweep<dse::surrogate_sweep>)->Name("surrogate_sweep/omp")->Range(1 << 4, 1 << 10);
BENCHMARK(BM_sweep<dse::surrogate_sweep_serial>)->Name("surrogate_sweep/serial")->Range(1 << 4, 1 << 10);
BENCHMARK(BM_select<select_parallel>)->Name("select_best/omp")->Range(1 << 8, 1 << 20);
BENCHMARK(BM_select<dse::select_best_serial>)->Name("select_best/serial")->Range(1 << 8, 1 << 20);

BENCHMARK_MAIN();
