// Serial reference vs OpenMP kernels on the shapes the trainer and the
// evaluator actually use. Run with ALMN_THREADS to pin the thread budget.

#include <benchmark/benchmark.h>

#include <random>

#include "almn/kernels.hpp"
#include "almn/parallel.hpp"
#include "almn/serial_reference.hpp"

namespace {

using almn::ClassId;
using almn::Matrix;
using almn::Vec;

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(r, c);
  for (double& v : m.flat()) v = g(eng);
  return m;
}

std::vector<ClassId> random_labels(std::size_t n, int classes, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::vector<ClassId> out(n);
  for (auto& l : out) l = static_cast<ClassId>(eng() % classes);
  return out;
}

template <bool Parallel>
void BM_DenseForward(benchmark::State& state) {
  const auto b = static_cast<std::size_t>(state.range(0));
  const Matrix in = random_matrix(b, 64, 1), W = random_matrix(64, 64, 2);
  const Vec bias(64, 0.1);
  Matrix out(b, 64);
  for (auto _ : state) {
    if constexpr (Parallel) almn::kernels::dense_forward(in, W, bias, out);
    else almn::serial::dense_forward(in, W, bias, out);
    benchmark::DoNotOptimize(out.flat().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b));
}

template <bool Parallel>
void BM_DenseWeightGrad(benchmark::State& state) {
  const auto b = static_cast<std::size_t>(state.range(0));
  const Matrix delta = random_matrix(b, 64, 3), in = random_matrix(b, 64, 4);
  Matrix dW(64, 64);
  Vec db(64);
  for (auto _ : state) {
    if constexpr (Parallel) almn::kernels::dense_weight_grad(delta, in, dW, db);
    else almn::serial::dense_weight_grad(delta, in, dW, db);
    benchmark::DoNotOptimize(dW.flat().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b));
}

template <bool Parallel>
void BM_DenseInputGrad(benchmark::State& state) {
  const auto b = static_cast<std::size_t>(state.range(0));
  const Matrix delta = random_matrix(b, 64, 5), W = random_matrix(64, 64, 6);
  Matrix out(b, 64);
  for (auto _ : state) {
    if constexpr (Parallel) almn::kernels::dense_input_grad(delta, W, out);
    else almn::serial::dense_input_grad(delta, W, out);
    benchmark::DoNotOptimize(out.flat().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b));
}

template <bool Parallel>
void BM_FirstPositiveRank(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix x = almn::kernels::normalize_rows(random_matrix(n, 32, 7));
  const auto labels = random_labels(n, 10, 8);
  for (auto _ : state) {
    auto r = Parallel ? almn::kernels::first_positive_rank(x, labels) : almn::serial::first_positive_rank(x, labels);
    benchmark::DoNotOptimize(r.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <bool Parallel>
void BM_AssignNearest(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix x = random_matrix(n, 32, 9), c = random_matrix(10, 32, 10);
  std::vector<std::size_t> a;
  std::vector<double> d;
  for (auto _ : state) {
    const double t = Parallel ? almn::kernels::assign_nearest(x, c, a, d) : almn::serial::assign_nearest(x, c, a, d);
    benchmark::DoNotOptimize(t);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

}  // namespace

BENCHMARK(BM_DenseForward<false>)->Name("dense_forward/serial")->Arg(20)->Arg(2000);
BENCHMARK(BM_DenseForward<true>)->Name("dense_forward/omp")->Arg(20)->Arg(2000)->UseRealTime();
BENCHMARK(BM_DenseWeightGrad<false>)->Name("dense_weight_grad/serial")->Arg(20)->Arg(2000);
BENCHMARK(BM_DenseWeightGrad<true>)->Name("dense_weight_grad/omp")->Arg(20)->Arg(2000)->UseRealTime();
BENCHMARK(BM_DenseInputGrad<false>)->Name("dense_input_grad/serial")->Arg(20)->Arg(2000);
BENCHMARK(BM_DenseInputGrad<true>)->Name("dense_input_grad/omp")->Arg(20)->Arg(2000)->UseRealTime();
BENCHMARK(BM_FirstPositiveRank<false>)->Name("first_positive_rank/serial")->Arg(500)->Arg(2000);
BENCHMARK(BM_FirstPositiveRank<true>)->Name("first_positive_rank/omp")->Arg(500)->Arg(2000)->UseRealTime();
BENCHMARK(BM_AssignNearest<false>)->Name("assign_nearest/serial")->Arg(2000)->Arg(20000);
BENCHMARK(BM_AssignNearest<true>)->Name("assign_nearest/omp")->Arg(2000)->Arg(20000)->UseRealTime();

int main(int argc, char** argv) {
  almn::configure_threads_from_env();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::AddCustomContext("omp_threads", std::to_string(almn::max_threads()));
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
