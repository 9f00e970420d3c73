#include <random>

#include <benchmark/benchmark.h>

#include "tmm/ops.hpp"
#include "tmm/tape.hpp"

namespace {

tmm::Tensor random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  tmm::Tensor t({r, c});
  for (double& v : t.values()) v = n(rng);
  return t;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const tmm::Tensor a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
  for (auto _ : state) {
    tmm::Tape tape;
    tmm::Var y = tmm::ops::matmul(tape.constant(a), tape.constant(b));
    benchmark::DoNotOptimize(y.value()[0]);
  }
  state.counters["FLOP/s"] = benchmark::Counter(2.0 * static_cast<double>(n * n * n),
                                                 benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(64)->Arg(128)->Arg(256);

void BM_SoftmaxRows(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const tmm::Tensor x = random_matrix(n, n, 3);
  for (auto _ : state) {
    tmm::Tape tape;
    benchmark::DoNotOptimize(tmm::ops::softmax_rows(tape.constant(x)).value()[0]);
  }
}
BENCHMARK(BM_SoftmaxRows)->Arg(32)->Arg(128);

void BM_MatmulBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  tmm::Tensor a = random_matrix(n, n, 4), b = random_matrix(n, n, 5);
  for (auto _ : state) {
    a.zero_grad();
    b.zero_grad();
    tmm::Tape tape;
    tmm::Var y = tmm::ops::sum(tmm::ops::matmul(tape.bind(a), tape.bind(b)));
    tape.backward(y);
    benchmark::DoNotOptimize(a.grad()[0]);
  }
}
BENCHMARK(BM_MatmulBackward)->Arg(64)->Arg(128);

}  // namespace
