#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "sparsedp/kernels.hpp"

namespace {

using namespace sparsedp;

struct Fixture {
  Matrix y, means, out_means;
  std::vector<int> rows;
  std::vector<double> baseline, vars, out;

  Fixture(std::size_t n, std::size_t p, std::size_t k) : y(n, p), means(k, p), out_means(k, p), rows(n) {
    std::mt19937_64 eng(42);
    std::normal_distribution<double> z;
    for (double &v : y.data())
      v = z(eng);
    for (double &v : means.data())
      v = 0.1 * z(eng);
    for (std::size_t i = 0; i < n; ++i)
      rows[i] = static_cast<int>(i % k);
    baseline.assign(p, 0.0);
    vars.assign(p, 1.0);
    out.assign(std::max(p, k), 0.0);
  }
};

template <bool Parallel> void BM_column_sums(benchmark::State &st) {
  Fixture f(static_cast<std::size_t>(st.range(0)), static_cast<std::size_t>(st.range(1)), 4);
  for (auto _ : st) {
    if constexpr (Parallel)
      kernels::parallel::residual_column_sums(f.y, f.rows, f.means, {f.out.data(), f.y.cols()});
    else
      kernels::serial::residual_column_sums(f.y, f.rows, f.means, {f.out.data(), f.y.cols()});
    benchmark::DoNotOptimize(f.out.data());
  }
}

template <bool Parallel> void BM_sq_sums(benchmark::State &st) {
  Fixture f(static_cast<std::size_t>(st.range(0)), static_cast<std::size_t>(st.range(1)), 4);
  for (auto _ : st) {
    if constexpr (Parallel)
      kernels::parallel::centered_column_sq_sums(f.y, f.baseline, f.rows, f.means, {f.out.data(), f.y.cols()});
    else
      kernels::serial::centered_column_sq_sums(f.y, f.baseline, f.rows, f.means, {f.out.data(), f.y.cols()});
    benchmark::DoNotOptimize(f.out.data());
  }
}

template <bool Parallel> void BM_cluster_means(benchmark::State &st) {
  Fixture f(static_cast<std::size_t>(st.range(0)), static_cast<std::size_t>(st.range(1)), 4);
  for (auto _ : st) {
    if constexpr (Parallel)
      kernels::parallel::cluster_column_means(f.y, f.baseline, f.rows, f.out_means);
    else
      kernels::serial::cluster_column_means(f.y, f.baseline, f.rows, f.out_means);
    benchmark::DoNotOptimize(f.out_means.data().data());
  }
}

template <bool Parallel> void BM_row_loglik(benchmark::State &st) {
  Fixture f(4, static_cast<std::size_t>(st.range(1)), static_cast<std::size_t>(st.range(0)));
  const std::span<const double> row(f.y.data().data(), f.y.cols());
  for (auto _ : st) {
    if constexpr (Parallel)
      kernels::parallel::row_log_likelihoods(row, f.baseline, f.vars, f.means, {f.out.data(), f.means.rows()});
    else
      kernels::serial::row_log_likelihoods(row, f.baseline, f.vars, f.means, {f.out.data(), f.means.rows()});
    benchmark::DoNotOptimize(f.out.data());
  }
}

template <bool Parallel> void BM_coclustering(benchmark::State &st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i)
    labels[i] = static_cast<int>(i % 5);
  Matrix acc(n, n);
  for (auto _ : st) {
    if constexpr (Parallel)
      kernels::parallel::accumulate_coclustering(labels, acc);
    else
      kernels::serial::accumulate_coclustering(labels, acc);
    benchmark::DoNotOptimize(acc.data().data());
  }
}

} // namespace

BENCHMARK(BM_column_sums<false>)->Args({20, 200})->Args({38, 2000});
BENCHMARK(BM_column_sums<true>)->Args({20, 200})->Args({38, 2000});
BENCHMARK(BM_sq_sums<false>)->Args({20, 200})->Args({38, 2000});
BENCHMARK(BM_sq_sums<true>)->Args({20, 200})->Args({38, 2000});
BENCHMARK(BM_cluster_means<false>)->Args({20, 200})->Args({38, 2000});
BENCHMARK(BM_cluster_means<true>)->Args({20, 200})->Args({38, 2000});
BENCHMARK(BM_row_loglik<false>)->Args({4, 200})->Args({10, 2000});
BENCHMARK(BM_row_loglik<true>)->Args({4, 200})->Args({10, 2000});
BENCHMARK(BM_coclustering<false>)->Arg(38)->Arg(200);
BENCHMARK(BM_coclustering<true>)->Arg(38)->Arg(200);

BENCHMARK_MAIN();
