#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

#include "mosum/dgp.hpp"
#include "mosum/lrv.hpp"
#include "mosum/mosum_stats.hpp"
#include "mosum/neighborhoods.hpp"
#include "mosum/null_limit.hpp"
#include "mosum/rng.hpp"

namespace {

Eigen::MatrixXd random_panel(int n, int p, std::uint64_t seed) {
  auto eng = mosum::substream(seed, 0);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd x(n, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < n; ++i) x(i, j) = nd(eng);
  return x;
}

// Four half-overlapping contiguous groups covering the panel.
mosum::NeighborhoodSet bench_groups(int p) {
  const int m = p / 2;
  std::vector<mosum::Neighborhood> items;
  for (int s = 0; s < 4; ++s) {
    mosum::Neighborhood nb;
    nb.id = s + 1;
    const int start = s * (p - m) / 3;
    for (int j = start; j < start + m; ++j) nb.members.push_back(j);
    items.push_back(std::move(nb));
  }
  return mosum::make_neighborhood_set(std::move(items), p);
}

void BM_jump_profile(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int p = static_cast<int>(state.range(1));
  const int bn = n / 8;
  const Eigen::MatrixXd x = random_panel(n, p, 1);
  const Eigen::VectorXd sig = Eigen::VectorXd::Ones(p);
  for (auto _ : state) {
    mosum::MosumProfile prof = mosum::jump_profile(x, bn, sig);
    benchmark::DoNotOptimize(prof.v.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n) * p);
}
BENCHMARK(BM_jump_profile)->Args({200, 50})->Args({200, 400})->Args({2000, 400});

void BM_stat_twoway(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int p = static_cast<int>(state.range(1));
  const int bn = n / 8;
  const Eigen::MatrixXd x = random_panel(n, p, 2);
  const Eigen::VectorXd sig = Eigen::VectorXd::Ones(p);
  const mosum::MosumProfile prof = mosum::jump_profile(x, bn, sig);
  const mosum::NeighborhoodSet nbhds = bench_groups(p);
  const mosum::Centering cent = mosum::asymptotic_centering(bn, p);
  for (auto _ : state) {
    mosum::StatProfile st = mosum::stat_twoway(prof, nbhds, cent);
    benchmark::DoNotOptimize(st.values.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(prof.rows()) * p);
}
BENCHMARK(BM_stat_twoway)->Args({200, 50})->Args({200, 400})->Args({2000, 400});

void BM_sample_max(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const mosum::LimitCovariance cov = mosum::cov_global(200, 30, p);
  std::uint64_t seed = 1;
  for (auto _ : state) {
    std::vector<double> s = mosum::sample_max(cov, 100, seed++);
    benchmark::DoNotOptimize(s.data());
  }
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_sample_max)->Arg(50)->Arg(400);

void BM_sample_max_grouped(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const mosum::LimitCovariance cov = mosum::cov_twoway(200, 30, bench_groups(p));
  std::uint64_t seed = 1;
  for (auto _ : state) {
    std::vector<double> s = mosum::sample_max(cov, 10, seed++);
    benchmark::DoNotOptimize(s.data());
  }
  state.SetItemsProcessed(state.iterations() * 10);
}
BENCHMARK(BM_sample_max_grouped)->Arg(50)->Arg(400);

void BM_lrv(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int p = static_cast<int>(state.range(1));
  const Eigen::MatrixXd x = random_panel(n, p, 3);
  for (auto _ : state) {
    mosum::LongRunEstimate est = mosum::estimate_lrv(x);
    benchmark::DoNotOptimize(est.sigma.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n) * p);
}
BENCHMARK(BM_lrv)->Args({200, 50})->Args({200, 400})->Args({5000, 50});

}  // namespace

BENCHMARK_MAIN();
