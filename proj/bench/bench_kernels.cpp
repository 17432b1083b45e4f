// Serial reference vs OpenMP kernels.
#include <benchmark/benchmark.h>

#include "moilab/moi.hpp"
#include "moilab/ssf.hpp"

using namespace moilab;

static Exec exec_of(const benchmark::State& st) { return st.range(1) ? Exec::parallel : Exec::serial; }

static void BM_MoiNormal(benchmark::State& st) {
  const Index d = st.range(0);
  std::vector<SpectralDecomposition> ops;
  for (int j = 0; j < 4; ++j) ops.push_back(spectral_decompose(random_operator(RandomKind::hermitian, d, 1 + j)));
  const std::vector<Mat> xs{gaussian_matrix(d, d, 11), gaussian_matrix(d, d, 12), gaussian_matrix(d, d, 13)};
  const MoiSymbol sym = MoiSymbol::divided_difference(ScalarFunction::exp(), 3);
  for (auto _ : st) benchmark::DoNotOptimize(moi_normal(sym, ops, xs, exec_of(st)));
}
BENCHMARK(BM_MoiNormal)->ArgsProduct({{8, 16, 24}, {0, 1}})->Unit(benchmark::kMillisecond);

static void BM_Koplienko(benchmark::State& st) {
  const Index d = st.range(0);
  const CMatrix h0 = random_operator(RandomKind::hermitian, d, 1);
  const CMatrix v = random_operator(RandomKind::hermitian, d, 2);
  for (auto _ : st) benchmark::DoNotOptimize(koplienko_ssf(h0, v, 64, exec_of(st)));
}
BENCHMARK(BM_Koplienko)->ArgsProduct({{6, 12}, {0, 1}})->Unit(benchmark::kMillisecond);

static void BM_ModifiedSelfAdjoint(benchmark::State& st) {
  const Index d = st.range(0);
  const CMatrix h0 = random_operator(RandomKind::hermitian, d, 3);
  const CMatrix v = random_operator(RandomKind::hermitian, d, 4);
  const Mat x = gaussian_matrix(d, d, 5);
  ModifiedSaOptions opt;
  opt.exec = exec_of(st);
  for (auto _ : st) benchmark::DoNotOptimize(modified_ssf_selfadjoint(h0, v, x, 3, opt));
}
BENCHMARK(BM_ModifiedSelfAdjoint)->ArgsProduct({{6, 8}, {0, 1}})->Unit(benchmark::kMillisecond);

static void BM_Fdh(benchmark::State& st) {
  const Index d = st.range(0);
  const CMatrix t0 = random_operator(RandomKind::contraction, d, 6, 0.3);
  const CMatrix t1(t0.matrix() + 0.1 * random_operator(RandomKind::contraction, d, 7).matrix(), OpClass::contraction);
  for (auto _ : st) benchmark::DoNotOptimize(contraction_ssf_fdh(t0, t1, 32, 16, 4096, exec_of(st)));
}
BENCHMARK(BM_Fdh)->ArgsProduct({{2, 3}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
