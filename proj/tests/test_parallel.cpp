#include <gtest/gtest.h>

#include <omp.h>

#include "moilab/moi.hpp"
#include "moilab/ssf.hpp"

using namespace moilab;

namespace {

// oversubscribe so the parallel path really splits work on small machines
[[maybe_unused]] const bool kThreads = [] {
  omp_set_num_threads(4);
  return true;
}();

CMatrix herm(Index d, Seed s) { return random_operator(RandomKind::hermitian, d, s); }

void expect_same(const RealLineDensity& a, const RealLineDensity& b) {
  ASSERT_EQ(a.terms().size(), b.terms().size());
  ASSERT_EQ(a.atoms().size(), b.atoms().size());
  for (std::size_t i = 0; i < a.terms().size(); ++i) {
    EXPECT_EQ(a.terms()[i].weight, b.terms()[i].weight);
    EXPECT_EQ(a.terms()[i].kernel.knots(), b.terms()[i].kernel.knots());
  }
  for (std::size_t i = 0; i < a.atoms().size(); ++i) {
    EXPECT_EQ(a.atoms()[i].x, b.atoms()[i].x);
    EXPECT_EQ(a.atoms()[i].mass, b.atoms()[i].mass);
  }
}

}  // namespace

TEST(Parallel, MoiNormalMatchesSerial) {
  std::vector<SpectralDecomposition> ops;
  for (int j = 0; j < 4; ++j) ops.push_back(spectral_decompose(herm(6, 10 + j)));
  const std::vector<Mat> xs{gaussian_matrix(6, 6, 1), gaussian_matrix(6, 6, 2), gaussian_matrix(6, 6, 3)};
  const MoiSymbol sym = MoiSymbol::divided_difference(ScalarFunction::exp(), 3);
  EXPECT_TRUE(moi_normal(sym, ops, xs, Exec::serial) == moi_normal(sym, ops, xs, Exec::parallel));
}

TEST(Parallel, KoplienkoMatchesSerial) {
  const CMatrix h0 = herm(5, 1), v = herm(5, 2);
  expect_same(koplienko_ssf(h0, v, 32, Exec::serial), koplienko_ssf(h0, v, 32, Exec::parallel));
}

TEST(Parallel, ModifiedSelfAdjointMatchesSerial) {
  const CMatrix h0 = herm(5, 3), v = herm(5, 4);
  const Mat x = gaussian_matrix(5, 5, 5);
  ModifiedSaOptions s, p;
  s.exec = Exec::serial;
  p.exec = Exec::parallel;
  expect_same(modified_ssf_selfadjoint(h0, v, x, 3, s), modified_ssf_selfadjoint(h0, v, x, 3, p));
}

TEST(Parallel, FdhMatchesSerial) {
  const CMatrix t0 = random_operator(RandomKind::contraction, 2, 6, 0.3);
  const CMatrix t1(t0.matrix() + 0.1 * random_operator(RandomKind::contraction, 2, 7).matrix(), OpClass::contraction);
  const GridDensity a = contraction_ssf_fdh(t0, t1, 8, 8, 256, Exec::serial);
  const GridDensity b = contraction_ssf_fdh(t0, t1, 8, 8, 256, Exec::parallel);
  EXPECT_EQ(a.breaks(), b.breaks());
  EXPECT_EQ(a.values(), b.values());
}
