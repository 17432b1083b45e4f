#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <optional>
#include <random>

#include "moilab/errors.hpp"
#include "moilab/moi.hpp"
#include "oracles.hpp"

using namespace moilab;

namespace {

ScalarFunction random_poly(int deg, Seed seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<Complex> a(deg + 1);
  for (auto& c : a) c = Complex(g(rng), g(rng)) / double(deg + 1);
  return ScalarFunction::polynomial(a);
}

std::vector<Complex> coeffs(const ScalarFunction& f) { return f.laurent().coeffs(); }

SpectralDecomposition herm_dec(const Mat& h) { return spectral_decompose(CMatrix(h, OpClass::hermitian)); }

}  // namespace

TEST(MoiNormal, LoewnerHadamardExample) {
  Mat a = Mat::Zero(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = 2.0;
  Mat x = Mat::Zero(2, 2);
  x(0, 1) = 1.0;
  const std::vector<SpectralDecomposition> ops{herm_dec(a), herm_dec(a)};
  const std::vector<Mat> xs{x};
  const Mat r = moi_normal(MoiSymbol::divided_difference(ScalarFunction::monomial(2, Domain::real_line), 1), ops, xs);
  Mat expect = Mat::Zero(2, 2);
  expect(0, 1) = 3.0;
  EXPECT_LE(max_abs(r - expect), 1e-14);
}

TEST(MoiNormal, TensorProductIsProductOfFunctions) {
  const Mat a1 = random_operator(RandomKind::hermitian, 4, 1).matrix();
  const Mat a2 = random_operator(RandomKind::hermitian, 4, 2).matrix();
  const Mat a3 = random_operator(RandomKind::hermitian, 4, 3).matrix();
  const Mat x1 = gaussian_matrix(4, 4, 4), x2 = gaussian_matrix(4, 4, 5);
  const auto f1 = ScalarFunction::exp(), f2 = ScalarFunction::sin();
  const auto f3 = ScalarFunction::polynomial({1.0, -2.0, 0.5}, Domain::real_line);
  const MoiSymbol sym = MoiSymbol::tensor_product({{1.0, {f1, f2, f3}}});
  const std::vector<SpectralDecomposition> ops{herm_dec(a1), herm_dec(a2), herm_dec(a3)};
  const std::vector<Mat> xs{x1, x2};
  const Mat expect = oracle::apply_fn(a1, [](double t) { return std::exp(t); }) * x1 *
                     oracle::apply_fn(a2, [](double t) { return std::sin(t); }) * x2 *
                     oracle::poly_of({1.0, -2.0, 0.5}, a3);
  EXPECT_LE(max_abs(moi_normal(sym, ops, xs) - expect), 1e-12);
}

TEST(MoiNormal, MatchesTupleSumOracle) {
  const auto e = ScalarFunction::exp();
  for (int n = 1; n <= 3; ++n)
    for (Index d = 2; d <= 5; ++d) {
      std::vector<Mat> hs, xs;
      std::vector<SpectralDecomposition> ops;
      std::vector<oracle::Eig> eig;
      for (int j = 0; j <= n; ++j) {
        hs.push_back(random_operator(RandomKind::hermitian, d, 10 * n + j + 100 * d).matrix());
        ops.push_back(herm_dec(hs.back()));
        eig.push_back(oracle::eig_hermitian(hs.back()));
      }
      for (int j = 0; j < n; ++j) xs.push_back(gaussian_matrix(d, d, 1000 + j));
      const Mat got = moi_normal(MoiSymbol::divided_difference(e, n), ops, xs);
      const Mat ref = oracle::moi_tuple_sum(
          [&](const std::vector<Complex>& x) { return oracle::dd_recursive([](Complex z) { return std::exp(z); }, x); },
          eig, xs);
      EXPECT_LE(max_abs(got - ref), 1e-10) << "n=" << n << " d=" << d;
      EXPECT_LE(max_abs(got - moi_naive(MoiSymbol::divided_difference(e, n), ops, xs)), 1e-10);
    }
}

TEST(MoiNormal, ClusteredSpectraUseBlocks) {
  // H with a repeated eigenvalue goes through the block path
  const Mat u = random_operator(RandomKind::unitary, 5, 3).matrix();
  Eigen::VectorXcd dvals(5);
  dvals << 0.5, 0.5, -1.0, 2.0, 2.0;
  const Mat h = u * dvals.asDiagonal() * u.adjoint();
  const Mat h2 = random_operator(RandomKind::hermitian, 5, 8).matrix();
  const std::vector<SpectralDecomposition> ops{herm_dec(h), herm_dec(h2), herm_dec(h)};
  const std::vector<Mat> xs{gaussian_matrix(5, 5, 1), gaussian_matrix(5, 5, 2)};
  ASSERT_EQ(ops[0].size(), 3u);
  const MoiSymbol sym = MoiSymbol::divided_difference(ScalarFunction::sin(), 2);
  EXPECT_LE(max_abs(moi_normal(sym, ops, xs) - moi_naive(sym, ops, xs)), 1e-11);
}

TEST(MoiNormal, Linearity) {
  const Index d = 4;
  std::vector<SpectralDecomposition> ops;
  for (int j = 0; j < 3; ++j) ops.push_back(herm_dec(random_operator(RandomKind::hermitian, d, 40 + j).matrix()));
  const Mat x1 = gaussian_matrix(d, d, 1), x2 = gaussian_matrix(d, d, 2), y = gaussian_matrix(d, d, 3);
  const Complex alpha(0.3, -1.2), beta(-0.7, 0.4);
  const MoiSymbol f = MoiSymbol::divided_difference(ScalarFunction::exp(), 2);
  const MoiSymbol g = MoiSymbol::divided_difference(ScalarFunction::sin(), 2);
  const MoiSymbol fg = MoiSymbol::raw(3, [&](std::span<const Complex> a) { return alpha * f(a) + beta * g(a); });
  const std::vector<Mat> xs{x1, x2};
  EXPECT_LE(max_abs(moi_normal(fg, ops, xs) - (alpha * moi_normal(f, ops, xs) + beta * moi_normal(g, ops, xs))), 1e-12);
  const std::vector<Mat> xa{alpha * x1 + beta * y, x2}, xb{y, x2};
  EXPECT_LE(max_abs(moi_normal(f, ops, xa) - (alpha * moi_normal(f, ops, xs) + beta * moi_normal(f, ops, xb))), 1e-12);
}

TEST(MoiNormal, Errors) {
  const std::vector<SpectralDecomposition> ops{herm_dec(Mat::Identity(2, 2)), herm_dec(Mat::Identity(2, 2))};
  const std::vector<Mat> xs{Mat::Identity(2, 2)};
  const std::vector<Mat> bad{Mat::Identity(3, 3)};
  try {
    moi_normal(MoiSymbol::divided_difference(ScalarFunction::exp(), 2), ops, xs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ArityMismatch);
  }
  try {
    moi_normal(MoiSymbol::divided_difference(ScalarFunction::exp(), 1), ops, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(MoiContractionPoly, Examples) {
  const Mat t = random_operator(RandomKind::contraction, 3, 1).matrix();
  const Mat x = gaussian_matrix(3, 3, 2);
  const std::vector<Mat> ts{t, t}, xs{x};
  EXPECT_LE(max_abs(moi_contraction_poly(ScalarFunction::monomial(1, Domain::disk), 1, ts, xs) - x), 1e-15);
  const Mat expect = t * t * x + t * x * t + x * t * t;
  EXPECT_LE(max_abs(moi_contraction_poly(ScalarFunction::monomial(3, Domain::disk), 1, ts, xs) - expect), 1e-14);
  // degree below the order gives zero
  EXPECT_LE(max_abs(moi_contraction_poly(ScalarFunction::polynomial({1.0, 2.0}), 2, std::vector<Mat>{t, t, t},
                                         std::vector<Mat>{x, x})),
            0.0);
}

TEST(MoiContractionPoly, AgreesWithMoiNormalOnUnitaries) {
  for (int n = 1; n <= 3; ++n) {
    const auto f = random_poly(7, 50 + n);
    std::vector<Mat> us, xs;
    std::vector<SpectralDecomposition> ops;
    for (int j = 0; j <= n; ++j) {
      const CMatrix u = random_operator(RandomKind::unitary, 4, 70 + j);
      us.push_back(u.matrix());
      ops.push_back(spectral_decompose(u));
    }
    for (int j = 0; j < n; ++j) xs.push_back(gaussian_matrix(4, 4, 90 + j));
    const Mat a = moi_contraction_poly(f, n, us, xs);
    const Mat b = moi_normal(MoiSymbol::divided_difference(f, n), ops, xs);
    EXPECT_LE(max_abs(a - b), 1e-11) << n;
  }
}

TEST(MoiContractionPoly, PerturbationFormula) {
  for (int trial = 0; trial < 10; ++trial) {
    const Index d = 2 + trial % 7;
    const auto f = random_poly(8, 300 + trial);
    const Mat s = random_operator(RandomKind::contraction, d, 400 + trial).matrix();
    const Mat t = random_operator(RandomKind::contraction, d, 500 + trial).matrix();
    const Mat lhs = oracle::poly_of(coeffs(f), s) - oracle::poly_of(coeffs(f), t);
    const Mat rhs = moi_contraction_poly(f, 1, std::vector<Mat>{s, t}, std::vector<Mat>{s - t});
    EXPECT_LE(max_abs(lhs - rhs), 1e-10);
    // order-2 version with the perturbed slot in position i = 1, 2
    const Mat t1 = random_operator(RandomKind::contraction, d, 600 + trial).matrix();
    const Mat k1 = gaussian_matrix(d, d, 700 + trial);
    const Mat a = moi_contraction_poly(f, 1, std::vector<Mat>{s, t1}, std::vector<Mat>{k1}) -
                  moi_contraction_poly(f, 1, std::vector<Mat>{t, t1}, std::vector<Mat>{k1});
    const Mat b = moi_contraction_poly(f, 2, std::vector<Mat>{s, t, t1}, std::vector<Mat>{s - t, k1});
    EXPECT_LE(max_abs(a - b), 1e-10);
    const Mat c = moi_contraction_poly(f, 1, std::vector<Mat>{t1, s}, std::vector<Mat>{k1}) -
                  moi_contraction_poly(f, 1, std::vector<Mat>{t1, t}, std::vector<Mat>{k1});
    const Mat e = moi_contraction_poly(f, 2, std::vector<Mat>{t1, s, t}, std::vector<Mat>{k1, s - t});
    EXPECT_LE(max_abs(c - e), 1e-10);
  }
}

TEST(MoiContractionPoly, RejectsNegativeFrequencies) {
  const auto t = ScalarFunction::trig_polynomial(-1, {1.0, 0.0, 1.0});
  const Mat m = Mat::Identity(2, 2) * 0.5;
  try {
    moi_contraction_poly(t, 1, std::vector<Mat>{m, m}, std::vector<Mat>{m});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotAnalyticPolynomial);
  }
}

TEST(Dilate, ZeroIsCyclicShift) {
  const DilationResult r = dilate(CMatrix(Mat::Zero(1, 1), OpClass::contraction), 3);
  ASSERT_EQ(r.u.dim(), 4);
  EXPECT_LE(unitary_residual(r.u.matrix()), 1e-15);
  Mat p = Mat::Identity(4, 4);
  for (int k = 1; k <= 3; ++k) {
    p = p * r.u.matrix();
    EXPECT_NEAR(std::abs(p(0, 0)), 0.0, 1e-15);
  }
  p = p * r.u.matrix();
  EXPECT_NEAR(std::abs(p(0, 0) - 1.0), 0.0, 1e-15);  // period 4
}

TEST(Dilate, ScalarTwoByTwo) {
  const Complex c(0.3, 0.4);
  const DilationResult r = dilate(CMatrix(Mat::Constant(1, 1, c), OpClass::contraction), 1);
  const double s = std::sqrt(1 - std::norm(c));
  Mat expect(2, 2);
  expect << c, s, s, -std::conj(c);
  EXPECT_LE(max_abs(r.u.matrix() - expect), 1e-15);
  EXPECT_LE(unitary_residual(r.u.matrix()), 1e-15);
}

TEST(Dilate, CompressionOfPowers) {
  for (Seed s = 1; s <= 20; ++s) {
    const CMatrix t = random_operator(RandomKind::contraction, 4, s);
    const DilationResult r = dilate(t, 12);
    Mat up = Mat::Identity(r.u.dim(), r.u.dim());
    Mat tp = Mat::Identity(4, 4);
    double worst = 0.0;
    for (int k = 1; k <= 12; ++k) {
      up = up * r.u.matrix();
      tp = tp * t.matrix();
      worst = std::max(worst, max_abs(tp - r.compress(up)));
    }
    EXPECT_LE(worst, 1e-10);
  }
}

TEST(Dilate, RejectsNonContraction) {
  try {
    dilate(CMatrix(Mat::Identity(2, 2) * 1.1, OpClass::general), 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotContraction);
  }
}

TEST(Dilate, UnitaryMoiCompressesToPolynomialMoi) {
  for (int n = 1; n <= 2; ++n) {
    const Index d = 3;
    const int depth = 8;
    const auto f = random_poly(d + n, 800 + n);
    std::vector<Mat> ts, xs, xbig;
    std::vector<SpectralDecomposition> ops;
    std::optional<DilationResult> last;
    for (int j = 0; j <= n; ++j) {
      const CMatrix t = random_operator(RandomKind::contraction, d, 810 + j);
      ts.push_back(t.matrix());
      last = dilate(t, depth);
      ops.push_back(spectral_decompose(last->u));
    }
    for (int j = 0; j < n; ++j) {
      xs.push_back(gaussian_matrix(d, d, 820 + j));
      xbig.push_back(last->embed(xs.back()));
    }
    const Mat via_dilation = last->compress(moi_normal(MoiSymbol::divided_difference(f, n), ops, xbig));
    EXPECT_LE(max_abs(via_dilation - moi_contraction_poly(f, n, ts, xs)), 1e-9);
  }
}

TEST(SemiSpectral, ZeroContractionMoments) {
  const SemiSpectralDistribution e = semi_spectral(CMatrix(Mat::Zero(1, 1), OpClass::contraction), 7, 64);
  EXPECT_NEAR(std::abs(e.moment(0)(0, 0) - 1.0), 0.0, 1e-12);
  for (int k = 1; k <= 7; ++k) EXPECT_NEAR(std::abs(e.moment(k)(0, 0)), 0.0, 1e-12);
}

TEST(SemiSpectral, ScalarMomentsArePowers) {
  const double a = 0.6;
  const SemiSpectralDistribution e = semi_spectral(CMatrix(Mat::Constant(1, 1, a), OpClass::contraction), 40, 64);
  for (int k = 0; k <= 40; ++k) EXPECT_NEAR(std::abs(e.moment(k)(0, 0) - std::pow(a, k)), 0.0, 1e-10);
}

TEST(SemiSpectral, RandomMomentsAndInvariants) {
  const CMatrix t = random_operator(RandomKind::contraction, 3, 17);
  const int depth = 10;
  const SemiSpectralDistribution e = semi_spectral(t, depth, 256);
  Mat tp = Mat::Identity(3, 3);
  for (int k = 0; k <= depth; ++k) {
    EXPECT_LE(max_abs(e.moment(k) - tp), 1e-9);
    tp = tp * t.matrix();
  }
  Mat prev = Mat::Zero(3, 3);
  for (int j = 0; j <= e.grid_size(); ++j) {
    const Mat cj = e.cumulative_at(j);
    EXPECT_LE(hermitian_residual(cj), 1e-10);
    Eigen::SelfAdjointEigenSolver<Mat> es((cj - prev + (cj - prev).adjoint()) / 2.0);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
    prev = cj;
  }
  EXPECT_LE(max_abs(e.cumulative_at(e.grid_size()) - Mat::Identity(3, 3)), 1e-9);
}
