#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "moilab/errors.hpp"
#include "moilab/funcs.hpp"
#include "oracles.hpp"

using namespace moilab;

namespace {

std::vector<Complex> cvec(std::initializer_list<double> xs) {
  return std::vector<Complex>(xs.begin(), xs.end());
}

ScalarFunction random_poly(int deg, Seed seed, Domain d = Domain::disk) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<Complex> a(deg + 1);
  for (auto& c : a) c = Complex(g(rng), g(rng)) / double(deg + 1);
  return ScalarFunction::polynomial(a, d);
}

}  // namespace

TEST(ScalarFunction, DerivativeZeroIsEval) {
  const auto p = random_poly(5, 3);
  const auto t = ScalarFunction::trig_polynomial(-3, cvec({1, -2, 0.5, 3, 1, 0, 2}));
  for (double th : {0.1, 1.0, 2.5}) {
    const Complex z = std::polar(1.0, th);
    EXPECT_EQ(p.deriv(0, z), p.eval(z));
    EXPECT_EQ(t.deriv(0, z), t.eval(z));
    EXPECT_EQ(ScalarFunction::exp().deriv(0, th), ScalarFunction::exp().eval(th));
  }
}

TEST(ScalarFunction, LaurentDerivativeMatchesPowerRule) {
  const auto t = ScalarFunction::trig_polynomial(-2, cvec({1.5, -1, 0.25, 2, -3}));
  const Complex z = std::polar(1.0, 0.7);
  for (int k = 0; k <= 4; ++k) {
    Complex expect = 0.0;
    for (int m = -2; m <= 2; ++m) expect += t.laurent().coeff(m) * falling(m, k) * std::pow(z, double(m - k));
    EXPECT_NEAR(std::abs(t.deriv(k, z) - expect), 0.0, 1e-12);
  }
}

TEST(DividedDifference, Examples) {
  const auto sq = ScalarFunction::monomial(2, Domain::real_line);
  EXPECT_NEAR(std::abs(divided_difference(sq, cvec({1, 3})) - 4.0), 0.0, 1e-14);
  const auto cube = ScalarFunction::monomial(3, Domain::real_line);
  EXPECT_NEAR(std::abs(divided_difference(cube, cvec({2, 2})) - 12.0), 0.0, 1e-14);
  const auto e = ScalarFunction::exp();
  const double nodes[] = {0.0, 0.5, 1.0};
  EXPECT_NEAR(std::abs(divided_difference(e, cvec({0, 0.5, 1})) - hermite_genocchi_oracle(e, nodes, 32)),
              0.0, 1e-10);
}

TEST(DividedDifference, HermiteTableMatchesRecursion) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2, 2);
  const auto e = ScalarFunction::exp();
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Complex> x(1 + trial % 4);
    for (auto& z : x) z = u(rng);
    const Complex ref = oracle::dd_recursive([](Complex z) { return std::exp(z); }, x);
    EXPECT_NEAR(std::abs(divided_difference(e, x) - ref), 0.0, 1e-9 * (1 + std::abs(ref)));
  }
}

TEST(DividedDifference, LaurentClosedFormMatchesRecursion) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 2 * std::numbers::pi);
  const auto t = ScalarFunction::trig_polynomial(-4, cvec({1, 0.5, -2, 1, 3, -1, 0.25, 2, 1}));
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Complex> x(1 + trial % 4);
    for (auto& z : x) z = std::polar(1.0, u(rng));
    const Complex ref = oracle::dd_recursive([&](Complex z) { return t.eval(z); }, x);
    EXPECT_NEAR(std::abs(divided_difference(t, x) - ref), 0.0, 1e-8 * (1 + std::abs(ref)));
    EXPECT_NEAR(std::abs(divided_difference_table(t, x) - ref), 0.0, 1e-8 * (1 + std::abs(ref)));
  }
}

TEST(DividedDifference, ConfluentLimits) {
  const auto e = ScalarFunction::exp();
  EXPECT_NEAR(std::abs(divided_difference(e, cvec({0.3, 0.3, 0.3})) - std::exp(0.3) / 2.0), 0.0, 1e-14);
  // nodes within the merge tolerance act as equal
  EXPECT_NEAR(std::abs(divided_difference(e, cvec({0.3, 0.3 + 1e-9})) - std::exp(0.3)), 0.0, 1e-8);
  const auto p = random_poly(6, 9, Domain::real_line);
  const Complex table = divided_difference_table(p, cvec({0.2, 0.2, -0.4, 0.2}));
  const Complex closed = divided_difference(p, cvec({0.2, 0.2, -0.4, 0.2}));
  EXPECT_NEAR(std::abs(table - closed), 0.0, 1e-12);
}

TEST(DividedDifference, InsufficientDerivatives) {
  const auto f = ScalarFunction::callable(Domain::real_line, 1, [](int k, Complex z) {
    return k == 0 ? z * z : 2.0 * z;
  });
  EXPECT_NO_THROW(divided_difference(f, cvec({1, 1})));
  try {
    divided_difference(f, cvec({1, 1, 1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientDerivatives);
  }
}

TEST(DividedDifference, SymmetryAndRecursion) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  const auto s = ScalarFunction::sin();
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Complex> x(4);
    for (auto& z : x) z = u(rng);
    const Complex v = divided_difference(s, x);
    std::vector<Complex> y = x;
    std::shuffle(y.begin(), y.end(), rng);
    EXPECT_NEAR(std::abs(divided_difference(s, y) - v), 0.0, 1e-10 * std::max(1.0, std::abs(v)));
    const std::vector<Complex> head(x.begin(), x.end() - 1), tail(x.begin() + 1, x.end());
    const Complex rec = (divided_difference(s, head) - divided_difference(s, tail)) / (x.front() - x.back());
    EXPECT_NEAR(std::abs(rec - v), 0.0, 1e-10 * std::max(1.0, std::abs(v)) / std::min(1.0, std::abs(x.front() - x.back())));
  }
}

TEST(HermiteGenocchi, Examples) {
  const double n13[] = {1.0, 3.0};
  EXPECT_NEAR(std::abs(hermite_genocchi_oracle(ScalarFunction::monomial(2, Domain::real_line), n13, 8) - 4.0),
              0.0, 1e-13);
  const double n4[] = {-0.3, 0.8, 1.7, 0.1};
  EXPECT_NEAR(std::abs(hermite_genocchi_oracle(ScalarFunction::monomial(3, Domain::real_line), n4, 4) - 1.0),
              0.0, 1e-13);
  const double s4[] = {0.0, 1.0, 2.0, 3.0};
  const auto s = ScalarFunction::sin();
  EXPECT_NEAR(std::abs(hermite_genocchi_oracle(s, s4, 32) - divided_difference(s, cvec({0, 1, 2, 3}))), 0.0, 1e-9);
}

TEST(HermiteGenocchi, OracleSuiteHundredNodeSets) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const ScalarFunction fs[] = {ScalarFunction::exp(), ScalarFunction::sin()};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(2 + trial % 3);
    for (auto& v : x) v = u(rng);
    const std::vector<Complex> xc(x.begin(), x.end());
    const auto& f = fs[trial % 2];
    EXPECT_NEAR(std::abs(hermite_genocchi_oracle(f, x, 24) - divided_difference(f, xc)), 0.0, 1e-8);
  }
}

TEST(PeanoKernel, FirstOrderIndicator) {
  const double n[] = {0.0, 1.0};
  const PeanoKernel k = peano_kernel(n);
  EXPECT_EQ(k.order(), 1);
  EXPECT_NEAR(k.eval(0.0), 1.0, 1e-15);
  EXPECT_NEAR(k.eval(0.5), 1.0, 1e-15);
  EXPECT_NEAR(k.eval(1.5), 0.0, 1e-15);
  EXPECT_NEAR(k.integral(), 1.0, 1e-15);
}

TEST(PeanoKernel, SymmetricHat) {
  const double n[] = {0.0, 1.0, 2.0};
  const PeanoKernel k = peano_kernel(n);
  EXPECT_NEAR(k.eval(0.5), 0.25, 1e-15);
  EXPECT_NEAR(k.eval(1.0), 0.5, 1e-15);
  EXPECT_NEAR(k.eval(1.5), 0.25, 1e-15);
  EXPECT_NEAR(k.integral(), 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(k.lo(), 0.0);
  EXPECT_DOUBLE_EQ(k.hi(), 2.0);
}

TEST(PeanoKernel, RandomKernelsReproduceDividedDifferences) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<ScalarFunction> family{ScalarFunction::exp(), ScalarFunction::sin()};
  for (int d = 0; d <= 6; ++d) family.push_back(random_poly(d, 100 + d, Domain::real_line));
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + trial % 4;
    std::vector<double> x(n + 1);
    for (auto& v : x) v = u(rng);
    if (trial % 5 == 0 && n >= 2) x[1] = x[0];  // repeated knot
    const PeanoKernel k = peano_kernel(x);
    EXPECT_NEAR(k.integral(), 1.0 / factorial(n), 1e-12);
    for (double t = k.lo(); t < k.hi(); t += (k.hi() - k.lo()) / 97) EXPECT_GE(k.eval(t), -1e-12);
    const std::vector<Complex> xc(x.begin(), x.end());
    for (const auto& f : family) {
      const Complex via_kernel = k.integrate([&](double t) { return f.deriv(n, t); });
      EXPECT_NEAR(std::abs(via_kernel - divided_difference(f, xc)), 0.0, 1e-9);
    }
  }
}

TEST(PeanoKernel, DegenerateKnots) {
  const double n[] = {0.4, 0.4, 0.4 + 1e-9};
  try {
    peano_kernel(n);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateKnots);
  }
}

TEST(Cesaro, Monomials) {
  const auto z3 = ScalarFunction::monomial(3, Domain::disk);
  const auto c = cesaro_approx(z3, 5);
  EXPECT_NEAR(std::abs(c.laurent().coeff(3) - 0.4), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(cesaro_approx(z3, 3).eval(0.7)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(cesaro_approx(z3, 2).eval(0.7)), 0.0, 1e-15);
}

TEST(Cesaro, GeometricConverges) {
  const auto f = ScalarFunction::geometric(0.5);
  double prev = kInf;
  for (int k : {4, 8, 16, 32}) {
    const auto c = cesaro_approx(f, k);
    double err = 0.0;
    for (int j = 0; j < 2048; ++j) {
      const Complex z = std::polar(1.0, 2 * std::numbers::pi * j / 2048);
      err = std::max(err, std::abs(c.eval(z) - f.eval(z)));
    }
    EXPECT_LT(err, prev);
    prev = err;
  }
}

TEST(Fejer, Examples) {
  const auto e3 = ScalarFunction::trig_polynomial(3, cvec({1}));
  EXPECT_NEAR(std::abs(fejer_smooth(e3, 5).laurent().coeff(3) - (1.0 - 3.0 / 6.0)), 0.0, 1e-15);
  const auto t = ScalarFunction::trig_polynomial(-2, cvec({1, 2, 3, 4, 5}));
  const auto f0 = fejer_smooth(t, 0);
  EXPECT_NEAR(std::abs(f0.eval(std::polar(1.0, 0.3)) - 3.0), 0.0, 1e-14);
}

TEST(Fejer, SupNormDoesNotGrow) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  std::vector<Complex> c(13);
  for (auto& v : c) v = Complex(g(rng), g(rng));
  const auto t = ScalarFunction::trig_polynomial(-6, c);
  const double base = sup_norm_circle(t);
  for (int n = 1; n <= 8; ++n) EXPECT_LE(sup_norm_circle(fejer_smooth(t, n)), base * (1 + 1e-12));
}

TEST(Quadrature, Examples) {
  const QuadratureRule q2 = quadrature(QuadRule::gauss_legendre_01, 2);
  double s = 0.0;
  for (int i = 0; i < 2; ++i) s += q2.weights[i] * std::pow(q2.nodes[i], 3);
  EXPECT_NEAR(s, 0.25, 1e-15);
  const QuadratureRule p8 = quadrature(QuadRule::periodic_trapezoid, 8);
  Complex z = 0.0;
  for (int i = 0; i < 8; ++i) z += p8.weights[i] * std::polar(1.0, 3 * p8.nodes[i]);
  EXPECT_NEAR(std::abs(z), 0.0, 1e-14);
  const QuadratureRule q16 = quadrature(QuadRule::gauss_legendre_01, 16);
  s = 0.0;
  for (int i = 0; i < 16; ++i) s += q16.weights[i] * (1 - q16.nodes[i]) * std::pow(q16.nodes[i], 5);
  EXPECT_NEAR(s, 1.0 / 42.0, 1e-14);
}

TEST(Quadrature, ExactnessDegree) {
  for (int n : {1, 3, 8, 33, 64}) {
    const QuadratureRule q = quadrature(QuadRule::gauss_legendre_01, n);
    for (int deg = 0; deg <= 2 * n - 1; deg += std::max(1, n / 4)) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += q.weights[i] * std::pow(q.nodes[i], deg);
      EXPECT_NEAR(s, 1.0 / (deg + 1), 1e-13);
    }
  }
}

TEST(Quadrature, InvalidPointCount) {
  try {
    quadrature(QuadRule::gauss_legendre_01, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidPointCount);
  }
}

TEST(DividedDifference, DiskBoundednessRatioFinite) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> r(0.0, 1.0), th(0.0, 2 * std::numbers::pi);
  double worst = 0.0;
  for (int trial = 0; trial < 40; ++trial) {
    const auto f = random_poly(12, 500 + trial);
    for (int k = 1; k <= 3; ++k) {
      const double sup = sup_norm_circle(f, k);
      for (int s = 0; s < 20; ++s) {
        std::vector<Complex> x(k + 1);
        for (auto& z : x) z = std::polar(std::sqrt(r(rng)), th(rng));
        worst = std::max(worst, std::abs(divided_difference(f, x)) / sup);
      }
    }
  }
  EXPECT_TRUE(std::isfinite(worst));
  EXPECT_LT(worst, 10.0);
}
