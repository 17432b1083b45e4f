#pragma once

#include <functional>
#include <span>
#include <vector>

#include "moilab/linalg.hpp"

namespace moilab {

enum class Domain { real_line, circle, disk };

inline constexpr double kNodeMergeTol = 1e-7;

// Finite Laurent polynomial sum_{m = lo}^{hi} c_m z^m.
class Laurent {
 public:
  Laurent() = default;
  Laurent(int lo, std::vector<Complex> coeffs);

  int lo() const { return lo_; }
  int hi() const { return lo_ + static_cast<int>(c_.size()) - 1; }
  bool empty() const { return c_.empty(); }
  const std::vector<Complex>& coeffs() const { return c_; }
  Complex coeff(int m) const;

  Complex eval(Complex z) const { return deriv(0, z); }
  Complex deriv(int k, Complex z) const;
  Laurent derivative(int k) const;

 private:
  int lo_ = 0;
  std::vector<Complex> c_;
};

// Falling factorial m (m-1) ... (m-k+1).
double falling(int m, int k);
double factorial(int n);

class ScalarFunction {
 public:
  enum class Repr { polynomial, trig_polynomial, callable };
  using DerivFn = std::function<Complex(int, Complex)>;
  using TaylorFn = std::function<Complex(int)>;

  ScalarFunction() = default;

  static ScalarFunction polynomial(std::vector<Complex> a, Domain d = Domain::disk);
  // Coefficients c_lo .. c_hi of sum c_m z^m on the unit circle.
  static ScalarFunction trig_polynomial(int lo, std::vector<Complex> c);
  static ScalarFunction monomial(int m, Domain d);
  static ScalarFunction callable(Domain d, int max_order, DerivFn f, TaylorFn taylor = {});
  static ScalarFunction exp();
  static ScalarFunction sin();
  // 1 / (1 - a z) on the closed disk, |a| < 1.
  static ScalarFunction geometric(Complex a);

  Domain domain() const { return domain_; }
  Repr repr() const { return repr_; }
  bool is_laurent() const { return repr_ != Repr::callable; }
  const Laurent& laurent() const;
  int max_order() const { return max_order_; }

  Complex eval(Complex z) const { return deriv(0, z); }
  Complex deriv(int k, Complex z) const;
  bool has_taylor() const;
  Complex taylor(int j) const;

 private:
  Domain domain_ = Domain::real_line;
  Repr repr_ = Repr::polynomial;
  Laurent poly_;
  DerivFn fn_;
  TaylorFn taylor_;
  int max_order_ = 0;
};

// Validates a node list against a domain (tolerance 1e-9).
void validate_nodes(std::span<const Complex> nodes, Domain d);

// f^[n](nodes). Laurent representations use the closed form through complete
// homogeneous symmetric polynomials; callables use the confluent Hermite table.
Complex divided_difference(const ScalarFunction& f, std::span<const Complex> nodes,
                           double merge_tol = kNodeMergeTol);
Complex divided_difference_table(const ScalarFunction& f, std::span<const Complex> nodes,
                                 double merge_tol = kNodeMergeTol);
Complex divided_difference_laurent(const Laurent& p, std::span<const Complex> nodes);

Complex hermite_genocchi_oracle(const ScalarFunction& f, std::span<const double> nodes,
                                int quad_points);

// B_n with f^[n](nodes) = integral of f^(n) B_n; total mass 1/n!.
class PeanoKernel {
 public:
  PeanoKernel(std::vector<double> knots, std::vector<double> breaks,
              std::vector<std::vector<double>> pieces);

  int order() const { return static_cast<int>(knots_.size()) - 1; }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& breaks() const { return breaks_; }
  // Coefficients of piece p in powers of (x - breaks[p]).
  const std::vector<std::vector<double>>& pieces() const { return pieces_; }
  double lo() const { return breaks_.front(); }
  double hi() const { return breaks_.back(); }

  double eval(double x) const;
  double integral() const;
  Complex integrate(const std::function<Complex(double)>& g, int gl_points = 16) const;

 private:
  std::vector<double> knots_;
  std::vector<double> breaks_;
  std::vector<std::vector<double>> pieces_;
};

PeanoKernel peano_kernel(std::span<const double> nodes, double node_spread_min = kNodeMergeTol);

ScalarFunction cesaro_approx(const ScalarFunction& f, int k);
ScalarFunction fejer_smooth(const ScalarFunction& f, int n);

enum class QuadRule { gauss_legendre_01, periodic_trapezoid };

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

QuadratureRule quadrature(QuadRule rule, int points);
// Memoized Gauss-Legendre rule on [0, 1].
const QuadratureRule& gauss_legendre(int points);

// max |f^(k)| over a uniform grid of the unit circle / a real interval.
double sup_norm_circle(const ScalarFunction& f, int k = 0, int points = 4096);
double sup_norm_interval(const ScalarFunction& f, int k, double a, double b, int points = 4096);

}  // namespace moilab
