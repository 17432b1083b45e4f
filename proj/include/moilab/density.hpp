#pragma once

#include <functional>
#include <vector>

#include "moilab/funcs.hpp"

namespace moilab {

struct Atom {
  double x;
  Complex mass;
};

struct KernelTerm {
  Complex weight;
  PeanoKernel kernel;
};

// Piecewise polynomial with complex coefficients in powers of (x - breaks[p]).
struct PiecewisePoly {
  std::vector<double> breaks;
  std::vector<std::vector<Complex>> pieces;

  Complex eval(double x) const;
  double l1_norm(int sub = 4, int gl_points = 12) const;
};

// Spectral shift density on the real line: weighted Peano kernels plus atoms.
class RealLineDensity {
 public:
  void add_kernel(Complex weight, PeanoKernel kernel);
  void add_atom(double x, Complex mass);
  void append(const RealLineDensity& other, Complex scale = 1.0);

  const std::vector<KernelTerm>& terms() const { return terms_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  bool empty() const { return terms_.empty() && atoms_.empty(); }

  // Integral of g against the density (atoms included).
  Complex integrate(const std::function<Complex(double)>& g, int gl_points = 16) const;
  // Integral of f^(n) against the density.
  Complex pair(const ScalarFunction& f, int n) const;

  PiecewisePoly merged() const;
  // Atoms at identical abscissae summed, zero masses dropped.
  std::vector<Atom> merged_atoms() const;
  Complex eval(double x) const;
  double l1_norm() const;
  // Breakpoints and midpoints of the merged pieces.
  std::vector<double> sample_points() const;
  double lo() const;
  double hi() const;

 private:
  std::vector<KernelTerm> terms_;
  std::vector<Atom> atoms_;
};

double l1_distance(const RealLineDensity& a, const RealLineDensity& b);

// xi(theta) = sum_k b_k e^{ik theta}.
class FourierDensity {
 public:
  FourierDensity() = default;
  FourierDensity(int lo, std::vector<Complex> b);

  int lo() const { return lo_; }
  int hi() const { return lo_ + static_cast<int>(b_.size()) - 1; }
  Complex coeff(int k) const;
  Complex value(double theta) const;
  // Integral of g(e^{i theta}) xi(theta) i e^{i theta} d theta.
  Complex pair(const Laurent& g) const;
  Complex pair(const ScalarFunction& f, int n) const;

 private:
  int lo_ = 0;
  std::vector<Complex> b_;
};

enum class CircleWeight { dtheta, exp_dtheta, iexp_dtheta };

// Piecewise-constant density on [0, 2pi): values[j] on [breaks[j], breaks[j+1]).
class GridDensity {
 public:
  GridDensity() = default;
  GridDensity(std::vector<double> breaks, std::vector<Complex> values);

  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<Complex>& values() const { return values_; }
  Complex value(double theta) const;
  Complex pair(const std::function<Complex(Complex)>& g,
               CircleWeight w = CircleWeight::iexp_dtheta, int gl_points = 8) const;
  Complex pair(const ScalarFunction& f, int n, CircleWeight w = CircleWeight::iexp_dtheta) const;
  // Cell averages on the uniform grid of g cells.
  GridDensity resample(int g) const;

 private:
  std::vector<double> breaks_;
  std::vector<Complex> values_;
};

}  // namespace moilab
