#pragma once

#include <functional>
#include <span>
#include <vector>

#include "moilab/exec.hpp"
#include "moilab/funcs.hpp"
#include "moilab/linalg.hpp"

namespace moilab {

struct TensorTerm {
  Complex weight;
  std::vector<ScalarFunction> factors;
};

class MoiSymbol {
 public:
  using RawFn = std::function<Complex(std::span<const Complex>)>;

  static MoiSymbol divided_difference(ScalarFunction f, int order);
  static MoiSymbol tensor_product(std::vector<TensorTerm> terms);
  static MoiSymbol raw(int arity, RawFn fn);

  int arity() const { return arity_; }
  Complex operator()(std::span<const Complex> args) const;

 private:
  enum class Kind { divided_difference, tensor_product, raw };
  Kind kind_ = Kind::raw;
  int arity_ = 0;
  ScalarFunction f_;
  std::vector<TensorTerm> terms_;
  RawFn raw_;
};

// Sum over eigenvalue tuples of phi(l_1..l_{n+1}) P_1 X_1 P_2 ... X_n P_{n+1}.
Mat moi_normal(const MoiSymbol& symbol, std::span<const SpectralDecomposition> ops,
               std::span<const Mat> xs, Exec exec = Exec::parallel);

// Same sum written as an explicit loop over eigenvector index tuples.
Mat moi_naive(const MoiSymbol& symbol, std::span<const SpectralDecomposition> ops,
              std::span<const Mat> xs);

// Gamma^{T_1..T_{n+1}}(f^[n])(X_1..X_n) for an analytic polynomial f.
Mat moi_contraction_poly(const ScalarFunction& f, int n, std::span<const Mat> ts,
                         std::span<const Mat> xs);

struct DilationResult {
  CMatrix u;
  Index embed_begin = 0;
  Index embed_size = 0;
  int depth = 0;

  Mat compress(const Mat& big) const;
  // Zero extension of an operator on the distinguished copy.
  Mat embed(const Mat& small) const;
};

DilationResult dilate(const CMatrix& t, int depth);

struct SpectralAtom {
  double theta;  // in [0, 2pi)
  Mat weight;    // compressed spectral projection
};

class SemiSpectralDistribution {
 public:
  SemiSpectralDistribution(std::vector<SpectralAtom> atoms, int grid_size, Index dim);

  const std::vector<SpectralAtom>& atoms() const { return atoms_; }
  int grid_size() const { return grid_size_; }
  double grid_point(int j) const;
  // Right-continuous cumulative E(theta) for theta in [0, 2pi].
  Mat cumulative(double theta) const;
  Mat cumulative_at(int j) const { return cumulative(grid_point(j)); }
  // Integral of z^k dE(z).
  Mat moment(int k) const;

 private:
  std::vector<SpectralAtom> atoms_;
  int grid_size_;
  Index dim_;
};

SemiSpectralDistribution semi_spectral(const CMatrix& t, int depth, int grid_size);

// Functional calculus helpers.
Mat apply_normal(const ScalarFunction& f, const SpectralDecomposition& d);
Mat apply_hermitian(const ScalarFunction& f, const Mat& h);
// Laurent polynomial of a contraction, z^{-k} acting as (T*)^k.
Mat apply_laurent(const Laurent& p, const Mat& t);

}  // namespace moilab
