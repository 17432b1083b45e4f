#pragma once

#include "moilab/funcs.hpp"
#include "moilab/linalg.hpp"

namespace moilab {

enum class PathKind { linear, multiplicative };

struct PathSpec {
  PathKind kind = PathKind::linear;
  CMatrix base;       // H0, T0 or U0
  CMatrix direction;  // V, K or hermitian A
  int order = 1;

  static PathSpec linear(CMatrix base, CMatrix direction, int order);
  static PathSpec multiplicative(CMatrix base, CMatrix direction, int order);
  // Throws when the path invariant fails.
  void validate(double tol = kTolClass) const;
  bool self_adjoint() const { return base.tag() == OpClass::hermitian; }
};

// d^k/dt^k f(base + t dir), via the divided-difference MOI.
Mat derivative_linear(const ScalarFunction& f, const PathSpec& path, int k, double t = 0.0);

struct Remainder {
  Mat value;   // closed form
  Mat direct;  // f(base+dir) - f(base) - sum_{k<n} derivatives / k!
  double discrepancy = 0.0;
};

Remainder remainder_linear(const ScalarFunction& f, const PathSpec& path);

// d^k/ds^k at s = 0 of f(e^{isA} base), term by term over the monomials of f.
Mat derivative_mult(const ScalarFunction& f, const PathSpec& path, int k);
Mat remainder_mult(const ScalarFunction& f, const PathSpec& path);

// f(T) for a hermitian or contraction base (polynomials only in the latter case).
Mat function_of(const ScalarFunction& f, const CMatrix& t);

}  // namespace moilab
