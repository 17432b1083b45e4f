#include "moilab/taylor.hpp"

#include <cmath>

#include "moilab/errors.hpp"
#include "moilab/moi.hpp"

namespace moilab {

PathSpec PathSpec::linear(CMatrix base, CMatrix direction, int order) {
  PathSpec p{PathKind::linear, std::move(base), std::move(direction), order};
  p.validate();
  return p;
}

PathSpec PathSpec::multiplicative(CMatrix base, CMatrix direction, int order) {
  PathSpec p{PathKind::multiplicative, std::move(base), std::move(direction), order};
  p.validate();
  return p;
}

void PathSpec::validate(double tol) const {
  if (base.dim() != direction.dim()) fail(ErrorCode::DimensionMismatch, "path dimensions");
  if (order < 1) fail(ErrorCode::InvalidArgument, "path order must be >= 1");
  if (kind == PathKind::linear) {
    if (base.tag() == OpClass::hermitian) {
      base.require(tol);
      if (hermitian_residual(direction.matrix()) > tol)
        fail(ErrorCode::NotHermitian, "self-adjoint path needs a hermitian direction");
    } else if (base.tag() == OpClass::contraction) {
      base.require(tol);
      if (top_singular_value(base.matrix() + direction.matrix()) > 1.0 + tol)
        fail(ErrorCode::NotContraction, "base + direction is not a contraction");
    } else {
      fail(ErrorCode::InvalidArgument, "linear path base must be hermitian or a contraction");
    }
  } else {
    if (hermitian_residual(direction.matrix()) > tol)
      fail(ErrorCode::NotHermitian, "multiplicative path needs a hermitian direction");
    if (base.tag() != OpClass::unitary && base.tag() != OpClass::contraction)
      fail(ErrorCode::InvalidArgument, "multiplicative path base must be unitary or a contraction");
    base.require(tol);
  }
}

Mat function_of(const ScalarFunction& f, const CMatrix& t) {
  if (t.tag() == OpClass::hermitian) return apply_hermitian(f, t.matrix());
  if (t.tag() == OpClass::unitary || t.tag() == OpClass::normal) {
    if (f.is_laurent()) return apply_laurent(f.laurent(), t.matrix());
    return apply_normal(f, spectral_decompose(t));
  }
  if (!f.is_laurent()) fail(ErrorCode::NotAnalyticPolynomial, "contractions need polynomial f");
  return apply_laurent(f.laurent(), t.matrix());
}

Mat derivative_linear(const ScalarFunction& f, const PathSpec& path, int k, double t) {
  if (path.kind != PathKind::linear) fail(ErrorCode::InvalidArgument, "linear path expected");
  const Mat point = path.base.matrix() + t * path.direction.matrix();
  if (k == 0) return function_of(f, CMatrix(point, path.base.tag()));
  const std::vector<Mat> xs(k, path.direction.matrix());
  Mat g;
  if (path.self_adjoint()) {
    const SpectralDecomposition d = spectral_decompose(CMatrix(point, OpClass::hermitian));
    const std::vector<SpectralDecomposition> ops(k + 1, d);
    g = moi_normal(MoiSymbol::divided_difference(f, k), ops, xs);
  } else {
    const std::vector<Mat> ts(k + 1, point);
    g = moi_contraction_poly(f, k, ts, xs);
  }
  return factorial(k) * g;
}

Remainder remainder_linear(const ScalarFunction& f, const PathSpec& path) {
  if (path.kind != PathKind::linear) fail(ErrorCode::InvalidArgument, "linear path expected");
  const int n = path.order;
  const Mat& base = path.base.matrix();
  const Mat& dir = path.direction.matrix();
  const Mat end = base + dir;

  Remainder r;
  r.direct = function_of(f, CMatrix(end, path.base.tag())) - function_of(f, path.base);
  for (int k = 1; k < n; ++k) r.direct -= derivative_linear(f, path, k, 0.0) / factorial(k);

  const std::vector<Mat> xs(n, dir);
  if (path.self_adjoint()) {
    std::vector<SpectralDecomposition> ops;
    ops.push_back(spectral_decompose(CMatrix(end, OpClass::hermitian)));
    const SpectralDecomposition d0 = spectral_decompose(CMatrix(base, OpClass::hermitian));
    for (int j = 0; j < n; ++j) ops.push_back(d0);
    r.value = moi_normal(MoiSymbol::divided_difference(f, n), ops, xs);
  } else {
    std::vector<Mat> ts(n + 1, base);
    ts[0] = end;
    r.value = moi_contraction_poly(f, n, ts, xs);
  }
  r.discrepancy = max_abs(r.value - r.direct) / std::max(1.0, max_abs(r.direct));
  if (r.discrepancy > 1e-7)
    fail(ErrorCode::ClosedFormMismatch, "remainder routes disagree: " + std::to_string(r.discrepancy));
  return r;
}

namespace {

// Coefficient of s^k in (sum_l s^l F_l)^m, F_l given for l = 0..k.
Mat power_series_coeff(const std::vector<Mat>& factors, int m, int k) {
  const Index d = factors[0].rows();
  std::vector<Mat> c(k + 1, Mat::Zero(d, d));
  c[0] = Mat::Identity(d, d);
  for (int step = 0; step < m; ++step) {
    std::vector<Mat> next(k + 1, Mat::Zero(d, d));
    for (int l = 0; l <= k; ++l)
      for (int a = 0; a <= l; ++a) next[l] += c[l - a] * factors[a];
    c = std::move(next);
  }
  return c[k];
}

}  // namespace

Mat derivative_mult(const ScalarFunction& f, const PathSpec& path, int k) {
  if (path.kind != PathKind::multiplicative)
    fail(ErrorCode::InvalidArgument, "multiplicative path expected");
  if (!f.is_laurent()) fail(ErrorCode::NotTrigPolynomial, "multiplicative derivatives need a trig polynomial");
  const Laurent& p = f.laurent();
  const Mat& b = path.base.matrix();
  const Mat& a = path.direction.matrix();
  const Index d = b.rows();
  if (k == 0) return apply_laurent(p, b);

  // e^{isA} B = sum_l s^l (iA)^l / l! B ; its adjoint B* e^{-isA} for negative powers
  std::vector<Mat> fwd(k + 1), bwd(k + 1);
  Mat ap = Mat::Identity(d, d);
  for (int l = 0; l <= k; ++l) {
    const Complex c = std::pow(Complex(0.0, 1.0), l) / factorial(l);
    fwd[l] = c * ap * b;
    bwd[l] = std::conj(c) * b.adjoint() * ap;
    ap = ap * a;
  }
  Mat out = Mat::Zero(d, d);
  for (int m = p.lo(); m <= p.hi(); ++m) {
    const Complex cm = p.coeff(m);
    if (m == 0 || cm == Complex(0.0)) continue;
    out += cm * power_series_coeff(m > 0 ? fwd : bwd, std::abs(m), k);
  }
  return factorial(k) * out;
}

Mat remainder_mult(const ScalarFunction& f, const PathSpec& path) {
  if (path.kind != PathKind::multiplicative)
    fail(ErrorCode::InvalidArgument, "multiplicative path expected");
  if (!f.is_laurent()) fail(ErrorCode::NotTrigPolynomial, "multiplicative remainder needs a trig polynomial");
  const Mat& b = path.base.matrix();
  const Mat w = exp_skew(CMatrix(path.direction.matrix(), OpClass::hermitian), 1.0).matrix() * b;
  Mat r = apply_laurent(f.laurent(), w) - apply_laurent(f.laurent(), b);
  for (int k = 1; k < path.order; ++k) r -= derivative_mult(f, path, k) / factorial(k);
  return r;
}

}  // namespace moilab
