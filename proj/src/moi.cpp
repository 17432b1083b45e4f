#include "moilab/moi.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "moilab/errors.hpp"

namespace moilab {

MoiSymbol MoiSymbol::divided_difference(ScalarFunction f, int order) {
  if (order < 0) fail(ErrorCode::InvalidArgument, "divided difference order must be >= 0");
  MoiSymbol s;
  s.kind_ = Kind::divided_difference;
  s.arity_ = order + 1;
  s.f_ = std::move(f);
  return s;
}

MoiSymbol MoiSymbol::tensor_product(std::vector<TensorTerm> terms) {
  if (terms.empty()) fail(ErrorCode::InvalidArgument, "empty tensor product");
  MoiSymbol s;
  s.kind_ = Kind::tensor_product;
  s.arity_ = static_cast<int>(terms.front().factors.size());
  for (const TensorTerm& t : terms)
    if (static_cast<int>(t.factors.size()) != s.arity_)
      fail(ErrorCode::ArityMismatch, "tensor terms of different arity");
  s.terms_ = std::move(terms);
  return s;
}

MoiSymbol MoiSymbol::raw(int arity, RawFn fn) {
  MoiSymbol s;
  s.kind_ = Kind::raw;
  s.arity_ = arity;
  s.raw_ = std::move(fn);
  return s;
}

Complex MoiSymbol::operator()(std::span<const Complex> args) const {
  switch (kind_) {
    case Kind::divided_difference:
      if (f_.is_laurent()) return divided_difference_laurent(f_.laurent(), args);
      return divided_difference_table(f_, args);
    case Kind::tensor_product: {
      Complex s = 0.0;
      for (const TensorTerm& t : terms_) {
        Complex p = t.weight;
        for (std::size_t i = 0; i < args.size(); ++i) p *= t.factors[i].eval(args[i]);
        s += p;
      }
      return s;
    }
    case Kind::raw: return raw_(args);
  }
  return 0.0;
}

namespace {

void check_moi_inputs(const MoiSymbol& symbol, std::span<const SpectralDecomposition> ops,
                      std::span<const Mat> xs) {
  if (ops.empty() || symbol.arity() != static_cast<int>(ops.size()) ||
      xs.size() + 1 != ops.size())
    fail(ErrorCode::ArityMismatch, "symbol arity, operator count and X count disagree");
  const Index d = ops[0].dim();
  for (const auto& op : ops)
    if (op.dim() != d) fail(ErrorCode::DimensionMismatch, "operators of different dimension");
  for (const Mat& x : xs)
    if (x.rows() != d || x.cols() != d) fail(ErrorCode::DimensionMismatch, "X of wrong size");
}

struct Chain {
  const MoiSymbol& symbol;
  std::span<const SpectralDecomposition> ops;
  std::vector<Mat> y;
  int n;

  // singleton clusters everywhere: scalar recursion over indices
  void scalar_row(Index a, Mat& m) const {
    std::vector<Complex> args(n + 1);
    args[0] = ops[0].eigenvalue(a);
    if (n == 0) {
      m(a, a) = symbol(args);
      return;
    }
    scalar_rec(1, a, a, Complex(1.0), args, m);
  }

  void scalar_rec(int level, Index a, Index prev, Complex prefix, std::vector<Complex>& args,
                  Mat& m) const {
    const Mat& yy = y[level - 1];
    const Index k = static_cast<Index>(ops[level].size());
    for (Index c = 0; c < k; ++c) {
      const Complex p = prefix * yy(prev, c);
      if (p == Complex(0.0)) continue;
      args[level] = ops[level].eigenvalue(c);
      if (level == n)
        m(a, c) += symbol(args) * p;
      else
        scalar_rec(level + 1, a, c, p, args, m);
    }
  }

  void block_row(std::size_t a, Mat& m) const {
    std::vector<Complex> args(n + 1);
    args[0] = ops[0].eigenvalue(a);
    const Index r0 = ops[0].offset(a), ra = ops[0].multiplicity(a);
    if (n == 0) {
      m.block(r0, r0, ra, ra) += symbol(args) * Mat::Identity(ra, ra);
      return;
    }
    block_rec(1, a, a, Mat::Identity(ra, ra), args, m);
  }

  void block_rec(int level, std::size_t a, std::size_t prev, const Mat& prefix,
                 std::vector<Complex>& args, Mat& m) const {
    const SpectralDecomposition& from = ops[level - 1];
    const SpectralDecomposition& to = ops[level];
    const Mat& yy = y[level - 1];
    for (std::size_t c = 0; c < to.size(); ++c) {
      const Mat p = prefix * yy.block(from.offset(prev), to.offset(c), from.multiplicity(prev),
                                      to.multiplicity(c));
      args[level] = to.eigenvalue(c);
      if (level == n)
        m.block(ops[0].offset(a), to.offset(c), p.rows(), p.cols()) += symbol(args) * p;
      else
        block_rec(level + 1, a, c, p, args, m);
    }
  }
};

}  // namespace

Mat moi_normal(const MoiSymbol& symbol, std::span<const SpectralDecomposition> ops,
               std::span<const Mat> xs, Exec exec) {
  check_moi_inputs(symbol, ops, xs);
  const int n = static_cast<int>(xs.size());
  const Index d = ops[0].dim();
  Chain chain{symbol, ops, {}, n};
  for (int j = 0; j < n; ++j)
    chain.y.push_back(ops[j].basis().adjoint() * xs[j] * ops[j + 1].basis());

  bool singletons = true;
  for (const auto& op : ops) singletons = singletons && static_cast<Index>(op.size()) == d;

  Mat m = Mat::Zero(d, d);
  const long k0 = static_cast<long>(ops[0].size());
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
  for (long a = 0; a < k0; ++a) {
    if (singletons)
      chain.scalar_row(a, m);
    else
      chain.block_row(static_cast<std::size_t>(a), m);
  }
  return ops[0].basis() * m * ops[n].basis().adjoint();
}

Mat moi_naive(const MoiSymbol& symbol, std::span<const SpectralDecomposition> ops,
              std::span<const Mat> xs) {
  check_moi_inputs(symbol, ops, xs);
  const int n = static_cast<int>(xs.size());
  std::vector<std::vector<Mat>> proj;
  for (const auto& op : ops) proj.push_back(op.projections());
  const Index d = ops[0].dim();
  Mat out = Mat::Zero(d, d);
  std::vector<std::size_t> idx(n + 1, 0);
  std::vector<Complex> args(n + 1);
  while (true) {
    Mat term = proj[0][idx[0]];
    args[0] = ops[0].eigenvalue(idx[0]);
    for (int j = 1; j <= n; ++j) {
      term = term * xs[j - 1] * proj[j][idx[j]];
      args[j] = ops[j].eigenvalue(idx[j]);
    }
    out += symbol(args) * term;
    int j = 0;
    while (j <= n && ++idx[j] == ops[j].size()) idx[j++] = 0;
    if (j > n) break;
  }
  return out;
}

Mat moi_contraction_poly(const ScalarFunction& f, int n, std::span<const Mat> ts,
                         std::span<const Mat> xs) {
  if (!f.is_laurent()) fail(ErrorCode::NotAnalyticPolynomial, "polynomial symbol required");
  const Laurent& p = f.laurent();
  for (int m = p.lo(); m < 0 && m <= p.hi(); ++m)
    if (p.coeff(m) != Complex(0.0))
      fail(ErrorCode::NotAnalyticPolynomial, "negative frequency present");
  if (static_cast<int>(ts.size()) != n + 1 || static_cast<int>(xs.size()) != n)
    fail(ErrorCode::ArityMismatch, "need n+1 operators and n directions");
  const Index d = ts[0].rows();
  for (const Mat& t : ts)
    if (t.rows() != d || t.cols() != d) fail(ErrorCode::DimensionMismatch, "operator size");
  for (const Mat& x : xs)
    if (x.rows() != d || x.cols() != d) fail(ErrorCode::DimensionMismatch, "X size");

  Mat out = Mat::Zero(d, d);
  const int top = p.hi() - n;
  if (top < 0) return out;
  // l[j][m] = sum over p_j + ... + p_n = m of T_j^{p_j} X_j ... X_{n-1} T_n^{p_n}
  std::vector<std::vector<Mat>> l(n + 1, std::vector<Mat>(top + 1));
  l[n][0] = Mat::Identity(d, d);
  for (int m = 1; m <= top; ++m) l[n][m] = ts[n] * l[n][m - 1];
  for (int j = n - 1; j >= 0; --j)
    for (int m = 0; m <= top; ++m) {
      l[j][m] = xs[j] * l[j + 1][m];
      if (m > 0) l[j][m] += ts[j] * l[j][m - 1];
    }
  for (int r = std::max(n, 0); r <= p.hi(); ++r)
    if (p.coeff(r) != Complex(0.0)) out += p.coeff(r) * l[0][r - n];
  return out;
}

Mat DilationResult::compress(const Mat& big) const {
  return big.block(embed_begin, embed_begin, embed_size, embed_size);
}

Mat DilationResult::embed(const Mat& small) const {
  Mat out = Mat::Zero(u.dim(), u.dim());
  out.block(embed_begin, embed_begin, embed_size, embed_size) = small;
  return out;
}

DilationResult dilate(const CMatrix& t, int depth) {
  const Mat& tm = t.matrix();
  const Index d = tm.rows();
  if (depth < 1) fail(ErrorCode::InvalidArgument, "dilation depth must be >= 1");
  if (top_singular_value(tm) > 1.0 + kTolClass)
    fail(ErrorCode::NotContraction, "dilate: operator norm exceeds 1");
  const Mat id = Mat::Identity(d, d);
  const Mat dt = psd_sqrt(id - tm.adjoint() * tm);
  const Mat dts = psd_sqrt(id - tm * tm.adjoint());
  const Index big = d * (depth + 1);
  Mat u = Mat::Zero(big, big);
  u.block(0, 0, d, d) = tm;
  u.block(0, depth * d, d, d) = dts;
  u.block(d, 0, d, d) = dt;
  u.block(d, depth * d, d, d) = -tm.adjoint();
  for (int k = 2; k <= depth; ++k) u.block(k * d, (k - 1) * d, d, d) = id;
  if (unitary_residual(u) > 1e-8) fail(ErrorCode::NonUnitaryResult, "dilation is not unitary");
  return DilationResult{CMatrix(std::move(u), OpClass::unitary), 0, d, depth};
}

SemiSpectralDistribution::SemiSpectralDistribution(std::vector<SpectralAtom> atoms, int grid_size,
                                                   Index dim)
    : atoms_(std::move(atoms)), grid_size_(grid_size), dim_(dim) {
  std::stable_sort(atoms_.begin(), atoms_.end(),
                   [](const SpectralAtom& a, const SpectralAtom& b) { return a.theta < b.theta; });
}

double SemiSpectralDistribution::grid_point(int j) const {
  return 2.0 * std::numbers::pi * j / grid_size_;
}

Mat SemiSpectralDistribution::cumulative(double theta) const {
  Mat e = Mat::Zero(dim_, dim_);
  for (const SpectralAtom& a : atoms_) {
    if (a.theta > theta) break;
    e += a.weight;
  }
  return e;
}

Mat SemiSpectralDistribution::moment(int k) const {
  Mat s = Mat::Zero(dim_, dim_);
  for (const SpectralAtom& a : atoms_) s += std::polar(1.0, k * a.theta) * a.weight;
  return s;
}

SemiSpectralDistribution semi_spectral(const CMatrix& t, int depth, int grid_size) {
  if (grid_size < 16) fail(ErrorCode::InvalidPointCount, "semi_spectral grid needs G >= 16");
  const DilationResult dil = dilate(t, depth);
  const SpectralDecomposition dec = spectral_decompose(dil.u);
  const Index d = t.dim();
  std::vector<SpectralAtom> atoms;
  for (std::size_t i = 0; i < dec.size(); ++i) {
    double th = std::arg(dec.eigenvalue(i));
    if (th < 0) th += 2.0 * std::numbers::pi;
    if (th >= 2.0 * std::numbers::pi) th = 0.0;
    const auto q = dec.basis().block(dil.embed_begin, dec.offset(i), d, dec.multiplicity(i));
    atoms.push_back({th, q * q.adjoint()});
  }
  return SemiSpectralDistribution(std::move(atoms), grid_size, d);
}

Mat apply_normal(const ScalarFunction& f, const SpectralDecomposition& d) {
  return d.apply([&](Complex z) { return f.eval(z); });
}

Mat apply_hermitian(const ScalarFunction& f, const Mat& h) {
  return apply_normal(f, spectral_decompose(CMatrix(h, OpClass::hermitian)));
}

Mat apply_laurent(const Laurent& p, const Mat& t) {
  const Index d = t.rows();
  Mat out = Mat::Zero(d, d);
  if (p.empty()) return out;
  for (int m = p.hi(); m >= std::max(0, p.lo()); --m) out = out * t + p.coeff(m) * Mat::Identity(d, d);
  if (p.lo() > 0) out = out * matrix_power(t, p.lo());
  if (p.lo() < 0) {
    const Mat ts = t.adjoint();
    Mat neg = Mat::Zero(d, d);
    for (int m = p.lo(); m <= std::min(-1, p.hi()); ++m) neg = neg * ts + p.coeff(m) * Mat::Identity(d, d);
    out += neg * matrix_power(ts, -std::min(-1, p.hi()));
  }
  return out;
}

}  // namespace moilab
