#include "moilab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "moilab/errors.hpp"

namespace moilab {

const char* to_string(OpClass c) {
  switch (c) {
    case OpClass::hermitian: return "hermitian";
    case OpClass::unitary: return "unitary";
    case OpClass::normal: return "normal";
    case OpClass::contraction: return "contraction";
    case OpClass::general: return "general";
  }
  return "general";
}

double max_abs(const Mat& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

double hermitian_residual(const Mat& a) { return max_abs(a - a.adjoint()); }

double unitary_residual(const Mat& a) {
  return max_abs(a.adjoint() * a - Mat::Identity(a.rows(), a.cols()));
}

double normal_residual(const Mat& a) { return max_abs(a.adjoint() * a - a * a.adjoint()); }

double top_singular_value(const Mat& a) { return schatten_norm(a, kInf); }

CMatrix::CMatrix(Mat entries, OpClass tag) : m_(std::move(entries)), tag_(tag) {
  if (m_.rows() != m_.cols() || m_.rows() == 0)
    fail(ErrorCode::DimensionMismatch, "CMatrix must be square and non-empty");
  if (!m_.allFinite()) fail(ErrorCode::InvalidArgument, "CMatrix has non-finite entries");
}

CMatrix CMatrix::checked(Mat entries, OpClass tag, double tol) {
  CMatrix c(std::move(entries), tag);
  c.require(tol);
  return c;
}

double CMatrix::class_residual() const {
  switch (tag_) {
    case OpClass::hermitian: return hermitian_residual(m_);
    case OpClass::unitary: return unitary_residual(m_);
    case OpClass::normal: return normal_residual(m_);
    case OpClass::contraction: return std::max(0.0, top_singular_value(m_) - 1.0);
    case OpClass::general: return 0.0;
  }
  return 0.0;
}

void CMatrix::require(double tol) const {
  const double r = class_residual();
  if (r <= tol) return;
  const std::string msg = std::string("class check failed for tag ") + to_string(tag_) +
                          ", residual " + std::to_string(r);
  switch (tag_) {
    case OpClass::hermitian: fail(ErrorCode::NotHermitian, msg);
    case OpClass::contraction: fail(ErrorCode::NotContraction, msg);
    default: fail(ErrorCode::NotNormal, msg);
  }
}

HermitianEigen jacobi_eigen(const Mat& a, double tol, int max_sweeps) {
  const Index n = a.rows();
  Mat m = (a + a.adjoint()) * 0.5;
  Mat q = Mat::Identity(n, n);
  const double scale = std::max(m.norm(), std::numeric_limits<double>::min());

  auto off_norm = [&] {
    double s = 0.0;
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i)
        if (i != j) s += std::norm(m(i, j));
    return std::sqrt(s);
  };

  int sweep = 0;
  while (off_norm() > tol * scale) {
    if (++sweep > max_sweeps)
      fail(ErrorCode::ConvergenceFailure, "Jacobi eigensolver did not converge");
    for (Index p = 0; p < n - 1; ++p) {
      for (Index r = p + 1; r < n; ++r) {
        const Complex b = m(p, r);
        const double ab = std::abs(b);
        if (ab == 0.0) continue;
        const Complex ph = std::conj(b / ab);
        const double tau = (m(r, r).real() - m(p, p).real()) / (2.0 * ab);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // V = diag(1, ph) * [[c, s], [-s, c]]
        const Complex v00 = c, v01 = s, v10 = -s * ph, v11 = c * ph;
        for (Index i = 0; i < n; ++i) {
          const Complex xp = m(i, p), xr = m(i, r);
          m(i, p) = xp * v00 + xr * v10;
          m(i, r) = xp * v01 + xr * v11;
        }
        for (Index j = 0; j < n; ++j) {
          const Complex xp = m(p, j), xr = m(r, j);
          m(p, j) = std::conj(v00) * xp + std::conj(v10) * xr;
          m(r, j) = std::conj(v01) * xp + std::conj(v11) * xr;
        }
        m(p, r) = 0.0;
        m(r, p) = 0.0;
        m(p, p) = m(p, p).real();
        m(r, r) = m(r, r).real();
        for (Index i = 0; i < n; ++i) {
          const Complex xp = q(i, p), xr = q(i, r);
          q(i, p) = xp * v00 + xr * v10;
          q(i, r) = xp * v01 + xr * v11;
        }
      }
    }
  }

  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index x, Index y) { return m(x, x).real() < m(y, y).real(); });
  HermitianEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    out.values(k) = m(order[k], order[k]).real();
    out.vectors.col(k) = q.col(order[k]);
  }
  return out;
}

SpectralDecomposition::SpectralDecomposition(std::vector<Complex> eigenvalues, Mat basis,
                                             std::vector<Index> offsets)
    : eigenvalues_(std::move(eigenvalues)), basis_(std::move(basis)), offsets_(std::move(offsets)) {
  if (offsets_.size() != eigenvalues_.size() + 1 || offsets_.back() != basis_.cols())
    fail(ErrorCode::DimensionMismatch, "inconsistent spectral decomposition");
}

Mat SpectralDecomposition::projection(std::size_t i) const {
  const auto q = basis_.middleCols(offsets_[i], multiplicity(i));
  return q * q.adjoint();
}

std::vector<Mat> SpectralDecomposition::projections() const {
  std::vector<Mat> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(projection(i));
  return out;
}

Mat SpectralDecomposition::apply(const std::function<Complex(Complex)>& f) const {
  Vec d(dim());
  for (std::size_t i = 0; i < size(); ++i)
    d.segment(offsets_[i], multiplicity(i)).setConstant(f(eigenvalues_[i]));
  return basis_ * d.asDiagonal() * basis_.adjoint();
}

Mat SpectralDecomposition::reconstruct() const {
  return apply([](Complex z) { return z; });
}

std::vector<int> cluster_values(const std::vector<Complex>& values, double tol, int* count) {
  const int n = static_cast<int>(values.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(values[i] - values[j]) <= tol) parent[find(i)] = find(j);

  std::vector<int> root_id(n, -1);
  std::vector<Complex> sums;
  std::vector<int> counts;
  std::vector<int> raw(n);
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    if (root_id[r] < 0) {
      root_id[r] = static_cast<int>(sums.size());
      sums.emplace_back(0.0);
      counts.push_back(0);
    }
    raw[i] = root_id[r];
    sums[raw[i]] += values[i];
    counts[raw[i]] += 1;
  }
  const int k = static_cast<int>(sums.size());
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const Complex ma = sums[a] / double(counts[a]), mb = sums[b] / double(counts[b]);
    if (ma.real() != mb.real()) return ma.real() < mb.real();
    return ma.imag() < mb.imag();
  });
  std::vector<int> rank(k);
  for (int r = 0; r < k; ++r) rank[order[r]] = r;
  for (int i = 0; i < n; ++i) raw[i] = rank[raw[i]];
  if (count) *count = k;
  return raw;
}

namespace {

SpectralDecomposition assemble(const Mat& a, const Mat& q, const std::vector<Complex>& lambda,
                               double cluster_tol) {
  int k = 0;
  const std::vector<int> id = cluster_values(lambda, cluster_tol, &k);
  const Index n = q.cols();
  std::vector<Index> offsets(k + 1, 0);
  std::vector<Complex> means(k, 0.0);
  for (Index i = 0; i < n; ++i) {
    offsets[id[i] + 1] += 1;
    means[id[i]] += lambda[i];
  }
  for (int c = 0; c < k; ++c) {
    means[c] /= double(offsets[c + 1]);
    offsets[c + 1] += offsets[c];
  }
  Mat basis(a.rows(), n);
  std::vector<Index> fill(offsets.begin(), offsets.end() - 1);
  for (Index i = 0; i < n; ++i) basis.col(fill[id[i]]++) = q.col(i);
  return SpectralDecomposition(std::move(means), std::move(basis), std::move(offsets));
}

}  // namespace

SpectralDecomposition spectral_decompose(const CMatrix& a, double cluster_tol, double tol_class) {
  const Mat& m = a.matrix();
  const Index n = m.rows();
  if (a.tag() == OpClass::hermitian) {
    if (hermitian_residual(m) > tol_class) fail(ErrorCode::NotHermitian, "spectral_decompose");
    const HermitianEigen e = jacobi_eigen(m);
    std::vector<Complex> lambda(n);
    for (Index i = 0; i < n; ++i) lambda[i] = e.values(i);
    return assemble(m, e.vectors, lambda, cluster_tol);
  }
  if (a.tag() == OpClass::general || a.tag() == OpClass::contraction)
    fail(ErrorCode::NotNormal, "spectral_decompose needs a hermitian, unitary or normal tag");
  const double scale = std::max(1.0, max_abs(m));
  if (normal_residual(m) > tol_class * scale * scale)
    fail(ErrorCode::NotNormal, "normality residual exceeds tolerance");

  const Mat x = (m + m.adjoint()) * 0.5;
  const Mat y = (m - m.adjoint()) * Complex(0.0, -0.5);
  std::mt19937_64 rng(0x6d6f696c6162ULL);
  std::uniform_real_distribution<double> unif(0.5, 1.5);
  for (int attempt = 0; attempt < 4; ++attempt) {
    const double alpha = unif(rng), beta = unif(rng);
    const HermitianEigen e = jacobi_eigen(alpha * x + beta * y);
    std::vector<Complex> lambda(n);
    Vec d(n);
    for (Index i = 0; i < n; ++i) {
      const auto col = e.vectors.col(i);
      lambda[i] = col.dot(m * col);
      d(i) = lambda[i];
    }
    const double resid = max_abs(m - e.vectors * d.asDiagonal() * e.vectors.adjoint());
    if (resid <= 1e-12 * scale * std::max<double>(1.0, double(n)))
      return assemble(m, e.vectors, lambda, cluster_tol);
  }
  fail(ErrorCode::ConvergenceFailure, "normal eigendecomposition residual too large");
}

double schatten_norm(const Mat& a, double p) {
  if (!(p >= 1.0)) fail(ErrorCode::InvalidExponent, "Schatten exponent must be >= 1");
  if (a.size() == 0) return 0.0;
  const Eigen::VectorXd s = Eigen::JacobiSVD<Mat>(a).singularValues();
  const double top = s.maxCoeff();
  if (std::isinf(p)) return top;
  if (top == 0.0) return 0.0;
  if (p == 1.0) return s.sum();
  double acc = 0.0;
  for (Index i = 0; i < s.size(); ++i) acc += std::pow(s(i) / top, p);
  return top * std::pow(acc, 1.0 / p);
}

Mat gaussian_matrix(Index rows, Index cols, Seed seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Mat out(rows, cols);
  const double r = 1.0 / std::sqrt(2.0);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) {
      const double re = g(rng);
      const double im = g(rng);
      out(i, j) = Complex(re * r, im * r);
    }
  return out;
}

CMatrix random_operator(RandomKind kind, Index dim, Seed seed, double margin) {
  if (dim < 1) fail(ErrorCode::InvalidArgument, "random_operator: dim must be >= 1");
  Mat g = gaussian_matrix(dim, dim, seed);
  switch (kind) {
    case RandomKind::hermitian: {
      Mat h = (g + g.adjoint()) * 0.5;
      return CMatrix(h, OpClass::hermitian);
    }
    case RandomKind::unitary: {
      // modified Gram-Schmidt, two passes
      for (int pass = 0; pass < 2; ++pass)
        for (Index j = 0; j < dim; ++j) {
          for (Index i = 0; i < j; ++i) g.col(j) -= g.col(i).dot(g.col(j)) * g.col(i);
          g.col(j).normalize();
        }
      return CMatrix(g, OpClass::unitary);
    }
    case RandomKind::contraction: {
      const double top = top_singular_value(g);
      return CMatrix(g * ((1.0 - margin) / top), OpClass::contraction);
    }
    case RandomKind::psd: {
      Mat p = g.adjoint() * g;
      p = (p + p.adjoint()) * 0.5;
      p /= top_singular_value(p);
      return CMatrix(p, OpClass::hermitian);
    }
  }
  fail(ErrorCode::InvalidArgument, "random_operator: unknown kind");
}

CMatrix exp_skew(const CMatrix& a, double s) {
  if (hermitian_residual(a.matrix()) > kTolClass) fail(ErrorCode::NotHermitian, "exp_skew");
  const SpectralDecomposition d = spectral_decompose(CMatrix(a.matrix(), OpClass::hermitian));
  return CMatrix(d.apply([s](Complex z) { return std::exp(Complex(0.0, s * z.real())); }),
                 OpClass::unitary);
}

Mat psd_sqrt(const Mat& a) {
  const HermitianEigen e = jacobi_eigen(a);
  Eigen::VectorXd r = e.values.cwiseMax(0.0).cwiseSqrt();
  return e.vectors * r.cast<Complex>().asDiagonal() * e.vectors.adjoint();
}

Mat matrix_power(const Mat& a, int k) {
  Mat out = Mat::Identity(a.rows(), a.cols());
  for (int i = 0; i < k; ++i) out = out * a;
  return out;
}

}  // namespace moilab
