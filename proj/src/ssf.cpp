#include "moilab/ssf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "moilab/errors.hpp"
#include "moilab/taylor.hpp"

namespace moilab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// One eigen-tuple: Peano kernel, or an atom when every node coincides.
void add_tuple(RealLineDensity& out, Complex weight, const std::vector<double>& nodes) {
  if (weight == Complex(0.0)) return;
  try {
    out.add_kernel(weight, peano_kernel(nodes));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateKnots) throw;
    double mean = 0.0;
    for (double x : nodes) mean += x;
    mean /= double(nodes.size());
    out.add_atom(mean, weight / factorial(static_cast<int>(nodes.size()) - 1));
  }
}

Complex trace_of(const Mat& m) { return m.trace(); }

}  // namespace

RealLineDensity koplienko_ssf(const CMatrix& h0, const CMatrix& v, int t_quad, Exec exec) {
  if (h0.dim() != v.dim()) fail(ErrorCode::DimensionMismatch, "koplienko_ssf");
  if (hermitian_residual(h0.matrix()) > kTolClass || hermitian_residual(v.matrix()) > kTolClass)
    fail(ErrorCode::NotHermitian, "koplienko_ssf needs hermitian H0 and V");
  const QuadratureRule gl = quadrature(QuadRule::gauss_legendre_01, t_quad);
  std::vector<RealLineDensity> parts(t_quad);
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
  for (int q = 0; q < t_quad; ++q) {
    const double t = gl.nodes[q];
    const double coef = 2.0 * gl.weights[q] * (1.0 - t);
    const SpectralDecomposition d =
        spectral_decompose(CMatrix(h0.matrix() + t * v.matrix(), OpClass::hermitian));
    const Mat y = d.basis().adjoint() * v.matrix() * d.basis();
    for (std::size_t j = 0; j < d.size(); ++j)
      for (std::size_t k = 0; k < d.size(); ++k) {
        // Tr(P_j V P_k V) = squared Frobenius norm of the (j, k) block
        const double w = y.block(d.offset(j), d.offset(k), d.multiplicity(j), d.multiplicity(k))
                             .squaredNorm();
        if (w == 0.0) continue;
        const double lj = d.eigenvalue(j).real(), lk = d.eigenvalue(k).real();
        if (j == k)
          parts[q].add_atom(lj, coef * w / 2.0);
        else
          add_tuple(parts[q], coef * w, {lj, lk, lj});
      }
  }
  RealLineDensity out;
  for (const RealLineDensity& p : parts) out.append(p);
  return out;
}

RealLineDensity modified_ssf_selfadjoint(const CMatrix& h0, const CMatrix& v, const Mat& x, int n,
                                         const ModifiedSaOptions& opt) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "order must be >= 1");
  const Index dim = h0.dim();
  if (v.dim() != dim || x.rows() != dim || x.cols() != dim)
    fail(ErrorCode::DimensionMismatch, "modified_ssf_selfadjoint");
  const Index cap = opt.dim_cap > 0 ? opt.dim_cap : (n <= 3 ? 8 : 5);
  if (dim > cap) fail(ErrorCode::InvalidArgument, "dimension above the configured cap");
  if (hermitian_residual(h0.matrix()) > kTolClass || hermitian_residual(v.matrix()) > kTolClass)
    fail(ErrorCode::NotHermitian, "modified_ssf_selfadjoint needs hermitian H0 and V");

  const SpectralDecomposition d0 = spectral_decompose(CMatrix(h0.matrix(), OpClass::hermitian));
  const SpectralDecomposition d1 =
      spectral_decompose(CMatrix(h0.matrix() + v.matrix(), OpClass::hermitian));
  std::vector<const SpectralDecomposition*> ops(n + 1, &d0);
  ops[opt.order == TupleOrder::perturbed_first ? 0 : 1] = &d1;

  double tuples = 1.0;
  for (const auto* op : ops) tuples *= double(op->size());
  if (tuples > double(opt.tuple_budget))
    fail(ErrorCode::TupleBudgetExceeded, "eigen-tuple count " + std::to_string(tuples));

  std::vector<Mat> y(n);
  for (int j = 0; j < n; ++j) y[j] = ops[j]->basis().adjoint() * v.matrix() * ops[j + 1]->basis();
  const Mat xt = ops[n]->basis().adjoint() * x * ops[0]->basis();

  const long k0 = static_cast<long>(ops[0]->size());
  std::vector<RealLineDensity> parts(k0);
#pragma omp parallel for schedule(dynamic) if (opt.exec == Exec::parallel)
  for (long a = 0; a < k0; ++a) {
    std::vector<std::size_t> idx(n + 1, 0);
    idx[0] = static_cast<std::size_t>(a);
    std::vector<Mat> prefix(n + 1);
    const Index r0 = ops[0]->offset(idx[0]), m0 = ops[0]->multiplicity(idx[0]);
    prefix[0] = Mat::Identity(m0, m0);
    // iterative DFS over idx[1..n]
    int level = 1;
    std::vector<std::size_t> next(n + 1, 0);
    while (level >= 1) {
      if (next[level] == ops[level]->size()) {
        next[level] = 0;
        --level;
        continue;
      }
      const std::size_t c = next[level]++;
      idx[level] = c;
      const SpectralDecomposition& from = *ops[level - 1];
      const SpectralDecomposition& to = *ops[level];
      prefix[level] = prefix[level - 1] * y[level - 1].block(from.offset(idx[level - 1]), to.offset(c),
                                                             from.multiplicity(idx[level - 1]),
                                                             to.multiplicity(c));
      if (level < n) {
        ++level;
        continue;
      }
      const Complex w =
          trace_of(prefix[n] * xt.block(to.offset(c), r0, to.multiplicity(c), m0));
      std::vector<double> nodes(n + 1);
      for (int j = 0; j <= n; ++j) nodes[j] = ops[j]->eigenvalue(idx[j]).real();
      add_tuple(parts[a], w, nodes);
    }
  }
  RealLineDensity out;
  for (const RealLineDensity& p : parts) out.append(p);
  return out;
}

GridDensity contraction_ssf_fdh(const CMatrix& t0, const CMatrix& t1, int s_quad, int depth,
                                int grid, Exec exec) {
  if (t0.dim() != t1.dim()) fail(ErrorCode::DimensionMismatch, "contraction_ssf_fdh");
  const Mat v = t1.matrix() - t0.matrix();
  const QuadratureRule gl = quadrature(QuadRule::gauss_legendre_01, s_quad);
  struct Jump {
    double theta;
    Complex value;
  };
  // node 0 is s = 0 with weight -1 (sum of the s weights is 1)
  std::vector<std::vector<Jump>> parts(s_quad + 1);
  bool left = false;
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
  for (int q = 0; q <= s_quad; ++q) {
    const double s = q == 0 ? 0.0 : gl.nodes[q - 1];
    const double w = q == 0 ? -1.0 : gl.weights[q - 1];
    const Mat ts = t0.matrix() + s * v;
    if (top_singular_value(ts) > 1.0 + kTolClass) {
#pragma omp atomic write
      left = true;
      continue;
    }
    const SemiSpectralDistribution e = semi_spectral(CMatrix(ts, OpClass::contraction), depth, grid);
    for (const SpectralAtom& a : e.atoms())
      parts[q].push_back({a.theta, -w * (v * a.weight).trace()});
  }
  if (left) fail(ErrorCode::PathLeavesContractions, "path leaves the contractions");

  std::vector<Jump> jumps;
  for (const auto& p : parts) jumps.insert(jumps.end(), p.begin(), p.end());
  std::stable_sort(jumps.begin(), jumps.end(),
                   [](const Jump& a, const Jump& b) { return a.theta < b.theta; });
  std::vector<double> breaks{0.0};
  std::vector<Complex> values;
  Complex acc = 0.0;
  std::size_t i = 0;
  while (i < jumps.size() && jumps[i].theta <= 0.0) acc += jumps[i++].value;
  while (i < jumps.size()) {
    const double th = jumps[i].theta;
    values.push_back(acc);
    breaks.push_back(th);
    while (i < jumps.size() && jumps[i].theta == th) acc += jumps[i++].value;
  }
  values.push_back(acc);
  breaks.push_back(kTwoPi);
  return GridDensity(std::move(breaks), std::move(values));
}

MomentFit fit_moments(const std::vector<int>& ms, const std::vector<Complex>& targets, int n) {
  if (ms.size() != targets.size()) fail(ErrorCode::DimensionMismatch, "fit_moments");
  std::vector<int> ks;
  for (int m : ms)
    if (falling(m, n) != 0.0) ks.push_back(n - 1 - m);
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

  MomentFit fit;
  fit.unknowns = static_cast<int>(ks.size());
  const Index rows = static_cast<Index>(ms.size());
  Vec t(rows);
  for (Index r = 0; r < rows; ++r) t(r) = targets[r];
  if (ks.empty()) {
    fit.residual = rows ? t.cwiseAbs().maxCoeff() : 0.0;
    return fit;
  }
  Mat g = Mat::Zero(rows, fit.unknowns);
  for (Index r = 0; r < rows; ++r) {
    const int k = n - 1 - ms[r];
    const auto it = std::lower_bound(ks.begin(), ks.end(), k);
    if (it != ks.end() && *it == k && falling(ms[r], n) != 0.0)
      g(r, it - ks.begin()) = Complex(0.0, kTwoPi) * falling(ms[r], n);
  }
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(g);
  cod.setThreshold(1e-12);
  const Vec b = cod.solve(t);
  fit.rank = static_cast<int>(cod.rank());
  fit.rank_deficient = fit.rank < fit.unknowns;
  fit.residual = (g * b - t).cwiseAbs().maxCoeff();
  std::vector<Complex> coeffs(ks.back() - ks.front() + 1, 0.0);
  for (std::size_t j = 0; j < ks.size(); ++j) coeffs[ks[j] - ks.front()] = b(static_cast<Index>(j));
  fit.density = FourierDensity(ks.front(), std::move(coeffs));
  return fit;
}

UnitarySecondOrder unitary_second_order(const CMatrix& u0, const CMatrix& a, int degree) {
  if (degree < 2) fail(ErrorCode::InvalidArgument, "degree must be >= 2");
  const Index d = u0.dim();
  const Mat& am = a.matrix();
  const Mat e = exp_skew(CMatrix(am, OpClass::hermitian), 1.0).matrix();
  UnitarySecondOrder out;
  out.c = ((e - Mat::Identity(d, d) - Complex(0.0, 1.0) * am) * u0.matrix()).trace();
  out.xi1 = FourierDensity(-1, {out.c / Complex(0.0, kTwoPi)});
  const PathSpec path = PathSpec::multiplicative(u0, a, 2);
  std::vector<int> ms;
  std::vector<Complex> targets;
  for (int m = -degree; m <= degree; ++m) {
    const Complex tr = remainder_mult(ScalarFunction::monomial(m, Domain::circle), path).trace();
    ms.push_back(m);
    targets.push_back(tr - (m == 1 ? out.c : Complex(0.0)));
  }
  out.xi2 = fit_moments(ms, targets, 2);
  return out;
}

Complex unitary_constant_quadrature(const CMatrix& u0, const CMatrix& a, int points) {
  const QuadratureRule gl = quadrature(QuadRule::gauss_legendre_01, points);
  const SpectralDecomposition d = spectral_decompose(CMatrix(a.matrix(), OpClass::hermitian));
  const Mat a2 = a.matrix() * a.matrix();
  Complex s = 0.0;
  for (int i = 0; i < points; ++i) {
    const double t = gl.nodes[i];
    const Mat e = d.apply([t](Complex z) { return std::exp(Complex(0.0, t * z.real())); });
    s += gl.weights[i] * (1.0 - t) * (a2 * e * u0.matrix()).trace();
  }
  return -s;
}

Complex weighted_remainder_trace(const ScalarFunction& f, const CMatrix& base, const CMatrix& dir,
                                 const Mat& x, int n) {
  const PathSpec path = PathSpec::linear(base, dir, n);
  return (remainder_linear(f, path).value * x).trace();
}

Complex weighted_mult_remainder_trace(const ScalarFunction& f, const CMatrix& base,
                                      const CMatrix& a, const Mat& x, int n) {
  const PathSpec path = PathSpec::multiplicative(base, a, n);
  return (remainder_mult(f, path) * x).trace();
}

MomentFit modified_ssf_unitary_gn(const CMatrix& u0, const CMatrix& a, const Mat& x, int n,
                                  int degree) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "order must be >= 1");
  std::vector<int> ms;
  std::vector<Complex> targets;
  for (int m = -degree; m <= degree; ++m) {
    if (m > 0 && m < n) continue;
    ms.push_back(m);
    targets.push_back(
        weighted_mult_remainder_trace(ScalarFunction::monomial(m, Domain::circle), u0, a, x, n));
  }
  return fit_moments(ms, targets, n);
}

MomentFit modified_ssf_contraction(const CMatrix& t0, const CMatrix& t1, const Mat& x, int n,
                                   int degree) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "order must be >= 1");
  const CMatrix v(t1.matrix() - t0.matrix());
  const CMatrix base(t0.matrix(), OpClass::contraction);
  std::vector<int> ms;
  std::vector<Complex> targets;
  for (int m = n; m <= degree; ++m) {
    ms.push_back(m);
    targets.push_back(
        weighted_remainder_trace(ScalarFunction::monomial(m, Domain::disk), base, v, x, n));
  }
  return fit_moments(ms, targets, n);
}

MultTrace mult_contraction_trace(const CMatrix& t0, const CMatrix& a, const ScalarFunction& f,
                                 int depth) {
  if (!f.is_laurent()) fail(ErrorCode::NotTrigPolynomial, "mult_contraction_trace");
  const Laurent& p = f.laurent();
  if (depth < std::max(std::abs(p.lo()), std::abs(p.hi())))
    fail(ErrorCode::InvalidArgument, "dilation depth below the top frequency");
  MultTrace out;
  const CMatrix base(t0.matrix(), OpClass::contraction);
  out.direct = remainder_mult(f, PathSpec::multiplicative(base, a, 2)).trace();
  const DilationResult dil = dilate(base, depth);
  const CMatrix b(dil.embed(a.matrix()), OpClass::hermitian);
  out.dilated = dil.compress(remainder_mult(f, PathSpec::multiplicative(dil.u, b, 2))).trace();
  out.discrepancy = std::abs(out.direct - out.dilated) / std::max(1.0, std::abs(out.direct));
  if (out.discrepancy > 1e-6)
    fail(ErrorCode::DilationTraceMismatch, "dilated trace disagrees: " + std::to_string(out.discrepancy));
  return out;
}

SensitivityReport ssf_sensitivity(const CMatrix& h0, const CMatrix& v, const CMatrix& w,
                                  const Mat& x, const Mat& y, int n) {
  SensitivityReport r;
  const RealLineDensity eta = modified_ssf_selfadjoint(h0, v, x, n);
  r.dist_v_w = l1_distance(eta, modified_ssf_selfadjoint(h0, w, x, n));
  const RealLineDensity eta_y = modified_ssf_selfadjoint(h0, v, y, n);
  r.dist_x_y = l1_distance(eta, eta_y);
  for (std::size_t i = 0; i < r.h.size(); ++i) {
    const double h = r.h[i];
    RealLineDensity q;
    q.append(modified_ssf_selfadjoint(h0, v, x + h * y, n), 1.0 / h);
    q.append(eta, -1.0 / h);
    q.append(eta_y, -1.0);
    r.quotient[i] = q.l1_norm();
  }
  return r;
}

}  // namespace moilab
