#include "moilab/funcs.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "moilab/errors.hpp"

namespace moilab {

namespace {

Complex ipow(Complex z, int e) {
  if (e < 0) return 1.0 / ipow(z, -e);
  Complex r = 1.0;
  while (e > 0) {
    if (e & 1) r *= z;
    z *= z;
    e >>= 1;
  }
  return r;
}

}  // namespace

double falling(int m, int k) {
  double r = 1.0;
  for (int j = 0; j < k; ++j) r *= double(m - j);
  return r;
}

double factorial(int n) {
  double r = 1.0;
  for (int j = 2; j <= n; ++j) r *= j;
  return r;
}

Laurent::Laurent(int lo, std::vector<Complex> coeffs) : lo_(lo), c_(std::move(coeffs)) {}

Complex Laurent::coeff(int m) const {
  if (m < lo_ || m > hi()) return 0.0;
  return c_[m - lo_];
}

Complex Laurent::deriv(int k, Complex z) const {
  if (c_.empty()) return 0.0;
  // exponents m - k >= 0
  Complex pos = 0.0;
  const int mlow = std::max(lo_, k);
  for (int m = hi(); m >= mlow; --m) pos = pos * z + coeff(m) * falling(m, k);
  if (mlow > k) pos *= ipow(z, mlow - k);
  if (lo_ >= 0) return pos;
  // exponents m - k < 0 with m < 0
  const int mtop = std::min(-1, hi());
  const Complex w = 1.0 / z;
  Complex neg = 0.0;
  for (int m = lo_; m <= mtop; ++m) neg = neg * w + coeff(m) * falling(m, k);
  return pos + neg * ipow(w, k - mtop);
}

Laurent Laurent::derivative(int k) const {
  if (c_.empty()) return {};
  std::vector<Complex> d(c_.size());
  for (int m = lo_; m <= hi(); ++m) d[m - lo_] = coeff(m) * falling(m, k);
  return Laurent(lo_ - k, std::move(d));
}

ScalarFunction ScalarFunction::polynomial(std::vector<Complex> a, Domain d) {
  if (d == Domain::circle) fail(ErrorCode::InvalidArgument, "use trig_polynomial on the circle");
  ScalarFunction f;
  f.domain_ = d;
  f.repr_ = Repr::polynomial;
  f.poly_ = Laurent(0, std::move(a));
  f.max_order_ = std::numeric_limits<int>::max();
  return f;
}

ScalarFunction ScalarFunction::trig_polynomial(int lo, std::vector<Complex> c) {
  ScalarFunction f;
  f.domain_ = Domain::circle;
  f.repr_ = Repr::trig_polynomial;
  f.poly_ = Laurent(lo, std::move(c));
  f.max_order_ = std::numeric_limits<int>::max();
  return f;
}

ScalarFunction ScalarFunction::monomial(int m, Domain d) {
  if (m < 0) {
    if (d != Domain::circle) fail(ErrorCode::InvalidArgument, "negative powers live on the circle");
    return trig_polynomial(m, {1.0});
  }
  std::vector<Complex> a(m + 1, 0.0);
  a[m] = 1.0;
  if (d == Domain::circle) return trig_polynomial(0, std::move(a));
  return polynomial(std::move(a), d);
}

ScalarFunction ScalarFunction::callable(Domain d, int max_order, DerivFn fn, TaylorFn taylor) {
  ScalarFunction f;
  f.domain_ = d;
  f.repr_ = Repr::callable;
  f.fn_ = std::move(fn);
  f.taylor_ = std::move(taylor);
  f.max_order_ = max_order;
  return f;
}

ScalarFunction ScalarFunction::exp() {
  return callable(
      Domain::real_line, 1 << 20, [](int, Complex z) { return std::exp(z); },
      [](int j) { return Complex(1.0 / factorial(j)); });
}

ScalarFunction ScalarFunction::sin() {
  return callable(Domain::real_line, 1 << 20, [](int k, Complex z) -> Complex {
    switch (k % 4) {
      case 0: return std::sin(z);
      case 1: return std::cos(z);
      case 2: return -std::sin(z);
      default: return -std::cos(z);
    }
  });
}

ScalarFunction ScalarFunction::geometric(Complex a) {
  return callable(
      Domain::disk, 150,
      [a](int k, Complex z) { return factorial(k) * ipow(a, k) / ipow(1.0 - a * z, k + 1); },
      [a](int j) { return ipow(a, j); });
}

const Laurent& ScalarFunction::laurent() const {
  if (!is_laurent()) fail(ErrorCode::InvalidArgument, "function has no polynomial representation");
  return poly_;
}

Complex ScalarFunction::deriv(int k, Complex z) const {
  if (k > max_order_)
    fail(ErrorCode::InsufficientDerivatives, "derivative order " + std::to_string(k));
  if (is_laurent()) return poly_.deriv(k, z);
  return fn_(k, z);
}

bool ScalarFunction::has_taylor() const {
  return repr_ == Repr::polynomial || (repr_ == Repr::trig_polynomial && poly_.lo() >= 0) ||
         static_cast<bool>(taylor_);
}

Complex ScalarFunction::taylor(int j) const {
  if (is_laurent()) return poly_.coeff(j);
  if (!taylor_) fail(ErrorCode::InvalidArgument, "no Taylor coefficients available");
  return taylor_(j);
}

void validate_nodes(std::span<const Complex> nodes, Domain d) {
  if (nodes.empty()) fail(ErrorCode::InvalidArgument, "empty node list");
  for (const Complex& z : nodes) {
    bool ok = std::isfinite(z.real()) && std::isfinite(z.imag());
    switch (d) {
      case Domain::real_line: ok = ok && std::abs(z.imag()) <= 1e-9; break;
      case Domain::circle: ok = ok && std::abs(std::abs(z) - 1.0) <= 1e-9; break;
      case Domain::disk: ok = ok && std::abs(z) <= 1.0 + 1e-9; break;
    }
    if (!ok) fail(ErrorCode::InvalidArgument, "node outside the function's domain");
  }
}

Complex divided_difference_laurent(const Laurent& p, std::span<const Complex> nodes) {
  const int n = static_cast<int>(nodes.size()) - 1;
  Complex out = 0.0;
  if (p.empty()) return out;
  // h_j of the nodes, built one variable at a time
  auto complete_h = [](std::span<const Complex> xs, int top, std::vector<Complex>& h) {
    h.assign(top + 1, 0.0);
    h[0] = 1.0;
    for (const Complex& x : xs)
      for (int m = 1; m <= top; ++m) h[m] += x * h[m - 1];
  };
  std::vector<Complex> h;
  if (p.hi() >= n) {
    complete_h(nodes, p.hi() - n, h);
    for (int m = std::max(n, p.lo()); m <= p.hi(); ++m) out += p.coeff(m) * h[m - n];
  }
  if (p.lo() < 0) {
    std::vector<Complex> y(nodes.size());
    Complex prod = (n % 2 == 0) ? 1.0 : -1.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      y[i] = 1.0 / nodes[i];
      prod *= y[i];
    }
    const int kmax = -p.lo();
    complete_h(y, kmax - 1, h);
    for (int m = p.lo(); m <= std::min(-1, p.hi()); ++m) out += p.coeff(m) * prod * h[-m - 1];
  }
  return out;
}

Complex divided_difference_table(const ScalarFunction& f, std::span<const Complex> nodes,
                                 double merge_tol) {
  const int n = static_cast<int>(nodes.size()) - 1;
  std::vector<Complex> vals(nodes.begin(), nodes.end());
  int groups = 0;
  const std::vector<int> id = cluster_values(vals, merge_tol, &groups);
  std::vector<Complex> mean(groups, 0.0);
  std::vector<int> count(groups, 0);
  for (int i = 0; i <= n; ++i) {
    mean[id[i]] += vals[i];
    count[id[i]] += 1;
  }
  std::vector<Complex> z;
  std::vector<int> g;
  for (int c = 0; c < groups; ++c)
    for (int r = 0; r < count[c]; ++r) {
      z.push_back(mean[c] / double(count[c]));
      g.push_back(c);
    }
  // q[i] holds column j of the table after step j
  std::vector<Complex> q(n + 1);
  for (int i = 0; i <= n; ++i) q[i] = f.eval(z[i]);
  for (int j = 1; j <= n; ++j) {
    for (int i = n; i >= j; --i) {
      if (g[i] == g[i - j])
        q[i] = f.deriv(j, z[i]) / factorial(j);
      else
        q[i] = (q[i] - q[i - 1]) / (z[i] - z[i - j]);
    }
  }
  return q[n];
}

Complex divided_difference(const ScalarFunction& f, std::span<const Complex> nodes,
                           double merge_tol) {
  validate_nodes(nodes, f.domain());
  if (f.is_laurent()) return divided_difference_laurent(f.laurent(), nodes);
  return divided_difference_table(f, nodes, merge_tol);
}

QuadratureRule quadrature(QuadRule rule, int points) {
  if (points < 1) fail(ErrorCode::InvalidPointCount, "quadrature needs at least one point");
  QuadratureRule q;
  q.nodes.resize(points);
  q.weights.resize(points);
  if (rule == QuadRule::periodic_trapezoid) {
    for (int j = 0; j < points; ++j) {
      q.nodes[j] = 2.0 * std::numbers::pi * j / points;
      q.weights[j] = 2.0 * std::numbers::pi / points;
    }
    return q;
  }
  const int n = points;
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    q.nodes[i] = 0.5 * (1.0 - x);
    q.weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return q;
}

const QuadratureRule& gauss_legendre(int points) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<QuadratureRule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[points];
  if (!slot) slot = std::make_unique<QuadratureRule>(quadrature(QuadRule::gauss_legendre_01, points));
  return *slot;
}

Complex hermite_genocchi_oracle(const ScalarFunction& f, std::span<const double> nodes,
                                int quad_points) {
  const int n = static_cast<int>(nodes.size()) - 1;
  if (n < 0) fail(ErrorCode::InvalidArgument, "empty node list");
  if (n == 0) return f.eval(nodes[0]);
  const QuadratureRule gl = quadrature(QuadRule::gauss_legendre_01, quad_points);
  std::vector<int> idx(n, 0);
  Complex total = 0.0;
  while (true) {
    double r = 1.0, jac = 1.0, wt = 1.0, x = 0.0;
    for (int k = 0; k < n; ++k) {
      const double u = gl.nodes[idx[k]];
      wt *= gl.weights[idx[k]];
      jac *= r;
      const double t = r * u;
      x += t * nodes[k];
      r -= t;
    }
    x += r * nodes[n];
    total += wt * jac * f.deriv(n, x);
    int k = 0;
    while (k < n && ++idx[k] == quad_points) idx[k++] = 0;
    if (k == n) break;
  }
  return total;
}

PeanoKernel::PeanoKernel(std::vector<double> knots, std::vector<double> breaks,
                         std::vector<std::vector<double>> pieces)
    : knots_(std::move(knots)), breaks_(std::move(breaks)), pieces_(std::move(pieces)) {}

double PeanoKernel::eval(double x) const {
  if (x < lo() || x >= hi()) return 0.0;
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
  const std::size_t p = static_cast<std::size_t>(it - breaks_.begin()) - 1;
  const std::vector<double>& c = pieces_[p];
  const double u = x - breaks_[p];
  double v = 0.0;
  for (std::size_t j = c.size(); j-- > 0;) v = v * u + c[j];
  return v;
}

double PeanoKernel::integral() const {
  double s = 0.0;
  for (std::size_t p = 0; p < pieces_.size(); ++p) {
    const double h = breaks_[p + 1] - breaks_[p];
    double hp = h;
    for (std::size_t j = 0; j < pieces_[p].size(); ++j) {
      s += pieces_[p][j] * hp / double(j + 1);
      hp *= h;
    }
  }
  return s;
}

Complex PeanoKernel::integrate(const std::function<Complex(double)>& g, int gl_points) const {
  const QuadratureRule& gl = gauss_legendre(gl_points);
  Complex s = 0.0;
  for (std::size_t p = 0; p < pieces_.size(); ++p) {
    const double a = breaks_[p], h = breaks_[p + 1] - a;
    const std::vector<double>& c = pieces_[p];
    for (int i = 0; i < gl_points; ++i) {
      const double u = h * gl.nodes[i];
      double v = 0.0;
      for (std::size_t j = c.size(); j-- > 0;) v = v * u + c[j];
      s += h * gl.weights[i] * v * g(a + u);
    }
  }
  return s;
}

PeanoKernel peano_kernel(std::span<const double> nodes, double node_spread_min) {
  const int n = static_cast<int>(nodes.size()) - 1;
  if (n < 1) fail(ErrorCode::DegenerateKnots, "kernel needs at least two nodes");
  std::vector<Complex> vals(nodes.begin(), nodes.end());
  int groups = 0;
  const std::vector<int> id = cluster_values(vals, node_spread_min, &groups);
  if (groups < 2) fail(ErrorCode::DegenerateKnots, "all knots coincide");
  std::vector<double> mean(groups, 0.0);
  std::vector<int> count(groups, 0);
  for (int i = 0; i <= n; ++i) {
    mean[id[i]] += nodes[i];
    count[id[i]] += 1;
  }
  std::vector<double> t, breaks;
  for (int c = 0; c < groups; ++c) {
    mean[c] /= count[c];
    breaks.push_back(mean[c]);
    for (int r = 0; r < count[c]; ++r) t.push_back(mean[c]);
  }
  const std::size_t np = breaks.size() - 1;

  using Piecewise = std::vector<std::vector<double>>;
  std::vector<Piecewise> m(n, Piecewise(np));
  for (int i = 0; i < n; ++i) {
    if (!(t[i + 1] > t[i])) continue;
    for (std::size_t p = 0; p < np; ++p)
      if (breaks[p] >= t[i] && breaks[p + 1] <= t[i + 1]) m[i][p] = {1.0 / (t[i + 1] - t[i])};
  }
  for (int k = 2; k <= n; ++k) {
    std::vector<Piecewise> next(n - k + 1, Piecewise(np));
    for (int i = 0; i + k <= n; ++i) {
      if (!(t[i + k] > t[i])) continue;
      const double scale = k / ((k - 1.0) * (t[i + k] - t[i]));
      for (std::size_t p = 0; p < np; ++p) {
        const std::vector<double>& left = m[i][p];
        const std::vector<double>& right = m[i + 1][p];
        if (left.empty() && right.empty()) continue;
        std::vector<double> out(k, 0.0);
        // (u + (b_p - t_i)) * left
        const double sl = breaks[p] - t[i];
        for (std::size_t j = 0; j < left.size(); ++j) {
          out[j] += sl * left[j];
          out[j + 1] += left[j];
        }
        // ((t_{i+k} - b_p) - u) * right
        const double sr = t[i + k] - breaks[p];
        for (std::size_t j = 0; j < right.size(); ++j) {
          out[j] += sr * right[j];
          out[j + 1] -= right[j];
        }
        for (double& v : out) v *= scale;
        next[i][p] = std::move(out);
      }
    }
    m = std::move(next);
  }
  Piecewise pieces = std::move(m[0]);
  const double inv = 1.0 / factorial(n);
  for (auto& c : pieces) {
    c.resize(n, 0.0);
    for (double& v : c) v *= inv;
  }
  return PeanoKernel(std::move(t), std::move(breaks), std::move(pieces));
}

ScalarFunction cesaro_approx(const ScalarFunction& f, int k) {
  if (f.domain() != Domain::disk || !f.has_taylor())
    fail(ErrorCode::InvalidArgument, "Cesaro means need a disk function with Taylor coefficients");
  if (k < 1) return ScalarFunction::polynomial({0.0});
  std::vector<Complex> a(k);
  for (int j = 0; j < k; ++j) a[j] = f.taylor(j) * (double(k - j) / k);
  return ScalarFunction::polynomial(std::move(a));
}

ScalarFunction fejer_smooth(const ScalarFunction& f, int n) {
  if (!f.is_laurent()) fail(ErrorCode::NotTrigPolynomial, "Fejer smoothing needs a trig polynomial");
  const Laurent& p = f.laurent();
  std::vector<Complex> c(p.coeffs());
  for (int m = p.lo(); m <= p.hi(); ++m)
    c[m - p.lo()] *= std::max(0.0, 1.0 - std::abs(m) / double(n + 1));
  return ScalarFunction::trig_polynomial(p.lo(), std::move(c));
}

double sup_norm_circle(const ScalarFunction& f, int k, int points) {
  double s = 0.0;
  for (int j = 0; j < points; ++j) {
    const double th = 2.0 * std::numbers::pi * j / points;
    s = std::max(s, std::abs(f.deriv(k, std::polar(1.0, th))));
  }
  return s;
}

double sup_norm_interval(const ScalarFunction& f, int k, double a, double b, int points) {
  double s = 0.0;
  for (int j = 0; j <= points; ++j) {
    const double x = a + (b - a) * j / points;
    s = std::max(s, std::abs(f.deriv(k, x)));
  }
  return s;
}

}  // namespace moilab
