#include "moilab/density.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "moilab/errors.hpp"

namespace moilab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Complex horner(const std::vector<Complex>& c, double u) {
  Complex v = 0.0;
  for (std::size_t j = c.size(); j-- > 0;) v = v * u + c[j];
  return v;
}

// Re-expands sum c_i u^i around u = v + d.
std::vector<double> taylor_shift(const std::vector<double>& c, double d) {
  std::vector<double> out(c);
  const std::size_t n = out.size();
  for (std::size_t k = 0; k + 1 < n; ++k)
    for (std::size_t j = n - 1; j > k; --j) out[j - 1] += d * out[j];
  return out;
}

}  // namespace

Complex PiecewisePoly::eval(double x) const {
  if (breaks.size() < 2 || x < breaks.front() || x >= breaks.back()) return 0.0;
  const auto it = std::upper_bound(breaks.begin(), breaks.end(), x);
  const std::size_t p = static_cast<std::size_t>(it - breaks.begin()) - 1;
  return horner(pieces[p], x - breaks[p]);
}

double PiecewisePoly::l1_norm(int sub, int gl_points) const {
  const QuadratureRule& gl = gauss_legendre(gl_points);
  double s = 0.0;
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    if (pieces[p].empty()) continue;
    const double h = (breaks[p + 1] - breaks[p]) / sub;
    for (int q = 0; q < sub; ++q)
      for (int i = 0; i < gl_points; ++i) {
        const double u = h * (q + gl.nodes[i]);
        s += h * gl.weights[i] * std::abs(horner(pieces[p], u));
      }
  }
  return s;
}

void RealLineDensity::add_kernel(Complex weight, PeanoKernel kernel) {
  terms_.push_back({weight, std::move(kernel)});
}

void RealLineDensity::add_atom(double x, Complex mass) { atoms_.push_back({x, mass}); }

void RealLineDensity::append(const RealLineDensity& other, Complex scale) {
  for (const KernelTerm& t : other.terms_) terms_.push_back({t.weight * scale, t.kernel});
  for (const Atom& a : other.atoms_) atoms_.push_back({a.x, a.mass * scale});
}

Complex RealLineDensity::integrate(const std::function<Complex(double)>& g, int gl_points) const {
  Complex s = 0.0;
  for (const KernelTerm& t : terms_) s += t.weight * t.kernel.integrate(g, gl_points);
  for (const Atom& a : atoms_) s += a.mass * g(a.x);
  return s;
}

Complex RealLineDensity::pair(const ScalarFunction& f, int n) const {
  return integrate([&](double x) { return f.deriv(n, x); });
}

PiecewisePoly RealLineDensity::merged() const {
  PiecewisePoly out;
  for (const KernelTerm& t : terms_)
    out.breaks.insert(out.breaks.end(), t.kernel.breaks().begin(), t.kernel.breaks().end());
  std::sort(out.breaks.begin(), out.breaks.end());
  out.breaks.erase(std::unique(out.breaks.begin(), out.breaks.end()), out.breaks.end());
  if (out.breaks.size() < 2) {
    out.breaks.clear();
    return out;
  }
  out.pieces.assign(out.breaks.size() - 1, {});
  for (const KernelTerm& t : terms_) {
    const auto& kb = t.kernel.breaks();
    const auto& kp = t.kernel.pieces();
    for (std::size_t p = 0; p < kp.size(); ++p) {
      auto first = std::lower_bound(out.breaks.begin(), out.breaks.end(), kb[p]);
      auto last = std::lower_bound(first, out.breaks.end(), kb[p + 1]);
      for (auto it = first; it != last; ++it) {
        const std::size_t q = static_cast<std::size_t>(it - out.breaks.begin());
        const std::vector<double> c = taylor_shift(kp[p], *it - kb[p]);
        std::vector<Complex>& dst = out.pieces[q];
        if (dst.size() < c.size()) dst.resize(c.size(), 0.0);
        for (std::size_t j = 0; j < c.size(); ++j) dst[j] += t.weight * c[j];
      }
    }
  }
  return out;
}

std::vector<Atom> RealLineDensity::merged_atoms() const {
  std::map<double, Complex> m;
  for (const Atom& a : atoms_) m[a.x] += a.mass;
  std::vector<Atom> out;
  for (const auto& [x, mass] : m)
    if (mass != Complex(0.0)) out.push_back({x, mass});
  return out;
}

Complex RealLineDensity::eval(double x) const {
  Complex s = 0.0;
  for (const KernelTerm& t : terms_) s += t.weight * t.kernel.eval(x);
  return s;
}

double RealLineDensity::l1_norm() const {
  double s = merged().l1_norm();
  for (const Atom& a : merged_atoms()) s += std::abs(a.mass);
  return s;
}

std::vector<double> RealLineDensity::sample_points() const {
  const PiecewisePoly pp = merged();
  std::vector<double> out;
  for (std::size_t p = 0; p < pp.breaks.size(); ++p) {
    out.push_back(pp.breaks[p]);
    if (p + 1 < pp.breaks.size()) out.push_back(0.5 * (pp.breaks[p] + pp.breaks[p + 1]));
  }
  return out;
}

double RealLineDensity::lo() const {
  double v = std::numeric_limits<double>::infinity();
  for (const KernelTerm& t : terms_) v = std::min(v, t.kernel.lo());
  for (const Atom& a : atoms_) v = std::min(v, a.x);
  return v;
}

double RealLineDensity::hi() const {
  double v = -std::numeric_limits<double>::infinity();
  for (const KernelTerm& t : terms_) v = std::max(v, t.kernel.hi());
  for (const Atom& a : atoms_) v = std::max(v, a.x);
  return v;
}

double l1_distance(const RealLineDensity& a, const RealLineDensity& b) {
  RealLineDensity d = a;
  d.append(b, -1.0);
  return d.l1_norm();
}

FourierDensity::FourierDensity(int lo, std::vector<Complex> b) : lo_(lo), b_(std::move(b)) {}

Complex FourierDensity::coeff(int k) const {
  if (k < lo_ || k > hi()) return 0.0;
  return b_[k - lo_];
}

Complex FourierDensity::value(double theta) const {
  Complex s = 0.0;
  for (int k = lo_; k <= hi(); ++k) s += coeff(k) * std::polar(1.0, k * theta);
  return s;
}

Complex FourierDensity::pair(const Laurent& g) const {
  Complex s = 0.0;
  for (int k = lo_; k <= hi(); ++k) s += coeff(k) * g.coeff(-k - 1);
  return Complex(0.0, kTwoPi) * s;
}

Complex FourierDensity::pair(const ScalarFunction& f, int n) const {
  if (!f.is_laurent()) fail(ErrorCode::NotTrigPolynomial, "Fourier pairing needs a Laurent polynomial");
  return pair(f.laurent().derivative(n));
}

GridDensity::GridDensity(std::vector<double> breaks, std::vector<Complex> values)
    : breaks_(std::move(breaks)), values_(std::move(values)) {
  if (breaks_.size() != values_.size() + 1)
    fail(ErrorCode::DimensionMismatch, "grid density needs one value per cell");
}

Complex GridDensity::value(double theta) const {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0) t += kTwoPi;
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
  if (it == breaks_.begin() || it == breaks_.end()) return 0.0;
  return values_[static_cast<std::size_t>(it - breaks_.begin()) - 1];
}

Complex GridDensity::pair(const std::function<Complex(Complex)>& g, CircleWeight w,
                          int gl_points) const {
  const QuadratureRule& gl = gauss_legendre(gl_points);
  Complex s = 0.0;
  for (std::size_t j = 0; j < values_.size(); ++j) {
    if (values_[j] == Complex(0.0)) continue;
    const double width = breaks_[j + 1] - breaks_[j];
    if (width <= 0) continue;
    // wide cells (few jumps) are split so the rule stays accurate for oscillating g
    const int sub = std::max(1, static_cast<int>(std::ceil(width / 0.05)));
    const double h = width / sub;
    Complex cell = 0.0;
    for (int p = 0; p < sub; ++p) {
      const double a = breaks_[j] + p * h;
      for (int i = 0; i < gl_points; ++i) {
        const Complex z = std::polar(1.0, a + h * gl.nodes[i]);
        Complex wt = 1.0;
        if (w == CircleWeight::exp_dtheta) wt = z;
        if (w == CircleWeight::iexp_dtheta) wt = Complex(0.0, 1.0) * z;
        cell += gl.weights[i] * g(z) * wt;
      }
    }
    s += h * values_[j] * cell;
  }
  return s;
}

Complex GridDensity::pair(const ScalarFunction& f, int n, CircleWeight w) const {
  return pair([&](Complex z) { return f.deriv(n, z); }, w);
}

GridDensity GridDensity::resample(int g) const {
  std::vector<double> b(g + 1);
  for (int j = 0; j <= g; ++j) b[j] = kTwoPi * j / g;
  std::vector<Complex> v(g, 0.0);
  std::size_t c = 0;
  for (int j = 0; j < g; ++j) {
    while (c < values_.size() && breaks_[c + 1] <= b[j]) ++c;
    Complex acc = 0.0;
    for (std::size_t k = c; k < values_.size() && breaks_[k] < b[j + 1]; ++k) {
      const double lo = std::max(b[j], breaks_[k]), hi = std::min(b[j + 1], breaks_[k + 1]);
      if (hi > lo) acc += (hi - lo) * values_[k];
    }
    v[j] = acc / (b[j + 1] - b[j]);
  }
  return GridDensity(std::move(b), std::move(v));
}

}  // namespace moilab
