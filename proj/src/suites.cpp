#include "moilab/suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "moilab/errors.hpp"
#include "moilab/moi.hpp"
#include "moilab/ssf.hpp"
#include "moilab/taylor.hpp"

namespace moilab {

namespace {

using json = nlohmann::ordered_json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Seed mix(Seed s, std::uint64_t j) {
  // splitmix64 step
  std::uint64_t z = s + 0x9E3779B97F4A7C15ull * (j + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

ScalarFunction rand_poly(int deg, Seed s, Domain d) {
  std::mt19937_64 rng(s);
  std::normal_distribution<double> g;
  std::vector<Complex> a(deg + 1);
  for (auto& c : a) c = Complex(g(rng), g(rng)) / double(deg + 1);
  return ScalarFunction::polynomial(a, d);
}

// Random trig polynomial on frequencies lo..hi, zero on skip_lo..skip_hi.
ScalarFunction rand_trig(int lo, int hi, Seed s, int skip_lo = 1, int skip_hi = 0) {
  std::mt19937_64 rng(s);
  std::normal_distribution<double> g;
  std::vector<Complex> c(hi - lo + 1);
  for (int m = lo; m <= hi; ++m) {
    const Complex v(g(rng), g(rng));
    if (m < skip_lo || m > skip_hi) c[m - lo] = v / double(hi - lo + 1);
  }
  return ScalarFunction::trig_polynomial(lo, c);
}

CMatrix rand_herm(Index d, Seed s, double scale = 1.0) {
  return CMatrix(scale * random_operator(RandomKind::hermitian, d, s).matrix(), OpClass::hermitian);
}

double rel(const Mat& a, const Mat& b) { return max_abs(a - b) / std::max(1.0, max_abs(b)); }

Mat richardson(const std::function<Mat(double)>& g, int k, double h) {
  auto cd = [&](double s) -> Mat {
    switch (k) {
      case 1: return (g(s) - g(-s)) / (2 * s);
      case 2: return (g(s) - 2.0 * g(0.0) + g(-s)) / (s * s);
      default: return (g(2 * s) - 2.0 * g(s) + 2.0 * g(-s) - g(-2 * s)) / (2 * s * s * s);
    }
  };
  return (4.0 * cd(h / 2) - cd(h)) / 3.0;
}

double min_real(const RealLineDensity& eta, double sign = 1.0) {
  double m = kInf;
  for (double x : eta.sample_points()) m = std::min(m, sign * eta.eval(x).real());
  return eta.sample_points().empty() ? 0.0 : m;
}

// X >= 0 commuting with H0, built as g(H0) with g >= 0.
Mat commuting_psd(const CMatrix& h0, double shift) {
  const Index d = h0.dim();
  const Mat c = h0.matrix() - shift * Mat::Identity(d, d);
  return c * c + 0.1 * Mat::Identity(d, d);
}

const std::map<std::string, double>& default_ceilings() {
  static const std::map<std::string, double> m{{"moi_estimate.selfadjoint", 50.0},
                                               {"moi_estimate.contraction", 50.0},
                                               {"taylor_estimate", 50.0},
                                               {"ssf_l1_bound", 100.0}};
  return m;
}

struct MonitorSample {
  std::string name;
  std::string anchor;
  double value;
};

class Trial {
 public:
  Trial(const ExperimentConfig& cfg, std::string suite, int index, Index dim)
      : cfg_(cfg), suite_(std::move(suite)), index_(index), seed_(cfg.seed ^ Seed(index)), dim_(dim) {}

  int index() const { return index_; }
  Index dim() const { return dim_; }
  Seed seed(std::uint64_t j) const { return mix(seed_, j); }
  int quad(const std::string& key, int def) const {
    const auto it = cfg_.quadrature.find(key);
    return it == cfg_.quadrature.end() ? def : it->second;
  }

  void check(const std::string& name, const std::string& anchor, double threshold,
             const std::function<double(std::string&)>& fn) {
    CheckRecord r;
    r.name = name;
    r.anchor = anchor;
    const auto it = cfg_.tolerances.find(name);
    r.threshold = it == cfg_.tolerances.end() ? threshold : it->second;
    r.inputs_digest = fnv1a_hex(suite_ + "|" + name + "|" + std::to_string(seed_) + "|" +
                                std::to_string(index_) + "|" + std::to_string(dim_));
    try {
      r.measured = fn(r.note);
    } catch (const Error& e) {
      r.measured = kInf;
      r.note = e.what();
    }
    r.pass = std::isfinite(r.measured) && r.measured <= r.threshold;
    checks.push_back(std::move(r));
  }

  void monitor(const std::string& name, const std::string& anchor, const std::function<double()>& fn) {
    double v = kNaN;
    try {
      v = fn();
    } catch (const Error&) {
    }
    samples.push_back({name, anchor, v});
  }

  void artifact(std::string filename, std::string content) {
    artifacts.push_back({std::move(filename), std::move(content)});
  }

  std::vector<CheckRecord> checks;
  std::vector<MonitorSample> samples;
  std::vector<Artifact> artifacts;

 private:
  const ExperimentConfig& cfg_;
  std::string suite_;
  int index_;
  Seed seed_;
  Index dim_;
};

std::string real_line_csv(const RealLineDensity& eta) {
  double lo = 0.0, hi = 0.0;
  if (!eta.empty()) {
    lo = eta.lo();
    hi = eta.hi();
  }
  const double pad = hi > lo ? 0.05 * (hi - lo) : 0.5;
  const double a = lo - pad, b = hi + pad;
  constexpr int kPoints = 2001;
  const double h = (b - a) / (kPoints - 1);
  std::vector<Complex> col(kPoints);
  for (int i = 0; i < kPoints; ++i) col[i] = eta.eval(a + h * i);
  const std::vector<Atom> atoms = eta.merged_atoms();
  // point masses are smeared into the nearest grid node
  for (const Atom& at : atoms) {
    const int i = std::clamp(static_cast<int>(std::lround((at.x - a) / h)), 0, kPoints - 1);
    col[i] += at.mass / h;
  }
  std::string out = "x,eta_re,eta_im\n";
  for (int i = 0; i < kPoints; ++i)
    out += num(a + h * i) + "," + num(col[i].real()) + "," + num(col[i].imag()) + "\n";
  out += "# atoms\nx,mass_re,mass_im\n";
  for (const Atom& at : atoms) out += num(at.x) + "," + num(at.mass.real()) + "," + num(at.mass.imag()) + "\n";
  return out;
}

std::string circle_csv(const GridDensity& eta, int grid) {
  const GridDensity g = eta.resample(grid);
  std::string out = "# convention=iexp\ntheta,value_re,value_im\n";
  for (std::size_t j = 0; j < g.values().size(); ++j)
    out += num(g.breaks()[j]) + "," + num(g.values()[j].real()) + "," + num(g.values()[j].imag()) + "\n";
  return out;
}

// ---------------------------------------------------------------- suites

void suite_moi(Trial& t) {
  const Index d = t.dim();
  const int i = t.index();

  t.check("perturbation_formula.first", "perturbation-formula", 1e-10, [&](std::string&) {
    const Mat s = random_operator(RandomKind::contraction, d, t.seed(0)).matrix();
    const Mat tt = random_operator(RandomKind::contraction, d, t.seed(1)).matrix();
    const auto f = rand_poly(1 + i % 8, t.seed(2), Domain::disk);
    const Mat lhs = apply_laurent(f.laurent(), s) - apply_laurent(f.laurent(), tt);
    const Mat rhs = moi_contraction_poly(f, 1, std::vector<Mat>{s, tt}, std::vector<Mat>{s - tt});
    return max_abs(lhs - rhs);
  });

  t.check("perturbation_formula.higher", "perturbation-formula-higher-order", 1e-10, [&](std::string&) {
    const Mat s = random_operator(RandomKind::contraction, d, t.seed(3)).matrix();
    const Mat tt = random_operator(RandomKind::contraction, d, t.seed(4)).matrix();
    const auto f = rand_poly(8, t.seed(5), Domain::disk);
    double worst = 0.0;
    for (int n = 2; n <= 3; ++n) {
      std::vector<Mat> others, ks;
      for (int j = 0; j < n - 1; ++j) {
        others.push_back(random_operator(RandomKind::contraction, d, t.seed(10 + j)).matrix());
        ks.push_back(gaussian_matrix(d, d, t.seed(20 + j)));
      }
      // slot p (0-based) of the order n-1 operator list carries S or T
      for (int p = 0; p < n; ++p) {
        std::vector<Mat> with_s = others, with_t = others, both = others;
        with_s.insert(with_s.begin() + p, s);
        with_t.insert(with_t.begin() + p, tt);
        both.insert(both.begin() + p, tt);
        both.insert(both.begin() + p, s);
        std::vector<Mat> kk = ks;
        kk.insert(kk.begin() + p, s - tt);
        const Mat lhs = moi_contraction_poly(f, n - 1, with_s, ks) - moi_contraction_poly(f, n - 1, with_t, ks);
        worst = std::max(worst, rel(lhs, moi_contraction_poly(f, n, both, kk)));
      }
    }
    return worst;
  });

  t.check("dilation.compression", "dilation-compression", 1e-10, [&](std::string&) {
    const CMatrix c = random_operator(RandomKind::contraction, d, t.seed(30));
    const int depth = 12;
    const DilationResult r = dilate(c, depth);
    Mat up = Mat::Identity(r.u.dim(), r.u.dim()), tp = Mat::Identity(d, d);
    double worst = 0.0;
    for (int k = 1; k <= depth; ++k) {
      up = up * r.u.matrix();
      tp = tp * c.matrix();
      worst = std::max(worst, max_abs(tp - r.compress(up)));
    }
    return worst;
  });

  t.check("oracle.moi_vs_naive", "moi-definition", 1e-10, [&](std::string&) {
    const Index dd = std::min<Index>(d, 5);
    const int n = 1 + i % 3;
    std::vector<SpectralDecomposition> ops;
    std::vector<Mat> xs;
    for (int j = 0; j <= n; ++j) ops.push_back(spectral_decompose(rand_herm(dd, t.seed(40 + j))));
    for (int j = 0; j < n; ++j) xs.push_back(gaussian_matrix(dd, dd, t.seed(50 + j)));
    const MoiSymbol sym =
        MoiSymbol::divided_difference(i % 2 ? ScalarFunction::sin() : ScalarFunction::exp(), n);
    return rel(moi_normal(sym, ops, xs), moi_naive(sym, ops, xs));
  });

  t.check("oracle.dd_vs_hermite_genocchi", "hermite-genocchi", 1e-8, [&](std::string&) {
    std::mt19937_64 rng(t.seed(60));
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    double worst = 0.0;
    for (int j = 0; j < 2; ++j) {
      std::vector<double> x(2 + (i + j) % 4);
      for (auto& v : x) v = u(rng);
      const std::vector<Complex> xc(x.begin(), x.end());
      const auto f = j ? ScalarFunction::sin() : ScalarFunction::exp();
      worst = std::max(worst, std::abs(hermite_genocchi_oracle(f, x, 24) - divided_difference(f, xc)));
    }
    return worst;
  });

  t.check("oracle.dilation_moi", "contraction-moi-via-dilation", 1e-9, [&](std::string&) {
    const Index dd = std::min<Index>(d, 3);
    const int n = 1 + i % 2, depth = 8;
    const auto f = rand_poly(6, t.seed(70), Domain::disk);
    std::vector<Mat> ts, xs, big;
    std::vector<SpectralDecomposition> ops;
    std::optional<DilationResult> dil;
    for (int j = 0; j <= n; ++j) {
      const CMatrix c = random_operator(RandomKind::contraction, dd, t.seed(71 + j));
      ts.push_back(c.matrix());
      dil = dilate(c, depth);
      ops.push_back(spectral_decompose(dil->u));
    }
    for (int j = 0; j < n; ++j) {
      xs.push_back(gaussian_matrix(dd, dd, t.seed(80 + j)));
      big.push_back(dil->embed(xs.back()));
    }
    const Mat via = dil->compress(moi_normal(MoiSymbol::divided_difference(f, n), ops, big));
    return rel(via, moi_contraction_poly(f, n, ts, xs));
  });

  t.monitor("moi_estimate.selfadjoint", "moi-schatten-estimate", [&] {
    const int n = 1 + i % 3;
    std::vector<SpectralDecomposition> ops;
    std::vector<Mat> ks;
    double lo = kInf, hi = -kInf;
    for (int j = 0; j <= n; ++j) {
      ops.push_back(spectral_decompose(rand_herm(d, t.seed(90 + j))));
      for (std::size_t c = 0; c < ops.back().size(); ++c) {
        lo = std::min(lo, ops.back().eigenvalue(c).real());
        hi = std::max(hi, ops.back().eigenvalue(c).real());
      }
    }
    double denom = sup_norm_interval(ScalarFunction::sin(), n, lo, hi);
    for (int j = 0; j < n; ++j) {
      ks.push_back(gaussian_matrix(d, d, t.seed(100 + j)));
      denom *= schatten_norm(ks.back(), 2.0 * n);
    }
    const Mat g = moi_normal(MoiSymbol::divided_difference(ScalarFunction::sin(), n), ops, ks);
    return schatten_norm(g, 2.0) / denom;
  });

  t.monitor("moi_estimate.contraction", "moi-contraction-estimate", [&] {
    const int n = 1 + i % 3;
    const auto f = rand_poly(8, t.seed(110), Domain::disk);
    std::vector<Mat> ts, ks;
    double denom = sup_norm_circle(f, n);
    for (int j = 0; j <= n; ++j) ts.push_back(random_operator(RandomKind::contraction, d, t.seed(111 + j)).matrix());
    for (int j = 0; j < n; ++j) {
      ks.push_back(gaussian_matrix(d, d, t.seed(120 + j)));
      denom *= schatten_norm(ks.back(), 2.0 * n);
    }
    return schatten_norm(moi_contraction_poly(f, n, ts, ks), 2.0) / denom;
  });
}

void suite_taylor(Trial& t) {
  const Index d = t.dim();
  // Richardson base steps per order k; the trig path oscillates faster and
  // the exp path grows faster, so the third-order steps differ
  constexpr double kSteps[] = {0.0, 1e-3, 1e-3, 1e-2};
  constexpr double kTrigSteps[] = {0.0, 1e-3, 1e-3, 4e-3};

  t.check("derivative.linear_hermitian", "gateaux-derivative", 1e-6, [&](std::string&) {
    const CMatrix h = rand_herm(d, t.seed(0)), v = rand_herm(d, t.seed(1));
    const PathSpec p = PathSpec::linear(h, v, 1);
    const auto f = ScalarFunction::exp();
    const auto path = [&](double s) { return apply_hermitian(f, h.matrix() + s * v.matrix()); };
    double worst = 0.0;
    for (int k = 1; k <= 3; ++k) worst = std::max(worst, rel(richardson(path, k, kSteps[k]), derivative_linear(f, p, k)));
    return worst;
  });

  t.check("derivative.linear_contraction", "gateaux-derivative", 1e-6, [&](std::string&) {
    const Mat t0 = random_operator(RandomKind::contraction, d, t.seed(2)).matrix();
    const Mat t1 = random_operator(RandomKind::contraction, d, t.seed(3)).matrix();
    const PathSpec p = PathSpec::linear(CMatrix(t0, OpClass::contraction), CMatrix(t1 - t0), 1);
    const auto f = rand_poly(6, t.seed(4), Domain::disk);
    const auto path = [&](double s) { return apply_laurent(f.laurent(), t0 + s * (t1 - t0)); };
    double worst = 0.0;
    for (int k = 1; k <= 3; ++k) worst = std::max(worst, rel(richardson(path, k, kSteps[k]), derivative_linear(f, p, k)));
    return worst;
  });

  t.check("derivative.mult_unitary", "gateaux-derivative", 1e-6, [&](std::string&) {
    const CMatrix u = random_operator(RandomKind::unitary, d, t.seed(5));
    const CMatrix a = rand_herm(d, t.seed(6));
    const PathSpec p = PathSpec::multiplicative(u, a, 1);
    const auto f = rand_trig(-4, 4, t.seed(7));
    const auto path = [&](double s) { return apply_laurent(f.laurent(), exp_skew(a, s).matrix() * u.matrix()); };
    double worst = 0.0;
    for (int k = 1; k <= 3; ++k) worst = std::max(worst, rel(richardson(path, k, kTrigSteps[k]), derivative_mult(f, p, k)));
    return worst;
  });

  t.check("remainder.closed_form", "taylor-remainder-closed-form", 1e-9, [&](std::string&) {
    double worst = 0.0;
    for (int n = 1; n <= 3; ++n) {
      const CMatrix h = rand_herm(d, t.seed(10 + n)), v = rand_herm(d, t.seed(20 + n), 0.5);
      for (const auto& f : {ScalarFunction::exp(), ScalarFunction::sin()})
        worst = std::max(worst, remainder_linear(f, PathSpec::linear(h, v, n)).discrepancy);
      const Mat t0 = random_operator(RandomKind::contraction, d, t.seed(30 + n)).matrix();
      const Mat t1 = random_operator(RandomKind::contraction, d, t.seed(40 + n)).matrix();
      const PathSpec c = PathSpec::linear(CMatrix(t0, OpClass::contraction), CMatrix(t1 - t0), n);
      worst = std::max(worst, remainder_linear(rand_poly(7, t.seed(50 + n), Domain::disk), c).discrepancy);
    }
    return worst;
  });

  t.check("remainder.square", "taylor-remainder-square", 1e-12, [&](std::string&) {
    const CMatrix h = rand_herm(d, t.seed(60)), v = rand_herm(d, t.seed(61));
    const Remainder r = remainder_linear(ScalarFunction::monomial(2, Domain::real_line), PathSpec::linear(h, v, 2));
    return rel(r.value, v.matrix() * v.matrix());
  });

  t.monitor("taylor_estimate", "taylor-remainder-estimate", [&] {
    double worst = 0.0;
    const Mat t0 = random_operator(RandomKind::contraction, d, t.seed(70)).matrix();
    const Mat t1 = random_operator(RandomKind::contraction, d, t.seed(71)).matrix();
    const auto f = rand_poly(6, t.seed(72), Domain::disk);
    for (int n = 1; n <= 2; ++n) {
      const PathSpec path = PathSpec::linear(CMatrix(t0, OpClass::contraction), CMatrix(t1 - t0), n);
      const Mat r = remainder_linear(f, path).value;
      for (double p : {3.0, 4.0})
        worst = std::max(worst, schatten_norm(r, p / n) /
                                    (sup_norm_circle(f, n) * std::pow(schatten_norm(t1 - t0, p), n)));
    }
    return worst;
  });
}

void suite_koplienko(Trial& t) {
  const Index d = t.dim();
  const CMatrix h0 = rand_herm(d, t.seed(0)), v = rand_herm(d, t.seed(1), 0.5);
  const int tq = t.quad("t_quad", 64);
  std::optional<RealLineDensity> eta;
  t.check("koplienko.trace_formula", "koplienko-trace-formula", 1e-6, [&](std::string&) {
    eta = koplienko_ssf(h0, v, tq);
    double worst = 0.0;
    for (const auto& f : {ScalarFunction::exp(), ScalarFunction::sin(), rand_poly(6, t.seed(2), Domain::real_line)}) {
      const Complex tr = weighted_remainder_trace(f, h0, v, Mat::Identity(d, d), 2);
      worst = std::max(worst, std::abs(tr - eta->pair(f, 2)) / (1.0 + std::abs(tr)));
    }
    return worst;
  });
  t.check("koplienko.nonnegative", "koplienko-positivity", 1e-10, [&](std::string&) {
    if (!eta) eta = koplienko_ssf(h0, v, tq);
    return std::max(0.0, -min_real(*eta));
  });
  if (t.index() == 0 && eta) t.artifact("koplienko_trial0.csv", real_line_csv(*eta));
}

void suite_fdh(Trial& t) {
  const Index d = t.dim();
  const int sq = t.quad("s_quad", 32), depth = t.quad("dilation_depth", 16), grid = t.quad("grid", 4096);

  if (t.index() == 0) {
    // the dz convention is calibrated on the scalar z^2 oracle first
    t.check("fdh.scalar_calibration", "contraction-trace-formula", 1e-6, [&](std::string&) {
      const double c = 0.6;
      const GridDensity eta = contraction_ssf_fdh(CMatrix(Mat::Zero(1, 1), OpClass::contraction),
                                                  CMatrix(Mat::Constant(1, 1, c), OpClass::contraction), sq,
                                                  depth, grid);
      return std::abs(eta.pair(ScalarFunction::monomial(2, Domain::disk), 2) - c * c);
    });
    t.check("fdh.convention", "contraction-trace-formula", 0.5, [&](std::string& note) {
      const CMatrix t0 = random_operator(RandomKind::contraction, 2, t.seed(90), 0.3);
      const Mat v = 0.1 * random_operator(RandomKind::contraction, 2, t.seed(91)).matrix();
      const GridDensity eta = contraction_ssf_fdh(t0, CMatrix(t0.matrix() + v, OpClass::contraction), sq, depth, grid);
      const auto f = ScalarFunction::monomial(3, Domain::disk);
      const Complex tr = weighted_remainder_trace(f, t0, CMatrix(v), Mat::Identity(2, 2), 2);
      const char* names[] = {"dtheta", "exp_dtheta", "iexp_dtheta"};
      int wrong = 0, k = 0;
      for (auto w : {CircleWeight::dtheta, CircleWeight::exp_dtheta, CircleWeight::iexp_dtheta}) {
        const double res = std::abs(eta.pair(f, 2, w) - tr);
        note += std::string(names[k]) + "=" + num(res) + " ";
        if ((res <= 1e-4) != (w == CircleWeight::iexp_dtheta)) ++wrong;
        ++k;
      }
      return double(wrong);
    });
  }

  const CMatrix t0 = random_operator(RandomKind::contraction, d, t.seed(0), 0.3);
  const Mat v = 0.1 * random_operator(RandomKind::contraction, d, t.seed(1)).matrix();
  const CMatrix t1(t0.matrix() + v, OpClass::contraction);
  std::optional<GridDensity> eta;
  t.check(d == 1 ? "fdh.trace_formula_scalar" : "fdh.trace_formula", "contraction-trace-formula",
          d == 1 ? 1e-6 : 1e-4, [&](std::string&) {
            eta = contraction_ssf_fdh(t0, t1, sq, depth, grid);
            double worst = 0.0;
            for (const auto& f : {ScalarFunction::monomial(2, Domain::disk), ScalarFunction::monomial(3, Domain::disk),
                                  rand_poly(6, t.seed(2), Domain::disk)}) {
              const Complex tr = weighted_remainder_trace(f, t0, CMatrix(v), Mat::Identity(d, d), 2);
              worst = std::max(worst, std::abs(eta->pair(f, 2) - tr));
            }
            return worst;
          });
  if (t.index() == 0 && eta) t.artifact("fdh_trial0.csv", circle_csv(*eta, grid));
}

void suite_unitary2(Trial& t) {
  const Index d = t.dim();
  const int deg = t.quad("fourier_degree", 10);
  const CMatrix u = random_operator(RandomKind::unitary, d, t.seed(0));
  const CMatrix a = rand_herm(d, t.seed(1), 0.7);
  std::optional<UnitarySecondOrder> r;
  t.check("unitary2.constant", "unitary-second-order-constant", 1e-10, [&](std::string&) {
    r = unitary_second_order(u, a, deg);
    return std::abs(r->c - unitary_constant_quadrature(u, a, 64));
  });
  t.check("unitary2.first_moment", "unitary-second-order-constant", 1e-10, [&](std::string&) {
    if (!r) r = unitary_second_order(u, a, deg);
    const Complex tr =
        remainder_mult(ScalarFunction::monomial(1, Domain::circle), PathSpec::multiplicative(u, a, 2)).trace();
    return std::abs(tr - r->c);
  });
  t.check("unitary2.held_out", "unitary-second-order", 1e-7, [&](std::string& note) {
    if (!r) r = unitary_second_order(u, a, deg);
    if (r->xi2.rank_deficient) note = "RankDeficientMoments rank=" + std::to_string(r->xi2.rank);
    const auto f = rand_trig(-deg, deg, t.seed(2));
    const Complex tr = remainder_mult(f, PathSpec::multiplicative(u, a, 2)).trace();
    return std::abs(tr - r->xi1.pair(f, 1) - r->xi2.density.pair(f, 2));
  });
  t.check("mult_contraction.dilation", "multiplicative-contraction-dilation", 1e-8, [&](std::string&) {
    const CMatrix t0 = random_operator(RandomKind::contraction, std::min<Index>(d, 3), t.seed(3));
    const CMatrix b = rand_herm(t0.dim(), t.seed(4), 0.6);
    return mult_contraction_trace(t0, b, rand_trig(-5, 5, t.seed(5)), 6).discrepancy;
  });
}

void suite_modified_sa(Trial& t) {
  const Index d = t.dim();
  const int n = 1 + t.index() % 3;
  const CMatrix h0 = rand_herm(d, t.seed(0)), v = rand_herm(d, t.seed(1), 0.5);
  const Mat x = gaussian_matrix(d, d, t.seed(2));
  std::optional<RealLineDensity> eta;
  t.check("modified_sa.trace_formula", "modified-trace-formula-selfadjoint", 1e-8, [&](std::string& note) {
    note = "n=" + std::to_string(n);
    eta = modified_ssf_selfadjoint(h0, v, x, n);
    double worst = 0.0;
    for (const auto& f : {ScalarFunction::exp(), ScalarFunction::sin(), rand_poly(n + 4, t.seed(3), Domain::real_line)}) {
      const Complex tr = weighted_remainder_trace(f, h0, v, x, n);
      worst = std::max(worst, std::abs(tr - eta->pair(f, n)) / (1.0 + std::abs(tr)));
    }
    return worst;
  });
  t.monitor("ssf_l1_bound", "modified-ssf-l1-bound", [&] {
    if (!eta) eta = modified_ssf_selfadjoint(h0, v, x, n);
    const double p = n + 1.0, q = n + 1.0;
    return eta->l1_norm() / (std::pow(schatten_norm(v, p), n) * schatten_norm(x, q));
  });
}

void suite_modified_u(Trial& t) {
  const Index d = t.dim();
  const int n = 2 + t.index() % 2;
  const int deg = t.quad("fourier_degree_gn", 8);
  t.check("modified_u.held_out", "modified-trace-formula-unitary", 1e-7, [&](std::string& note) {
    const CMatrix u = random_operator(RandomKind::unitary, d, t.seed(0));
    const CMatrix a = rand_herm(d, t.seed(1), 0.6);
    const Mat x = gaussian_matrix(d, d, t.seed(2));
    const MomentFit fit = modified_ssf_unitary_gn(u, a, x, n, deg);
    note = "n=" + std::to_string(n) + (fit.rank_deficient ? " RankDeficientMoments" : "");
    const auto f = rand_trig(-deg, deg, t.seed(3), 1, n - 1);
    return std::abs(weighted_mult_remainder_trace(f, u, a, x, n) - fit.density.pair(f, n));
  });
}

void suite_modified_c(Trial& t) {
  const Index d = t.dim();
  const int n = 1 + t.index() % 3;
  const int deg = t.quad("fourier_degree", 10);
  t.check("modified_c.held_out", "modified-trace-formula-contraction", 1e-7, [&](std::string& note) {
    const CMatrix t0 = random_operator(RandomKind::contraction, d, t.seed(0));
    const CMatrix t1 = random_operator(RandomKind::contraction, d, t.seed(1));
    const Mat x = gaussian_matrix(d, d, t.seed(2));
    const MomentFit fit = modified_ssf_contraction(t0, t1, x, n, deg);
    note = "n=" + std::to_string(n) + (fit.rank_deficient ? " RankDeficientMoments" : "");
    const auto f = rand_poly(deg, t.seed(3), Domain::disk);
    const Complex tr = weighted_remainder_trace(f, t0, CMatrix(t1.matrix() - t0.matrix()), x, n);
    return std::abs(tr - fit.density.pair(f, n));
  });
}

void suite_positivity(Trial& t) {
  const Index d = t.dim();
  const CMatrix h0 = rand_herm(d, t.seed(0));
  const Mat x = commuting_psd(h0, 0.3);
  t.check("positivity.commuting_n2", "positivity-second-order", 1e-10, [&](std::string&) {
    const CMatrix v = rand_herm(d, t.seed(1), 0.7);
    return std::max(0.0, -min_real(modified_ssf_selfadjoint(h0, v, x, 2)));
  });
  Vec w = gaussian_matrix(d, 1, t.seed(2)).col(0);
  w.normalize();
  const double sigma = t.index() % 2 == 0 ? 1.0 : -1.0;
  const CMatrix v(sigma * 0.8 * w * w.adjoint(), OpClass::hermitian);
  for (int n = 3; n <= 4; ++n)
    t.check("positivity.rank_one_n" + std::to_string(n), "positivity-rank-one", 1e-10, [&](std::string& note) {
      note = "sign=" + std::string(std::pow(sigma, n) > 0 ? "+" : "-");
      return std::max(0.0, -min_real(modified_ssf_selfadjoint(h0, v, x, n), std::pow(sigma, n)));
    });
}

void suite_sensitivity(Trial& t) {
  const Index d = t.dim();
  const int n = 2;
  const CMatrix h0 = rand_herm(d, t.seed(0)), v = rand_herm(d, t.seed(1), 0.5);
  const Mat x = gaussian_matrix(d, d, t.seed(2)), y = gaussian_matrix(d, d, t.seed(3));
  Mat e = rand_herm(d, t.seed(4)).matrix();
  e /= schatten_norm(e, n + 1.0);
  t.check("sensitivity.v_continuity", "ssf-continuity", 0.5, [&](std::string& note) {
    double prev = 0.0, worst = 0.0;
    for (double delta : {1e-1, 1e-2, 1e-3}) {
      const CMatrix w(v.matrix() + delta * e, OpClass::hermitian);
      const double dist = ssf_sensitivity(h0, v, w, x, x, n).dist_v_w;
      note += num(dist) + " ";
      if (prev > 0.0) worst = std::max(worst, dist / prev);
      prev = dist;
    }
    return worst;
  });
  t.check("sensitivity.x_linearity", "ssf-differentiability", 1e-9, [&](std::string&) {
    const SensitivityReport r = ssf_sensitivity(h0, v, v, x, y, n);
    return *std::max_element(r.quotient.begin(), r.quotient.end());
  });
}

struct SuiteDef {
  std::string name;
  std::vector<int> dims;
  int trials;
  int cap;
  std::function<void(Trial&)> fn;
};

const std::vector<SuiteDef>& registry() {
  static const std::vector<SuiteDef> r{
      {"moi", {2, 3, 4, 5, 6, 7, 8}, 50, 8, suite_moi},
      {"taylor", {2, 3, 4, 5, 6}, 20, 8, suite_taylor},
      {"koplienko", {2, 3, 4, 5, 6}, 20, 8, suite_koplienko},
      {"fdh", {1, 2, 3}, 6, 4, suite_fdh},
      {"unitary2", {2, 3, 4}, 10, 6, suite_unitary2},
      {"modified_sa", {2, 3, 4, 5, 6}, 12, 8, suite_modified_sa},
      {"modified_u", {2, 3}, 8, 4, suite_modified_u},
      {"modified_c", {2, 3}, 8, 4, suite_modified_c},
      {"positivity", {2, 3, 4, 5}, 20, 8, suite_positivity},
      {"sensitivity", {2, 3, 4}, 5, 6, suite_sensitivity},
  };
  return r;
}

const SuiteDef* find_suite(const std::string& name) {
  for (const auto& s : registry())
    if (s.name == name) return &s;
  return nullptr;
}

void run_one(const SuiteDef& def, const ExperimentConfig& cfg, Report& rep) {
  const std::vector<int>& dims = cfg.dims.empty() ? def.dims : cfg.dims;
  const int trials = cfg.trials > 0 ? cfg.trials : def.trials;
  std::vector<Trial> results;
  results.reserve(trials);
  for (int i = 0; i < trials; ++i) results.emplace_back(cfg, def.name, i, dims[i % dims.size()]);
  // trials are independent; merge happens below in trial order
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < trials; ++i) def.fn(results[i]);

  std::map<std::string, MonitorRecord> mons;
  std::vector<std::string> order;
  for (Trial& t : results) {
    for (auto& c : t.checks) rep.checks.push_back(std::move(c));
    for (auto& a : t.artifacts) rep.artifacts.push_back(std::move(a));
    for (const MonitorSample& s : t.samples) {
      auto [it, fresh] = mons.try_emplace(s.name);
      MonitorRecord& m = it->second;
      if (fresh) {
        order.push_back(s.name);
        m.name = s.name;
        m.anchor = s.anchor;
        const auto tol = cfg.tolerances.find(s.name);
        m.ceiling = tol != cfg.tolerances.end() ? tol->second : default_ceilings().at(s.name);
      }
      ++m.samples;
      if (!std::isfinite(s.value))
        m.all_finite = false;
      else
        m.max = std::max(m.max, s.value);
    }
  }
  for (const std::string& name : order) {
    MonitorRecord m = mons.at(name);
    m.pass = m.all_finite && m.max <= m.ceiling;
    rep.monitors.push_back(m);
  }
}

json report_body(const Report& r) {
  json j;
  j["schema"] = 1;
  j["suite"] = r.suite;
  j["seed"] = r.seed;
  json checks = json::array();
  for (const CheckRecord& c : r.checks) {
    json e;
    e["name"] = c.name;
    e["anchor"] = c.anchor;
    e["inputs_digest"] = c.inputs_digest;
    e["measured"] = std::isfinite(c.measured) ? json(c.measured) : json("inf");
    e["threshold"] = c.threshold;
    e["pass"] = c.pass;
    if (!c.note.empty()) e["note"] = c.note;
    checks.push_back(e);
  }
  j["checks"] = checks;
  json mons = json::array();
  for (const MonitorRecord& m : r.monitors) {
    json e;
    e["name"] = m.name;
    e["anchor"] = m.anchor;
    e["max"] = m.max;
    e["ceiling"] = m.ceiling;
    e["samples"] = m.samples;
    e["all_finite"] = m.all_finite;
    e["pass"] = m.pass;
    mons.push_back(e);
  }
  j["monitors"] = mons;
  j["summary"] = {{"checks", r.checks.size()},
                  {"passed", r.passed()},
                  {"failed", r.failed()},
                  {"monitors", r.monitors.size()}};
  return j;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& s : registry()) v.push_back(s.name);
    v.push_back("all");
    return v;
  }();
  return names;
}

int suite_dim_cap(const std::string& suite) {
  if (suite == "all") {
    int cap = 1 << 20;
    for (const auto& s : registry()) cap = std::min(cap, s.cap);
    return cap;
  }
  const SuiteDef* s = find_suite(suite);
  if (!s) fail(ErrorCode::ConfigParse, "unknown suite '" + suite + "'");
  return s->cap;
}

void validate_config(const ExperimentConfig& c) {
  const int cap = suite_dim_cap(c.suite);
  for (int d : c.dims)
    if (d < 1 || d > cap)
      fail(ErrorCode::ConfigParse, "dim " + std::to_string(d) + " outside [1, " + std::to_string(cap) + "]");
  if (c.trials < 0) fail(ErrorCode::ConfigParse, "trials must be >= 1");
  for (const auto& [k, v] : c.quadrature)
    if (v < 1) fail(ErrorCode::ConfigParse, "quadrature '" + k + "' must be positive");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigParse, e.what());
  }
  if (!j.is_object()) fail(ErrorCode::ConfigParse, "config must be a JSON object");
  static const std::set<std::string> known{"suite", "dims", "trials", "seed", "tolerances", "quadrature", "output_dir"};
  try {
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!known.count(it.key())) fail(ErrorCode::ConfigParse, "unknown key '" + it.key() + "'");
    if (j.contains("suite")) c.suite = j["suite"].get<std::string>();
    if (j.contains("dims")) c.dims = j["dims"].get<std::vector<int>>();
    if (j.contains("trials")) {
      c.trials = j["trials"].get<int>();
      if (c.trials < 1) fail(ErrorCode::ConfigParse, "trials must be >= 1");
    }
    if (j.contains("seed")) c.seed = j["seed"].get<Seed>();
    if (j.contains("tolerances")) c.tolerances = j["tolerances"].get<std::map<std::string, double>>();
    if (j.contains("quadrature")) c.quadrature = j["quadrature"].get<std::map<std::string, int>>();
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigParse, e.what());
  }
  validate_config(c);
  return c;
}

int Report::passed() const {
  int n = 0;
  for (const auto& c : checks) n += c.pass;
  for (const auto& m : monitors) n += m.pass;
  return n;
}

int Report::failed() const {
  return static_cast<int>(checks.size() + monitors.size()) - passed();
}

std::string Report::digest() const { return fnv1a_hex(report_body(*this).dump()); }

std::string Report::to_json() const {
  json j = report_body(*this);
  j["digest"] = digest();
  j["wall_time_s"] = wall_time;
  return j.dump(2) + "\n";
}

Report run_suite(const ExperimentConfig& config) {
  validate_config(config);
  const auto start = std::chrono::steady_clock::now();
  Report rep;
  rep.suite = config.suite;
  rep.seed = config.seed;
  if (config.suite == "all") {
    for (const auto& def : registry()) run_one(def, config, rep);
  } else {
    run_one(*find_suite(config.suite), config, rep);
  }
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

ExportKind parse_export_kind(const std::string& s) {
  if (s == "koplienko") return ExportKind::koplienko;
  if (s == "unit") return ExportKind::unit;
  if (s == "modified_sa") return ExportKind::modified_sa;
  if (s == "fdh") return ExportKind::fdh;
  fail(ErrorCode::InvalidArgument, "unknown export kind '" + s + "'");
}

std::string export_density_csv(const ExportRequest& r) {
  if (r.dim < 1) fail(ErrorCode::InvalidArgument, "dim must be >= 1");
  const Index d = r.dim;
  switch (r.kind) {
    case ExportKind::koplienko:
      return real_line_csv(koplienko_ssf(rand_herm(d, mix(r.seed, 0)), rand_herm(d, mix(r.seed, 1), r.scale)));
    case ExportKind::unit:
      return real_line_csv(koplienko_ssf(CMatrix(Mat::Zero(d, d), OpClass::hermitian),
                                         CMatrix(Mat::Identity(d, d), OpClass::hermitian)));
    case ExportKind::modified_sa:
      return real_line_csv(modified_ssf_selfadjoint(rand_herm(d, mix(r.seed, 0)), rand_herm(d, mix(r.seed, 1), r.scale),
                                                    Mat::Identity(d, d), r.order));
    case ExportKind::fdh: {
      const CMatrix t0 = random_operator(RandomKind::contraction, d, mix(r.seed, 0), 0.3);
      const Mat v = 0.2 * r.scale * random_operator(RandomKind::contraction, d, mix(r.seed, 1)).matrix();
      return circle_csv(contraction_ssf_fdh(t0, CMatrix(t0.matrix() + v, OpClass::contraction), 32, 16, r.grid),
                        r.grid);
    }
  }
  return {};
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  out << content;
  if (!out) fail(ErrorCode::IoError, "write to '" + path + "' failed");
}

std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace moilab
