#pragma once

#include <array>
#include <vector>

#include "moilab/density.hpp"
#include "moilab/exec.hpp"
#include "moilab/funcs.hpp"
#include "moilab/linalg.hpp"
#include "moilab/moi.hpp"

namespace moilab {

RealLineDensity koplienko_ssf(const CMatrix& h0, const CMatrix& v, int t_quad = 64,
                              Exec exec = Exec::parallel);

// Which slot of the eigen-tuple carries the perturbed operator H0 + V.
enum class TupleOrder { perturbed_first, perturbed_second };

struct ModifiedSaOptions {
  std::size_t tuple_budget = 1000000;
  TupleOrder order = TupleOrder::perturbed_first;
  Index dim_cap = 0;  // 0 selects 8 for n <= 3 and 5 for n = 4
  Exec exec = Exec::parallel;
};

RealLineDensity modified_ssf_selfadjoint(const CMatrix& h0, const CMatrix& v, const Mat& x, int n,
                                         const ModifiedSaOptions& opt = {});

GridDensity contraction_ssf_fdh(const CMatrix& t0, const CMatrix& t1, int s_quad = 32,
                                int depth = 16, int grid = 4096, Exec exec = Exec::parallel);

struct MomentFit {
  FourierDensity density;
  double residual = 0.0;
  int rank = 0;
  int unknowns = 0;
  bool rank_deficient = false;
};

// Least-squares fit of Fourier coefficients b_k from moment equations
// target_m = 2 pi i * falling(m, n) * b_{n-1-m}.
MomentFit fit_moments(const std::vector<int>& ms, const std::vector<Complex>& targets, int n);

struct UnitarySecondOrder {
  Complex c;
  FourierDensity xi1;  // c / (2 pi i) on the z-bar frequency
  MomentFit xi2;
};

UnitarySecondOrder unitary_second_order(const CMatrix& u0, const CMatrix& a, int degree);
// -int_0^1 (1 - t) Tr(A^2 e^{itA} U0) dt by Gauss-Legendre.
Complex unitary_constant_quadrature(const CMatrix& u0, const CMatrix& a, int points = 64);

MomentFit modified_ssf_unitary_gn(const CMatrix& u0, const CMatrix& a, const Mat& x, int n,
                                  int degree);
MomentFit modified_ssf_contraction(const CMatrix& t0, const CMatrix& t1, const Mat& x, int n,
                                   int degree);

struct MultTrace {
  Complex direct;
  Complex dilated;
  double discrepancy = 0.0;
};

MultTrace mult_contraction_trace(const CMatrix& t0, const CMatrix& a, const ScalarFunction& f,
                                 int depth);

struct SensitivityReport {
  double dist_v_w = 0.0;
  double dist_x_y = 0.0;
  std::array<double, 3> h{1e-1, 1e-2, 1e-3};
  std::array<double, 3> quotient{};
};

SensitivityReport ssf_sensitivity(const CMatrix& h0, const CMatrix& v, const CMatrix& w,
                                  const Mat& x, const Mat& y, int n);

// Tr(R_n^Lin(f, base, dir) X) through the closed form.
Complex weighted_remainder_trace(const ScalarFunction& f, const CMatrix& base, const CMatrix& dir,
                                 const Mat& x, int n);
// Tr(R_n^Mult(f, base, A) X).
Complex weighted_mult_remainder_trace(const ScalarFunction& f, const CMatrix& base,
                                      const CMatrix& a, const Mat& x, int n);

}  // namespace moilab
