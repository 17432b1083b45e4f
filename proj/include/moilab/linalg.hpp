#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace moilab {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using Index = Eigen::Index;
using Seed = std::uint64_t;

inline constexpr double kTolClass = 1e-10;
inline constexpr double kTolSpec = 1e-10;
inline constexpr double kClusterTol = 1e-8;

enum class OpClass { hermitian, unitary, normal, contraction, general };

const char* to_string(OpClass c);

// Dense square complex matrix with an advisory class tag.
class CMatrix {
 public:
  CMatrix() = default;
  explicit CMatrix(Mat entries, OpClass tag = OpClass::general);

  // Constructs and runs the class check, throwing on failure.
  static CMatrix checked(Mat entries, OpClass tag, double tol = kTolClass);

  const Mat& matrix() const { return m_; }
  OpClass tag() const { return tag_; }
  Index dim() const { return m_.rows(); }

  // Residual of the defining property of the tag (0 for general).
  double class_residual() const;
  bool check(double tol = kTolClass) const { return class_residual() <= tol; }
  void require(double tol = kTolClass) const;

 private:
  Mat m_;
  OpClass tag_ = OpClass::general;
};

double max_abs(const Mat& a);
double hermitian_residual(const Mat& a);
double unitary_residual(const Mat& a);
double normal_residual(const Mat& a);
double top_singular_value(const Mat& a);

struct HermitianEigen {
  Eigen::VectorXd values;  // ascending
  Mat vectors;             // columns orthonormal
};

// Cyclic complex Jacobi. Input is symmetrized first.
HermitianEigen jacobi_eigen(const Mat& a, double tol = 1e-13, int max_sweeps = 100);

class SpectralDecomposition {
 public:
  SpectralDecomposition() = default;
  SpectralDecomposition(std::vector<Complex> eigenvalues, Mat basis, std::vector<Index> offsets);

  Index dim() const { return basis_.rows(); }
  std::size_t size() const { return eigenvalues_.size(); }
  const std::vector<Complex>& eigenvalues() const { return eigenvalues_; }
  Complex eigenvalue(std::size_t i) const { return eigenvalues_[i]; }
  Index multiplicity(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }
  Index offset(std::size_t i) const { return offsets_[i]; }
  const std::vector<Index>& offsets() const { return offsets_; }
  // Orthonormal eigenvectors, columns grouped by cluster.
  const Mat& basis() const { return basis_; }

  Mat projection(std::size_t i) const;
  std::vector<Mat> projections() const;
  Mat reconstruct() const;
  Mat apply(const std::function<Complex(Complex)>& f) const;

 private:
  std::vector<Complex> eigenvalues_;
  Mat basis_;
  std::vector<Index> offsets_;
};

SpectralDecomposition spectral_decompose(const CMatrix& a, double cluster_tol = kClusterTol,
                                         double tol_class = kTolClass);

// Groups values by single-linkage at tol. Returns a cluster id per value,
// numbered by ascending (real, imag) of the cluster mean.
std::vector<int> cluster_values(const std::vector<Complex>& values, double tol, int* count);

inline constexpr double kInf = std::numeric_limits<double>::infinity();

double schatten_norm(const Mat& a, double p);
inline double schatten_norm(const CMatrix& a, double p) { return schatten_norm(a.matrix(), p); }

enum class RandomKind { hermitian, unitary, contraction, psd };

CMatrix random_operator(RandomKind kind, Index dim, Seed seed, double margin = 0.05);
// Complex Gaussian matrix with E|z|^2 = 1 per entry.
Mat gaussian_matrix(Index rows, Index cols, Seed seed);

CMatrix exp_skew(const CMatrix& a, double s);

// Square root of a Hermitian positive semidefinite matrix; negative
// eigenvalues from round-off are clamped at zero.
Mat psd_sqrt(const Mat& a);

Mat matrix_power(const Mat& a, int k);

}  // namespace moilab
