#pragma once

// Geometry of the manifold of symmetric positive definite matrices under the
// affine-invariant metric <V1, V2>_X = Tr(V1 X^-1 V2 X^-1).
//
// Every matrix function is evaluated through a symmetric eigendecomposition,
// and every distance or map is evaluated on the congruence
// X^-1/2 Y X^-1/2 so that each decomposition sees a symmetric input.

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "plrsq/error.hpp"

namespace plrsq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace tol {
/// Relative Frobenius tolerance for reconstructions and round trips.
inline constexpr double recon = 1e-8;
/// Eigenvalues at or below this raise DomainError in matrix functions.
inline constexpr double eig_floor = 1e-12;
/// Largest eigenvalue accepted by mat_exp before reporting overflow.
inline constexpr double exp_cap = 700.0;
/// Symmetry tolerance, 1e-9 * (1 + max |entry|).
double sym(const Matrix& m);
}  // namespace tol

bool is_symmetric(const Matrix& m);
/// (A + A^T) / 2.
Matrix symmetrize(const Matrix& m);

/// Symmetric n x n matrix; an element of the tangent space at any point.
class TangentVector {
 public:
  /// Throws ValidationError unless `m` is square and symmetric within tol::sym.
  explicit TangentVector(Matrix m);
  /// Skips validation; the caller guarantees symmetry. Symmetrizes.
  static TangentVector unchecked(Matrix m);
  static TangentVector zero(Eigen::Index n);

  const Matrix& matrix() const noexcept { return m_; }
  Eigen::Index dim() const noexcept { return m_.rows(); }

  TangentVector operator*(double s) const { return unchecked(m_ * s); }
  TangentVector operator+(const TangentVector& o) const;
  TangentVector operator-(const TangentVector& o) const;

 private:
  TangentVector() = default;
  Matrix m_;
};

inline TangentVector operator*(double s, const TangentVector& v) { return v * s; }

/// A point of the manifold: symmetric with strictly positive eigenvalues.
class SpdMatrix {
 public:
  /// Throws ValidationError if `m` is not square, not symmetric within
  /// tol::sym, or not positive definite.
  explicit SpdMatrix(Matrix m);
  /// Skips validation; the caller guarantees the invariants. Symmetrizes.
  static SpdMatrix unchecked(Matrix m);
  static SpdMatrix identity(Eigen::Index n);

  const Matrix& matrix() const noexcept { return m_; }
  Eigen::Index dim() const noexcept { return m_.rows(); }

  bool operator==(const SpdMatrix& o) const { return m_ == o.m_; }

 private:
  SpdMatrix() = default;
  Matrix m_;
};

/// Eigenvalues ascending, eigenvectors as orthonormal columns.
struct EigenDecomposition {
  Vector values;
  Matrix vectors;
};

/// Throws ValidationError on asymmetric input, NumericalError if the
/// QR iteration does not converge.
EigenDecomposition sym_eig(const Matrix& s);
/// Eigenvalues only (ascending); same error contract as sym_eig.
Vector sym_eigenvalues(const Matrix& s);

/// U f(diag) U^T, symmetrized.
template <typename F>
Matrix spectral_apply(const EigenDecomposition& eig, F&& f) {
  Vector mapped = eig.values.unaryExpr(f);
  return symmetrize(eig.vectors * mapped.asDiagonal() * eig.vectors.transpose());
}

SpdMatrix mat_exp(const TangentVector& v, double max_eigenvalue = tol::exp_cap);
TangentVector mat_log(const SpdMatrix& x);
SpdMatrix mat_sqrt(const SpdMatrix& x);
SpdMatrix mat_invsqrt(const SpdMatrix& x);

/// Base point with its square root and inverse square root cached, so that
/// repeated maps at the same point cost one decomposition.
class Chart {
 public:
  explicit Chart(const SpdMatrix& base);

  const SpdMatrix& base() const noexcept { return base_; }
  const Matrix& sqrt() const noexcept { return sqrt_; }
  const Matrix& invsqrt() const noexcept { return invsqrt_; }
  Eigen::Index dim() const noexcept { return base_.dim(); }

  /// X^-1/2 A X^-1/2
  Matrix whiten(const Matrix& a) const;
  /// X^1/2 A X^1/2
  Matrix unwhiten(const Matrix& a) const;

 private:
  SpdMatrix base_;
  Matrix sqrt_;
  Matrix invsqrt_;
};

double inner(const SpdMatrix& base, const TangentVector& v1, const TangentVector& v2);
/// Riemannian norm sqrt(<V, V>_X).
double norm(const SpdMatrix& base, const TangentVector& v);

SpdMatrix geodesic(const SpdMatrix& base, const TangentVector& v, double t);

double geo_distance(const SpdMatrix& x1, const SpdMatrix& x2);
double geo_distance(const Chart& x1, const SpdMatrix& x2);
/// Squared distance; avoids the final square root.
double geo_distance_sq(const Chart& x1, const SpdMatrix& x2);

SpdMatrix exp_map(const SpdMatrix& base, const TangentVector& v);
SpdMatrix exp_map(const Chart& base, const TangentVector& v);
TangentVector log_map(const SpdMatrix& base, const SpdMatrix& x);
TangentVector log_map(const Chart& base, const SpdMatrix& x);

/// Riemannian gradient of W -> dist^2(W, X), which is -2 Log_W(X).
TangentVector dist_sq_gradient(const SpdMatrix& w, const SpdMatrix& x);

struct KarcherOptions {
  double tol = 1e-9;
  int max_iter = 200;
};

/// Thrown when the mean iteration exhausts max_iter.
class KarcherError : public NumericalError {
 public:
  KarcherError(SpdMatrix last, double residual, int iterations);

  const SpdMatrix& last_iterate() const noexcept { return last_; }
  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  SpdMatrix last_;
  double residual_;
  int iterations_;
};

/// Riemannian (Karcher) mean by fixed-point tangent averaging started from
/// the arithmetic mean. Stops when the Frobenius norm of the mean tangent
/// vector drops below options.tol.
SpdMatrix karcher_mean(std::span<const SpdMatrix> points, const KarcherOptions& options = {});

}  // namespace plrsq
