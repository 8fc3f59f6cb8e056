#include "plrsq/spd.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace plrsq {

namespace {

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    std::ostringstream os;
    os << what << ": expected a nonempty square matrix, got " << m.rows() << "x" << m.cols();
    throw ValidationError(os.str());
  }
}

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << what << ": dimension mismatch (" << a << " vs " << b << ")";
    throw ValidationError(os.str());
  }
}

void require_floor(const Vector& values, const char* what) {
  if (values.minCoeff() <= tol::eig_floor) {
    std::ostringstream os;
    os << what << ": eigenvalue " << values.minCoeff() << " is not above the floor "
       << tol::eig_floor;
    throw DomainError(os.str());
  }
}

}  // namespace

double tol::sym(const Matrix& m) {
  return 1e-9 * (1.0 + (m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff()));
}

bool is_symmetric(const Matrix& m) {
  if (m.rows() != m.cols()) return false;
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol::sym(m);
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

// ---------------------------------------------------------------------------

TangentVector::TangentVector(Matrix m) {
  require_square(m, "TangentVector");
  if (!is_symmetric(m)) throw ValidationError("TangentVector: matrix is not symmetric");
  m_ = symmetrize(m);
}

TangentVector TangentVector::unchecked(Matrix m) {
  TangentVector v;
  v.m_ = symmetrize(m);
  return v;
}

TangentVector TangentVector::zero(Eigen::Index n) { return unchecked(Matrix::Zero(n, n)); }

TangentVector TangentVector::operator+(const TangentVector& o) const {
  require_same_dim(dim(), o.dim(), "TangentVector +");
  return unchecked(m_ + o.m_);
}

TangentVector TangentVector::operator-(const TangentVector& o) const {
  require_same_dim(dim(), o.dim(), "TangentVector -");
  return unchecked(m_ - o.m_);
}

SpdMatrix::SpdMatrix(Matrix m) {
  require_square(m, "SpdMatrix");
  if (!m.allFinite()) throw ValidationError("SpdMatrix: non-finite entry");
  if (!is_symmetric(m)) throw ValidationError("SpdMatrix: matrix is not symmetric");
  m_ = symmetrize(m);
  Eigen::LLT<Matrix> llt(m_);
  if (llt.info() != Eigen::Success) {
    throw ValidationError("SpdMatrix: matrix is not positive definite");
  }
}

SpdMatrix SpdMatrix::unchecked(Matrix m) {
  SpdMatrix x;
  x.m_ = symmetrize(m);
  return x;
}

SpdMatrix SpdMatrix::identity(Eigen::Index n) { return unchecked(Matrix::Identity(n, n)); }

// ---------------------------------------------------------------------------

EigenDecomposition sym_eig(const Matrix& s) {
  require_square(s, "sym_eig");
  if (!is_symmetric(s)) throw ValidationError("sym_eig: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    std::ostringstream os;
    os << "sym_eig: QR iteration did not converge within " << 30 * s.rows() << " iterations";
    throw NumericalError(os.str());
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Vector sym_eigenvalues(const Matrix& s) {
  require_square(s, "sym_eigenvalues");
  if (!is_symmetric(s)) throw ValidationError("sym_eigenvalues: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    std::ostringstream os;
    os << "sym_eigenvalues: QR iteration did not converge within " << 30 * s.rows()
       << " iterations";
    throw NumericalError(os.str());
  }
  return solver.eigenvalues();
}

SpdMatrix mat_exp(const TangentVector& v, double max_eigenvalue) {
  const auto eig = sym_eig(v.matrix());
  if (eig.values.maxCoeff() > max_eigenvalue) {
    std::ostringstream os;
    os << "mat_exp: eigenvalue " << eig.values.maxCoeff() << " exceeds the overflow cap "
       << max_eigenvalue;
    throw NumericalError(os.str());
  }
  return SpdMatrix::unchecked(spectral_apply(eig, [](double x) { return std::exp(x); }));
}

TangentVector mat_log(const SpdMatrix& x) {
  const auto eig = sym_eig(x.matrix());
  require_floor(eig.values, "mat_log");
  return TangentVector::unchecked(spectral_apply(eig, [](double l) { return std::log(l); }));
}

SpdMatrix mat_sqrt(const SpdMatrix& x) {
  const auto eig = sym_eig(x.matrix());
  require_floor(eig.values, "mat_sqrt");
  return SpdMatrix::unchecked(spectral_apply(eig, [](double l) { return std::sqrt(l); }));
}

SpdMatrix mat_invsqrt(const SpdMatrix& x) {
  const auto eig = sym_eig(x.matrix());
  require_floor(eig.values, "mat_invsqrt");
  return SpdMatrix::unchecked(
      spectral_apply(eig, [](double l) { return 1.0 / std::sqrt(l); }));
}

// ---------------------------------------------------------------------------

Chart::Chart(const SpdMatrix& base) : base_(base) {
  const auto eig = sym_eig(base.matrix());
  require_floor(eig.values, "Chart");
  sqrt_ = spectral_apply(eig, [](double l) { return std::sqrt(l); });
  invsqrt_ = spectral_apply(eig, [](double l) { return 1.0 / std::sqrt(l); });
}

Matrix Chart::whiten(const Matrix& a) const { return symmetrize(invsqrt_ * a * invsqrt_); }

Matrix Chart::unwhiten(const Matrix& a) const { return symmetrize(sqrt_ * a * sqrt_); }

double inner(const SpdMatrix& base, const TangentVector& v1, const TangentVector& v2) {
  require_same_dim(base.dim(), v1.dim(), "inner");
  require_same_dim(base.dim(), v2.dim(), "inner");
  Eigen::LLT<Matrix> llt(base.matrix());
  if (llt.info() != Eigen::Success) throw DomainError("inner: base is not positive definite");
  const Matrix a = llt.solve(v1.matrix());  // X^-1 V1
  const Matrix b = llt.solve(v2.matrix());  // X^-1 V2
  // Tr(V1 X^-1 V2 X^-1) = Tr((X^-1 V1)(X^-1 V2))
  return (a.transpose().cwiseProduct(b)).sum();
}

double norm(const SpdMatrix& base, const TangentVector& v) {
  return std::sqrt(std::max(0.0, inner(base, v, v)));
}

SpdMatrix geodesic(const SpdMatrix& base, const TangentVector& v, double t) {
  return exp_map(base, v * t);
}

double geo_distance_sq(const Chart& x1, const SpdMatrix& x2) {
  require_same_dim(x1.dim(), x2.dim(), "geo_distance");
  const Vector mu = sym_eigenvalues(x1.whiten(x2.matrix()));
  require_floor(mu, "geo_distance");
  return mu.array().log().square().sum();
}

double geo_distance(const Chart& x1, const SpdMatrix& x2) {
  return std::sqrt(geo_distance_sq(x1, x2));
}

double geo_distance(const SpdMatrix& x1, const SpdMatrix& x2) {
  require_same_dim(x1.dim(), x2.dim(), "geo_distance");
  return geo_distance(Chart(x1), x2);
}

SpdMatrix exp_map(const Chart& base, const TangentVector& v) {
  require_same_dim(base.dim(), v.dim(), "exp_map");
  const SpdMatrix inner_exp = mat_exp(TangentVector::unchecked(base.whiten(v.matrix())));
  return SpdMatrix::unchecked(base.unwhiten(inner_exp.matrix()));
}

SpdMatrix exp_map(const SpdMatrix& base, const TangentVector& v) {
  require_same_dim(base.dim(), v.dim(), "exp_map");
  return exp_map(Chart(base), v);
}

TangentVector log_map(const Chart& base, const SpdMatrix& x) {
  require_same_dim(base.dim(), x.dim(), "log_map");
  const TangentVector inner_log = mat_log(SpdMatrix::unchecked(base.whiten(x.matrix())));
  return TangentVector::unchecked(base.unwhiten(inner_log.matrix()));
}

TangentVector log_map(const SpdMatrix& base, const SpdMatrix& x) {
  require_same_dim(base.dim(), x.dim(), "log_map");
  return log_map(Chart(base), x);
}

TangentVector dist_sq_gradient(const SpdMatrix& w, const SpdMatrix& x) {
  return log_map(w, x) * -2.0;
}

// ---------------------------------------------------------------------------

KarcherError::KarcherError(SpdMatrix last, double residual, int iterations)
    : NumericalError("karcher_mean: no convergence after " + std::to_string(iterations) +
                     " iterations (residual " + std::to_string(residual) + ")"),
      last_(std::move(last)),
      residual_(residual),
      iterations_(iterations) {}

SpdMatrix karcher_mean(std::span<const SpdMatrix> points, const KarcherOptions& options) {
  if (points.empty()) throw ValidationError("karcher_mean: empty point set");
  const Eigen::Index n = points.front().dim();
  for (const auto& p : points) require_same_dim(n, p.dim(), "karcher_mean");
  if (points.size() == 1) return points.front();

  const double k = static_cast<double>(points.size());
  Matrix start = Matrix::Zero(n, n);
  for (const auto& p : points) start += p.matrix();
  SpdMatrix mean = SpdMatrix::unchecked(start / k);

  double residual = 0.0;
  for (int iter = 0; iter < options.max_iter; ++iter) {
    const Chart chart(mean);
    // Average of the whitened logarithms; the tangent average at the mean is
    // its unwhitened image.
    Matrix log_sum = Matrix::Zero(n, n);
    for (const auto& p : points) {
      log_sum += mat_log(SpdMatrix::unchecked(chart.whiten(p.matrix()))).matrix();
    }
    const Matrix log_avg = log_sum / k;
    const Matrix tangent_avg = chart.unwhiten(log_avg);
    residual = tangent_avg.norm();
    if (residual < options.tol) return mean;
    mean = SpdMatrix::unchecked(
        chart.unwhiten(mat_exp(TangentVector::unchecked(log_avg)).matrix()));
  }
  throw KarcherError(mean, residual, options.max_iter);
}

}  // namespace plrsq
