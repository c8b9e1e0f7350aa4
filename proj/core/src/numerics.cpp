#include "sda/numerics.hpp"

#include <cmath>
#include <numbers>

namespace sda {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kPdTol = 1e-12;

}  // namespace

SpdMatrix::SpdMatrix(Matrix m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw std::invalid_argument("SpdMatrix: matrix must be square and non-empty");
  }
  const double scale = m.cwiseAbs().maxCoeff();
  if (!m.allFinite()) {
    throw std::invalid_argument("SpdMatrix: non-finite entries");
  }
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTol * std::max(1.0, scale)) {
    throw std::invalid_argument("SpdMatrix: matrix is not symmetric");
  }
  mat_ = 0.5 * (m + m.transpose());  // store an exactly symmetric copy

  Eigen::SelfAdjointEigenSolver<Matrix> solver(mat_);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("SpdMatrix: eigendecomposition failed");
  }
  eigenvalues_ = solver.eigenvalues();
  eigenvectors_ = solver.eigenvectors();
  const double lambda_max = eigenvalues_(eigenvalues_.size() - 1);
  if (!(lambda_max > 0.0) || eigenvalues_(0) <= kPdTol * lambda_max) {
    throw std::invalid_argument("SpdMatrix: matrix is not positive definite");
  }
}

SpdMatrix SpdMatrix::identity(Eigen::Index d) {
  return SpdMatrix(Matrix::Identity(d, d));
}

SpdMatrix SpdMatrix::diagonal(const Vector& diag) {
  return SpdMatrix(Matrix(diag.asDiagonal()));
}

SpdMatrix SpdMatrix::from_spectrum(const Matrix& u, const Vector& eigenvalues) {
  if (u.rows() != u.cols() || u.rows() != eigenvalues.size()) {
    throw std::invalid_argument("SpdMatrix::from_spectrum: dimension mismatch");
  }
  Matrix m = u * eigenvalues.asDiagonal() * u.transpose();
  return SpdMatrix(std::move(m));
}

Vector SpdMatrix::apply(const Vector& v) const {
  if (v.size() != dim()) {
    throw std::invalid_argument("SpdMatrix::apply: dimension mismatch");
  }
  return mat_ * v;
}

double SpdMatrix::quad(const Vector& v) const {
  if (v.size() != dim()) {
    throw std::invalid_argument("SpdMatrix::quad: dimension mismatch");
  }
  return v.dot(mat_ * v);
}

Vector SpdMatrix::solve(const Vector& b) const {
  if (b.size() != dim()) {
    throw std::invalid_argument("SpdMatrix::solve: dimension mismatch");
  }
  // A^{-1} b = U diag(1/lambda) U^T b
  Vector t = eigenvectors_.transpose() * b;
  t.array() /= eigenvalues_.array();
  return eigenvectors_ * t;
}

Matrix SpdMatrix::power(double p) const {
  Vector powered = eigenvalues_.array().pow(p);
  return eigenvectors_ * powered.asDiagonal() * eigenvectors_.transpose();
}

double SpdMatrix::trace_power(double p) const {
  return eigenvalues_.array().pow(p).sum();
}

double RngStream::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

Vector RngStream::gaussian_vector(Eigen::Index d) {
  Vector z(d);
  for (Eigen::Index i = 0; i < d; ++i) z(i) = gaussian();
  return z;
}

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(engine_()) * n) >> 64);
}

std::uint64_t RngStream::salted_seed(std::uint64_t base, std::uint64_t salt) {
  // splitmix64 finalizer over base + salt * golden ratio
  std::uint64_t z = base + salt * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Vector gaussian_vector(RngStream& rng, const Vector& mean, const Matrix& cov_factor) {
  if (cov_factor.rows() != mean.size()) {
    throw std::invalid_argument("gaussian_vector: cov_factor must have dim(mean) rows");
  }
  const Vector z = rng.gaussian_vector(cov_factor.cols());
  return mean + cov_factor * z;
}

std::uint64_t hash_vector(const Vector& v) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(v.data());
  const std::size_t n = static_cast<std::size_t>(v.size()) * sizeof(double);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) {
    throw std::runtime_error(std::string(what) + ": non-finite values");
  }
}

}  // namespace sda
