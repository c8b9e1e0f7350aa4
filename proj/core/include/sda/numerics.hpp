#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <cstdint>
#include <random>
#include <stdexcept>

namespace sda {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Symmetric positive-definite matrix with a cached spectral decomposition.
/// Construction validates symmetry and positive definiteness eagerly; all
/// queries (solve, powers, extremal eigenvalues) are O(d^2) afterwards.
class SpdMatrix {
 public:
  explicit SpdMatrix(Matrix m);

  static SpdMatrix identity(Eigen::Index d);
  static SpdMatrix diagonal(const Vector& diag);
  // Builds U * diag(eigenvalues) * U^T from an orthogonal U.
  static SpdMatrix from_spectrum(const Matrix& u, const Vector& eigenvalues);

  Eigen::Index dim() const { return mat_.rows(); }
  const Matrix& dense() const { return mat_; }

  // Eigenvalues in ascending order, eigenvectors as columns.
  const Vector& eigenvalues() const { return eigenvalues_; }
  const Matrix& eigenvectors() const { return eigenvectors_; }
  double max_eigenvalue() const { return eigenvalues_(eigenvalues_.size() - 1); }
  double min_eigenvalue() const { return eigenvalues_(0); }
  double trace() const { return mat_.trace(); }
  double max_abs_entry() const { return mat_.cwiseAbs().maxCoeff(); }

  Vector apply(const Vector& v) const;
  // <v, A v>
  double quad(const Vector& v) const;
  // x with A x = b, via the spectral factors.
  Vector solve(const Vector& b) const;
  // A^p for real p (p may be negative).
  Matrix power(double p) const;
  // tr A^p
  double trace_power(double p) const;

 private:
  Matrix mat_;
  Vector eigenvalues_;
  Matrix eigenvectors_;
};

inline double mahalanobis_sq(const SpdMatrix& a, const Vector& v) { return a.quad(v); }
inline Vector spd_solve(const SpdMatrix& a, const Vector& b) { return a.solve(b); }
inline double max_eigenvalue(const SpdMatrix& a) { return a.max_eigenvalue(); }

/// Seeded random stream. Identical seeds produce identical sequences for a
/// given build; the normal sampler is an explicit Box-Muller on top of the
/// 64-bit Mersenne twister, so no library distribution object is involved.
/// Single-owner mutable state: never share one stream across threads.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // Standard normal.
  double gaussian();
  Vector gaussian_vector(Eigen::Index d);
  // Uniform index in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);

  // Replication streams: base_seed XOR replication index.
  static std::uint64_t derived_seed(std::uint64_t base, std::uint64_t index) {
    return base ^ index;
  }
  // Decorrelated internal sub-stream (moment estimation, data shuffles).
  static std::uint64_t salted_seed(std::uint64_t base, std::uint64_t salt);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// mean + cov_factor * z with z i.i.d. standard normal (cov_factor has
// dim(mean) rows; C = factor factor^T).
Vector gaussian_vector(RngStream& rng, const Vector& mean, const Matrix& cov_factor);

// FNV-1a over the raw bytes of the coordinates; used for trace snapshots.
std::uint64_t hash_vector(const Vector& v);

void require_finite(const Vector& v, const char* what);

}  // namespace sda
