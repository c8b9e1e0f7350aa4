#pragma once

#include "sda/regularizer.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace sda {

/// Deterministic objective with exact gradients; the DA/MD runners and the
/// metric evaluators only see this surface.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual double value(const Vector& theta) const = 0;
  virtual Vector grad(const Vector& theta) const = 0;
  virtual Eigen::Index dim() const = 0;
};

class ZeroObjective final : public Objective {
 public:
  explicit ZeroObjective(Eigen::Index d) : dim_(d) {}
  double value(const Vector&) const override { return 0.0; }
  Vector grad(const Vector& theta) const override { return Vector::Zero(theta.size()); }
  Eigen::Index dim() const override { return dim_; }

 private:
  Eigen::Index dim_;
};

/// f(t) = 1/2 <t, Sigma t> - <q, t>, with q in the column space of Sigma, so
/// the global minimizer theta_sigma = Sigma^{-1} q exists.
class QuadraticProblem final : public Objective {
 public:
  QuadraticProblem(SpdMatrix sigma, Vector q);

  static QuadraticProblem from_optimum(SpdMatrix sigma, const Vector& theta_sigma);

  const SpdMatrix& sigma() const { return sigma_; }
  const Vector& q() const { return q_; }
  const Vector& theta_sigma() const { return theta_sigma_; }
  double f_min() const { return f_min_; }

  double value(const Vector& theta) const override;
  Vector grad(const Vector& theta) const override;  // Sigma theta - q
  Eigen::Index dim() const override { return sigma_.dim(); }

  // Second moment E||x||_q^2 of the design distribution, needed by the lp
  // step-size rule. Gaussian designs estimate it with a fixed-seed Monte
  // Carlo draw; finite designs average their atoms; q = 2 is exactly tr
  // Sigma. Unset moment info is an error for q != 2.
  double design_moment_lq(double q) const;
  void set_gaussian_design(std::uint64_t moment_seed);
  void set_design_atoms(std::vector<Vector> atoms);
  bool has_design_info() const { return design_kind_ != DesignKind::kNone; }

 private:
  enum class DesignKind { kNone, kGaussian, kAtoms };

  SpdMatrix sigma_;
  Vector q_;
  Vector theta_sigma_;
  double f_min_;
  DesignKind design_kind_ = DesignKind::kNone;
  std::uint64_t moment_seed_ = 0;
  std::shared_ptr<const std::vector<Vector>> atoms_;
};

inline Vector full_gradient(const QuadraticProblem& p, const Vector& theta) {
  return p.grad(theta);
}

/// Stochastic first-order oracles share this surface; each instance owns its
/// RngStream and serves exactly one optimizer run.
class StochasticGradient {
 public:
  virtual ~StochasticGradient() = default;
  virtual Vector sample_grad(const Vector& theta) = 0;
};

/// grad f_n(t) = grad f(t) - xi_n with xi_n = factor * z_n, z_n iid standard
/// normal, so E xi xi^T = factor factor^T = C.
class AdditiveNoiseOracle final : public StochasticGradient {
 public:
  AdditiveNoiseOracle(const QuadraticProblem& base, Matrix noise_factor,
                      std::uint64_t seed);

  Vector sample_grad(const Vector& theta) override;
  Matrix covariance() const { return noise_factor_ * noise_factor_.transpose(); }
  const QuadraticProblem& base() const { return base_; }

 private:
  const QuadraticProblem& base_;
  Matrix noise_factor_;
  RngStream rng_;
};

/// Streaming least-squares oracle: draws (x, y) and returns the pointwise
/// gradient (<x, theta> - y) x. Synthetic mode draws x ~ N(0, Sigma) via a
/// factor and y = <x, theta_sigma> + sigma_noise * eps; finite mode samples a
/// dataset with or without replacement.
class LeastSquaresStream final : public StochasticGradient {
 public:
  static LeastSquaresStream synthetic(Matrix x_factor, Vector theta_sigma,
                                      double sigma_noise, std::uint64_t seed);
  static LeastSquaresStream finite(std::shared_ptr<const std::vector<Vector>> xs,
                                   std::shared_ptr<const std::vector<double>> ys,
                                   std::uint64_t seed, bool with_replacement = true);

  Vector sample_grad(const Vector& theta) override;
  std::pair<Vector, double> draw();

 private:
  LeastSquaresStream() : rng_(0) {}

  bool synthetic_ = true;
  Matrix x_factor_;
  Vector theta_sigma_;
  double sigma_noise_ = 1.0;
  std::shared_ptr<const std::vector<Vector>> xs_;
  std::shared_ptr<const std::vector<double>> ys_;
  bool with_replacement_ = true;
  std::size_t cursor_ = 0;
  RngStream rng_;
};

/// Synthetic generator: Sigma with orthogonalized Gaussian eigenvectors and
/// eigenvalues 1/k, k = 1..d; theta_sigma with |N(0,1)| coordinates;
/// homoscedastic unit noise.
struct SyntheticInstance {
  QuadraticProblem problem;
  Matrix x_factor;  // U diag(sqrt(1/k)); x = x_factor z has covariance Sigma
  double sigma_noise = 1.0;
  std::uint64_t seed = 0;

  LeastSquaresStream make_stream(std::uint64_t stream_seed) const {
    return LeastSquaresStream::synthetic(x_factor, problem.theta_sigma(), sigma_noise,
                                         stream_seed);
  }
};

SyntheticInstance generate_synthetic(Eigen::Index d, std::uint64_t seed);

/// Dense rows parsed from libsvm text ("label idx:val idx:val ...", 1-based
/// ascending indices; dimension = max index seen).
struct Dataset {
  std::vector<Vector> xs;
  std::vector<double> ys;
  Eigen::Index dim = 0;

  std::size_t size() const { return xs.size(); }
};

Dataset load_libsvm(const std::string& path);
// Removes rows with ||x||_2 > 5 * mean ||x||_2.
Dataset remove_outliers(const Dataset& data);
// Deterministic shuffle + half/half split (first half train).
std::pair<Dataset, Dataset> train_test_split(const Dataset& data, std::uint64_t seed);
// Empirical quadratic: Sigma = mean x x^T, q = mean y x (requires Sigma pd).
QuadraticProblem empirical_quadratic(const Dataset& data);

/// Certified optimum of psi = f + g: theta_star with an explicit subgradient
/// witness, cross-validated between deterministic DA and MD runs.
struct OptimumCertificate {
  Vector theta_star;
  Vector witness;          // -grad f(theta_star), in subdiff g within residual
  double residual = 0.0;   // distance of witness to subdiff g(theta_star)
  double psi_min = 0.0;
  double dh_from_start = 0.0;  // D_h(theta_star, theta_0) for the default start
  Vector start;                // the default theta_0 the certificate refers to
  std::int64_t iterations = 0;
};

// Geometry-dependent maximal constant step-size:
//   Euclidean   1 / lambda_max(Sigma)
//   lp          1 / E||x||_q^2 (empirical/analytic second moment)
//   entropy     1 / max_ij |Sigma_ij|
double max_stepsize(const Geometry& geom, const QuadraticProblem& problem);

// Default starting point: 0 for Euclidean/lp, the uniform simplex point for
// entropy; indicator regularizers move the start to a feasible anchor so the
// averaged iterate stays feasible.
Vector default_start(const Geometry& geom, const Regularizer& g);

OptimumCertificate compute_optimum(const QuadraticProblem& problem, const Regularizer& g,
                                   const Geometry& geom, double tol = 1e-10);

}  // namespace sda
