#pragma once

#include "sda/geometry.hpp"

#include <limits>
#include <memory>
#include <optional>

namespace sda {

enum class RegularizerKind {
  kZero,
  kIndicatorSimplex,   // {t >= 0, sum t = r}
  kIndicatorL2Ball,    // {||t||_2 <= r}
  kL1,                 // lambda ||t||_1
  kQuadraticL2,        // 1/2 ||t - c||_Q^2, scalar path Q = nu I
};

/// The composite term g: proper lsc convex, lower-bounded by 0.
class Regularizer {
 public:
  static Regularizer zero();
  static Regularizer simplex(double radius);
  static Regularizer l2_ball(double radius);
  static Regularizer l1(double lambda);
  static Regularizer quadratic_l2(double nu, Vector center);
  static Regularizer quadratic_l2(SpdMatrix q, Vector center);

  RegularizerKind kind() const { return kind_; }
  double radius() const { return radius_; }
  double lambda() const { return lambda_; }
  double nu() const { return nu_; }
  bool has_matrix() const { return static_cast<bool>(q_); }
  const SpdMatrix& q_matrix() const { return *q_; }
  const Vector& center() const { return center_; }

  // Exact value; indicators yield 0 inside the set (feasibility tolerance
  // 1e-9) and +inf outside.
  double eval(const Vector& theta) const;
  bool is_indicator() const {
    return kind_ == RegularizerKind::kIndicatorSimplex ||
           kind_ == RegularizerKind::kIndicatorL2Ball;
  }
  // A point in dom g convenient as a default start (uniform simplex point,
  // ball/L1/quadratic centers, 0 for zero).
  Vector anchor(Eigen::Index d) const;

  // grad g for the twice-differentiable variants (Zero, QuadraticL2).
  Vector smooth_grad(const Vector& theta) const;
  Matrix smooth_hessian(Eigen::Index d) const;
  bool is_smooth() const {
    return kind_ == RegularizerKind::kZero || kind_ == RegularizerKind::kQuadraticL2;
  }

 private:
  Regularizer(RegularizerKind kind) : kind_(kind) {}

  RegularizerKind kind_;
  double radius_ = 0.0;
  double lambda_ = 0.0;
  double nu_ = 0.0;
  std::shared_ptr<const SpdMatrix> q_;  // matrix-Q path; shared so copies are cheap
  Vector center_;
};

constexpr double kFeasibilityTol = 1e-9;

// Supported closed-form pairs: Euclidean x {all}, NegativeEntropy x {Zero,
// Simplex}, SquaredLpNorm x {Zero, L1}.
bool pair_supported(const Geometry& geom, const Regularizer& g);
void require_pair_supported(const Geometry& geom, const Regularizer& g);

/// The single primitive behind DA and MD:
///   composite_map(h, g, eta, tau) = argmax_t { <eta, t> - h(t) - tau g(t) }
/// i.e. grad (h + tau g)^* evaluated at eta, in closed form per pair.
/// Satisfies the inclusion eta - grad h(theta) in tau * subdiff g(theta).
Vector composite_map(const Geometry& geom, const Regularizer& g, const Vector& eta,
                     double tau);

// Euclidean projection onto {t >= 0, sum t = r}; sort-based pivot.
Vector project_simplex(const Vector& eta, double r);

// Distance from v to subdiff g(theta) (closed-form per variant); +inf when
// theta is outside dom g.
double subgradient_residual(const Regularizer& g, const Vector& theta, const Vector& v);
// true iff v in subdiff g(theta) within tol.
bool subgradient_witness(const Regularizer& g, const Vector& theta, const Vector& v,
                         double tol = 1e-7);

/// Generalized Bregman divergence of h_tau = h + tau g:
///   D~(a, eta) = h_tau(a) - h_tau(theta) - <eta, a - theta>,
/// theta = composite_map(geom, g, eta, tau). Dominates D_h(a, theta).
double generalized_bregman(const Geometry& geom, const Regularizer& g, double tau,
                           const Vector& a, const Vector& eta);

const char* to_string(RegularizerKind kind);

}  // namespace sda
