#pragma once

#include "sda/numerics.hpp"

namespace sda {

enum class GeometryKind { kEuclidean, kNegativeEntropy, kSquaredLpNorm };

/// Raised by the raw entropy conjugate map when exp would overflow; callers
/// constrained to the simplex should use the normalized composite map, which
/// has no such restriction.
struct ConjugateOverflow : std::domain_error {
  using std::domain_error::domain_error;
};

/// A Legendre function h generating a Bregman geometry. Three families:
///   Euclidean          h = 1/2 ||.||_2^2              dom h = R^d
///   NegativeEntropy    h = sum_i t_i log t_i          dom h = (0,inf)^d
///   SquaredLpNorm(p)   h = 1/(2(p-1)) ||.||_p^2       dom h = R^d, 1 < p <= 2
/// Values are immutable; all operations are pure.
class Geometry {
 public:
  static Geometry euclidean(Eigen::Index d);
  static Geometry negative_entropy(Eigen::Index d);
  static Geometry squared_lp(Eigen::Index d, double p);

  GeometryKind kind() const { return kind_; }
  Eigen::Index dim() const { return dim_; }
  double p() const { return p_; }
  // Conjugate exponent, 1/p + 1/q = 1.
  double q() const { return q_; }

  // Interior of dom h.
  bool in_domain(const Vector& theta) const;
  // Closure of dom h (entropy admits zero coordinates via 0 log 0 = 0).
  bool in_domain_closure(const Vector& theta) const;

  double h(const Vector& theta) const;
  // h on the domain closure (entropy: 0 log 0 = 0); needed when evaluating
  // divergences at boundary optima.
  double h_on_closure(const Vector& theta) const;
  Vector h_grad(const Vector& theta) const;
  // grad h^*; inverse of grad h on the interior of dom h.
  Vector h_grad_conjugate(const Vector& eta) const;
  // D_h(a, b) = h(a) - h(b) - <grad h(b), a - b>. Requires a in the closure
  // of dom h and b in its interior; nonnegative, zero iff a = b.
  double bregman(const Vector& a, const Vector& b) const;
  // Hessian of h at theta (entropy: diag(1/t_i); lp: diag(u) + alpha v v^T).
  Matrix h_hessian(const Vector& theta) const;

 private:
  Geometry(GeometryKind kind, Eigen::Index d, double p);

  GeometryKind kind_;
  Eigen::Index dim_;
  double p_ = 2.0;
  double q_ = 2.0;
};

const char* to_string(GeometryKind kind);

}  // namespace sda
