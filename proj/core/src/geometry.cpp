#include "sda/geometry.hpp"

#include <cmath>

namespace sda {

namespace {

constexpr double kEntropyExpCap = 700.0;

double xlogx(double x) { return x == 0.0 ? 0.0 : x * std::log(x); }

double lp_norm(const Vector& v, double p) {
  return std::pow(v.array().abs().pow(p).sum(), 1.0 / p);
}

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

Geometry::Geometry(GeometryKind kind, Eigen::Index d, double p)
    : kind_(kind), dim_(d), p_(p) {
  if (d <= 0) throw std::invalid_argument("Geometry: dimension must be positive");
  if (kind == GeometryKind::kSquaredLpNorm) {
    if (!(p > 1.0 && p <= 2.0)) {
      throw std::invalid_argument("Geometry: lp exponent must lie in (1, 2]");
    }
    q_ = p / (p - 1.0);
  }
}

Geometry Geometry::euclidean(Eigen::Index d) {
  return Geometry(GeometryKind::kEuclidean, d, 2.0);
}

Geometry Geometry::negative_entropy(Eigen::Index d) {
  return Geometry(GeometryKind::kNegativeEntropy, d, 2.0);
}

Geometry Geometry::squared_lp(Eigen::Index d, double p) {
  return Geometry(GeometryKind::kSquaredLpNorm, d, p);
}

bool Geometry::in_domain(const Vector& theta) const {
  if (theta.size() != dim_) return false;
  if (kind_ == GeometryKind::kNegativeEntropy) {
    return (theta.array() > 0.0).all();
  }
  return true;
}

bool Geometry::in_domain_closure(const Vector& theta) const {
  if (theta.size() != dim_) return false;
  if (kind_ == GeometryKind::kNegativeEntropy) {
    return (theta.array() >= 0.0).all();
  }
  return true;
}

double Geometry::h(const Vector& theta) const {
  if (!in_domain(theta)) {
    throw std::domain_error("Geometry::h: point outside dom h");
  }
  return h_on_closure(theta);
}

double Geometry::h_on_closure(const Vector& theta) const {
  if (!in_domain_closure(theta)) {
    throw std::domain_error("Geometry::h_on_closure: point outside closure of dom h");
  }
  switch (kind_) {
    case GeometryKind::kEuclidean:
      return 0.5 * theta.squaredNorm();
    case GeometryKind::kNegativeEntropy: {
      double s = 0.0;
      for (Eigen::Index i = 0; i < theta.size(); ++i) s += xlogx(theta(i));
      return s;
    }
    case GeometryKind::kSquaredLpNorm: {
      const double n = lp_norm(theta, p_);
      return n * n / (2.0 * (p_ - 1.0));
    }
  }
  throw std::logic_error("unreachable");
}

Vector Geometry::h_grad(const Vector& theta) const {
  if (!in_domain(theta)) {
    throw std::domain_error("Geometry::h_grad: point outside int dom h");
  }
  switch (kind_) {
    case GeometryKind::kEuclidean:
      return theta;
    case GeometryKind::kNegativeEntropy:
      return theta.array().log() + 1.0;
    case GeometryKind::kSquaredLpNorm: {
      const double n = lp_norm(theta, p_);
      if (n == 0.0) {
        throw std::domain_error("Geometry::h_grad: lp gradient formula undefined at 0");
      }
      // grad_i = sign(t_i) |t_i|^{p-1} / ((p-1) ||t||_p^{p-2})
      Vector g(theta.size());
      const double denom = (p_ - 1.0) * std::pow(n, p_ - 2.0);
      for (Eigen::Index i = 0; i < theta.size(); ++i) {
        g(i) = sgn(theta(i)) * std::pow(std::abs(theta(i)), p_ - 1.0) / denom;
      }
      return g;
    }
  }
  throw std::logic_error("unreachable");
}

Vector Geometry::h_grad_conjugate(const Vector& eta) const {
  if (eta.size() != dim_) {
    throw std::invalid_argument("Geometry::h_grad_conjugate: dimension mismatch");
  }
  require_finite(eta, "Geometry::h_grad_conjugate");
  switch (kind_) {
    case GeometryKind::kEuclidean:
      return eta;
    case GeometryKind::kNegativeEntropy: {
      if (eta.maxCoeff() > kEntropyExpCap) {
        throw ConjugateOverflow(
            "entropy conjugate map would overflow; use the simplex-normalized "
            "composite map");
      }
      // h = sum t log t has grad log t + 1, so the inverse is exp(eta - 1).
      return (eta.array() - 1.0).exp();
    }
    case GeometryKind::kSquaredLpNorm: {
      const double n = lp_norm(eta, q_);
      if (n == 0.0) return Vector::Zero(eta.size());
      Vector g(eta.size());
      const double denom = (q_ - 1.0) * std::pow(n, q_ - 2.0);
      for (Eigen::Index i = 0; i < eta.size(); ++i) {
        g(i) = sgn(eta(i)) * std::pow(std::abs(eta(i)), q_ - 1.0) / denom;
      }
      return g;
    }
  }
  throw std::logic_error("unreachable");
}

double Geometry::bregman(const Vector& a, const Vector& b) const {
  if (!in_domain_closure(a)) {
    throw std::domain_error("Geometry::bregman: first argument outside dom h");
  }
  if (!in_domain(b)) {
    throw std::domain_error("Geometry::bregman: second argument outside int dom h");
  }
  double value;
  if (kind_ == GeometryKind::kNegativeEntropy) {
    // KL form, stable when coordinates of a vanish.
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      if (a(i) > 0.0) s += a(i) * std::log(a(i) / b(i));
      s += b(i) - a(i);
    }
    value = s;
  } else if (kind_ == GeometryKind::kSquaredLpNorm && b.isZero(0.0)) {
    value = h_on_closure(a);  // grad h(0) = 0 in the limit
  } else {
    value = h_on_closure(a) - h_on_closure(b) - h_grad(b).dot(a - b);
  }
  const double scale = 1.0 + std::abs(h_on_closure(a)) + std::abs(h_on_closure(b));
  if (value < -1e-8 * scale) {
    throw std::logic_error("Geometry::bregman: negative divergence");
  }
  return value < 0.0 ? 0.0 : value;
}

Matrix Geometry::h_hessian(const Vector& theta) const {
  if (!in_domain(theta)) {
    throw std::domain_error("Geometry::h_hessian: point outside int dom h");
  }
  switch (kind_) {
    case GeometryKind::kEuclidean:
      return Matrix::Identity(dim_, dim_);
    case GeometryKind::kNegativeEntropy:
      return Vector(theta.array().inverse()).asDiagonal();
    case GeometryKind::kSquaredLpNorm: {
      const double n = lp_norm(theta, p_);
      if (n == 0.0) {
        throw std::domain_error("Geometry::h_hessian: lp Hessian undefined at 0");
      }
      // diag(u) + alpha v v^T with
      //   u_i = ||t||_p^{2-p} |t_i|^{p-2}, v_i = sign(t_i)|t_i|^{p-1},
      //   alpha = (2-p)/(p-1) ||t||_p^{-2(p-1)}
      Vector u(dim_), v(dim_);
      for (Eigen::Index i = 0; i < dim_; ++i) {
        const double a = std::abs(theta(i));
        u(i) = std::pow(n, 2.0 - p_) * std::pow(a, p_ - 2.0);
        v(i) = sgn(theta(i)) * std::pow(a, p_ - 1.0);
      }
      const double alpha = (2.0 - p_) / (p_ - 1.0) * std::pow(n, -2.0 * (p_ - 1.0));
      Matrix hess = Matrix(u.asDiagonal());
      hess.noalias() += alpha * v * v.transpose();
      return hess;
    }
  }
  throw std::logic_error("unreachable");
}

const char* to_string(GeometryKind kind) {
  switch (kind) {
    case GeometryKind::kEuclidean: return "euclidean";
    case GeometryKind::kNegativeEntropy: return "entropy";
    case GeometryKind::kSquaredLpNorm: return "lp";
  }
  return "?";
}

}  // namespace sda
