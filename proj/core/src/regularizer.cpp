#include "sda/regularizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sda {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double soft_threshold(double x, double t) {
  const double m = std::abs(x) - t;
  return m > 0.0 ? (x > 0.0 ? m : -m) : 0.0;
}

}  // namespace

Regularizer Regularizer::zero() { return Regularizer(RegularizerKind::kZero); }

Regularizer Regularizer::simplex(double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("simplex radius must be positive");
  Regularizer g(RegularizerKind::kIndicatorSimplex);
  g.radius_ = radius;
  return g;
}

Regularizer Regularizer::l2_ball(double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
  Regularizer g(RegularizerKind::kIndicatorL2Ball);
  g.radius_ = radius;
  return g;
}

Regularizer Regularizer::l1(double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("l1 weight must be nonnegative");
  Regularizer g(RegularizerKind::kL1);
  g.lambda_ = lambda;
  return g;
}

Regularizer Regularizer::quadratic_l2(double nu, Vector center) {
  if (nu < 0.0) throw std::invalid_argument("quadratic weight must be nonnegative");
  Regularizer g(RegularizerKind::kQuadraticL2);
  g.nu_ = nu;
  g.center_ = std::move(center);
  return g;
}

Regularizer Regularizer::quadratic_l2(SpdMatrix q, Vector center) {
  if (q.dim() != center.size()) {
    throw std::invalid_argument("quadratic_l2: center/Q dimension mismatch");
  }
  Regularizer g(RegularizerKind::kQuadraticL2);
  g.q_ = std::make_shared<const SpdMatrix>(std::move(q));
  g.center_ = std::move(center);
  return g;
}

double Regularizer::eval(const Vector& theta) const {
  switch (kind_) {
    case RegularizerKind::kZero:
      return 0.0;
    case RegularizerKind::kIndicatorSimplex: {
      if (theta.minCoeff() < -kFeasibilityTol) return kInf;
      if (std::abs(theta.sum() - radius_) > kFeasibilityTol) return kInf;
      return 0.0;
    }
    case RegularizerKind::kIndicatorL2Ball:
      return theta.norm() <= radius_ + kFeasibilityTol ? 0.0 : kInf;
    case RegularizerKind::kL1:
      return lambda_ * theta.lpNorm<1>();
    case RegularizerKind::kQuadraticL2: {
      const Vector diff = theta - center_;
      return q_ ? 0.5 * q_->quad(diff) : 0.5 * nu_ * diff.squaredNorm();
    }
  }
  throw std::logic_error("unreachable");
}

Vector Regularizer::anchor(Eigen::Index d) const {
  switch (kind_) {
    case RegularizerKind::kIndicatorSimplex:
      return Vector::Constant(d, radius_ / static_cast<double>(d));
    case RegularizerKind::kQuadraticL2:
      return center_;
    default:
      return Vector::Zero(d);
  }
}

Vector Regularizer::smooth_grad(const Vector& theta) const {
  switch (kind_) {
    case RegularizerKind::kZero:
      return Vector::Zero(theta.size());
    case RegularizerKind::kQuadraticL2:
      return q_ ? q_->apply(theta - center_) : Vector(nu_ * (theta - center_));
    default:
      throw std::logic_error("smooth_grad: regularizer is not differentiable");
  }
}

Matrix Regularizer::smooth_hessian(Eigen::Index d) const {
  switch (kind_) {
    case RegularizerKind::kZero:
      return Matrix::Zero(d, d);
    case RegularizerKind::kQuadraticL2:
      return q_ ? q_->dense() : Matrix(nu_ * Matrix::Identity(d, d));
    default:
      throw std::logic_error("smooth_hessian: regularizer is not differentiable");
  }
}

bool pair_supported(const Geometry& geom, const Regularizer& g) {
  switch (geom.kind()) {
    case GeometryKind::kEuclidean:
      return true;
    case GeometryKind::kNegativeEntropy:
      return g.kind() == RegularizerKind::kZero ||
             g.kind() == RegularizerKind::kIndicatorSimplex;
    case GeometryKind::kSquaredLpNorm:
      return g.kind() == RegularizerKind::kZero || g.kind() == RegularizerKind::kL1;
  }
  return false;
}

void require_pair_supported(const Geometry& geom, const Regularizer& g) {
  if (!pair_supported(geom, g)) {
    throw std::invalid_argument(
        std::string("no closed-form composite map for geometry '") +
        to_string(geom.kind()) + "' with regularizer '" + to_string(g.kind()) + "'");
  }
}

Vector project_simplex(const Vector& eta, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("project_simplex: radius must be positive");
  const Eigen::Index d = eta.size();
  std::vector<double> u(eta.data(), eta.data() + d);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double csum = 0.0;
  double pivot = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    csum += u[static_cast<std::size_t>(j)];
    const double candidate = (csum - r) / static_cast<double>(j + 1);
    if (u[static_cast<std::size_t>(j)] - candidate > 0.0) pivot = candidate;
  }
  Vector out(d);
  for (Eigen::Index i = 0; i < d; ++i) out(i) = std::max(eta(i) - pivot, 0.0);
  return out;
}

Vector composite_map(const Geometry& geom, const Regularizer& g, const Vector& eta,
                     double tau) {
  if (tau < 0.0) throw std::invalid_argument("composite_map: tau must be nonnegative");
  require_pair_supported(geom, g);
  if (eta.size() != geom.dim()) {
    throw std::invalid_argument("composite_map: dimension mismatch");
  }

  if (geom.kind() == GeometryKind::kEuclidean) {
    switch (g.kind()) {
      case RegularizerKind::kZero:
        return eta;
      case RegularizerKind::kIndicatorSimplex:
        return project_simplex(eta, g.radius());
      case RegularizerKind::kIndicatorL2Ball: {
        const double n = eta.norm();
        return n <= g.radius() ? eta : Vector(eta * (g.radius() / n));
      }
      case RegularizerKind::kL1: {
        Vector out(eta.size());
        const double t = tau * g.lambda();
        for (Eigen::Index i = 0; i < eta.size(); ++i) out(i) = soft_threshold(eta(i), t);
        return out;
      }
      case RegularizerKind::kQuadraticL2: {
        if (!g.has_matrix()) {
          // (eta + tau nu c) / (1 + tau nu)
          return (eta + tau * g.nu() * g.center()) / (1.0 + tau * g.nu());
        }
        // solve (I + tau Q) t = eta + tau Q c, reusing the factorization when
        // tau repeats (MD calls with a fixed tau = gamma every step)
        struct FactorCache {
          const void* q = nullptr;
          double tau = -1.0;
          Eigen::LLT<Matrix> llt;
        };
        thread_local FactorCache cache;
        if (cache.q != &g.q_matrix() || cache.tau != tau) {
          cache.q = &g.q_matrix();
          cache.tau = tau;
          cache.llt.compute(Matrix::Identity(eta.size(), eta.size()) +
                            tau * g.q_matrix().dense());
        }
        const Vector rhs = eta + tau * g.q_matrix().apply(g.center());
        return cache.llt.solve(rhs);
      }
    }
  }

  if (geom.kind() == GeometryKind::kNegativeEntropy) {
    if (g.kind() == RegularizerKind::kZero) {
      return geom.h_grad_conjugate(eta);
    }
    // simplex: r * softmax(eta), computed max-shifted
    const double shift = eta.maxCoeff();
    Vector w = (eta.array() - shift).exp();
    return Vector(g.radius() * w / w.sum());
  }

  // SquaredLpNorm
  if (g.kind() == RegularizerKind::kZero) {
    return geom.h_grad_conjugate(eta);
  }
  Vector shrunk(eta.size());
  const double t = tau * g.lambda();
  for (Eigen::Index i = 0; i < eta.size(); ++i) shrunk(i) = soft_threshold(eta(i), t);
  return geom.h_grad_conjugate(shrunk);
}

namespace {

// Distance from v to the normal cone of the simplex at a feasible theta:
// minimize over c of sum_{supp}(v_i - c)^2 + sum_{off}max(v_i - c, 0)^2.
double simplex_normal_cone_distance(const Vector& theta, const Vector& v) {
  const Eigen::Index d = theta.size();
  std::vector<bool> in_support(static_cast<std::size_t>(d));
  bool any_support = false;
  for (Eigen::Index i = 0; i < d; ++i) {
    in_support[static_cast<std::size_t>(i)] = theta(i) > kFeasibilityTol;
    any_support |= in_support[static_cast<std::size_t>(i)];
  }
  if (!any_support) return 0.0;  // degenerate; feasibility already checked

  auto objective = [&](double c) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      const double diff = v(i) - c;
      if (in_support[static_cast<std::size_t>(i)]) {
        s += diff * diff;
      } else if (diff > 0.0) {
        s += diff * diff;
      }
    }
    return s;
  };
  // The objective is convex and piecewise quadratic in c; its derivative is
  // nondecreasing, so bisection on the derivative converges.
  auto derivative = [&](double c) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      const double diff = v(i) - c;
      if (in_support[static_cast<std::size_t>(i)]) {
        s -= 2.0 * diff;
      } else if (diff > 0.0) {
        s -= 2.0 * diff;
      }
    }
    return s;
  };
  double lo = v.minCoeff() - 1.0, hi = v.maxCoeff() + 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (derivative(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::sqrt(std::max(0.0, objective(0.5 * (lo + hi))));
}

}  // namespace

double subgradient_residual(const Regularizer& g, const Vector& theta, const Vector& v) {
  switch (g.kind()) {
    case RegularizerKind::kZero:
      return v.norm();
    case RegularizerKind::kL1: {
      const double lambda = g.lambda();
      double s = 0.0;
      for (Eigen::Index i = 0; i < theta.size(); ++i) {
        double di;
        if (theta(i) > 0.0) {
          di = v(i) - lambda;
        } else if (theta(i) < 0.0) {
          di = v(i) + lambda;
        } else {
          di = std::max(0.0, std::abs(v(i)) - lambda);
        }
        s += di * di;
      }
      return std::sqrt(s);
    }
    case RegularizerKind::kQuadraticL2:
      return (v - g.smooth_grad(theta)).norm();
    case RegularizerKind::kIndicatorSimplex: {
      if (std::isinf(g.eval(theta))) return kInf;
      return simplex_normal_cone_distance(theta, v);
    }
    case RegularizerKind::kIndicatorL2Ball: {
      if (std::isinf(g.eval(theta))) return kInf;
      const double n = theta.norm();
      if (n < g.radius() - kFeasibilityTol) return v.norm();
      // normal cone is the ray {t * theta, t >= 0}
      const double t = std::max(0.0, v.dot(theta) / (n * n));
      return (v - t * theta).norm();
    }
  }
  throw std::logic_error("unreachable");
}

bool subgradient_witness(const Regularizer& g, const Vector& theta, const Vector& v,
                         double tol) {
  return subgradient_residual(g, theta, v) <= tol;
}

double generalized_bregman(const Geometry& geom, const Regularizer& g, double tau,
                           const Vector& a, const Vector& eta) {
  const Vector theta = composite_map(geom, g, eta, tau);
  const double ga = g.eval(a);
  if (std::isinf(ga)) return kInf;
  // h_tau(a) - h_tau(theta) - <eta, a - theta>, h_tau = h + tau g
  return geom.h_on_closure(a) + tau * ga - geom.h_on_closure(theta) -
         tau * g.eval(theta) - eta.dot(a - theta);
}

const char* to_string(RegularizerKind kind) {
  switch (kind) {
    case RegularizerKind::kZero: return "none";
    case RegularizerKind::kIndicatorSimplex: return "simplex";
    case RegularizerKind::kIndicatorL2Ball: return "ball";
    case RegularizerKind::kL1: return "l1";
    case RegularizerKind::kQuadraticL2: return "l2";
  }
  return "?";
}

}  // namespace sda
