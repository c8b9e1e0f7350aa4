#include "sda/odeflow.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace sda {

namespace {

constexpr double kDtMin = 1e-9;

void validate(const FlowSpec& spec) {
  if (!(spec.dt > 0.0) || !(spec.t_end > 0.0)) {
    throw std::invalid_argument("FlowSpec: dt and t_end must be positive");
  }
  if (!spec.g.is_smooth()) {
    throw std::invalid_argument("FlowSpec: g must be twice differentiable");
  }
  if (!spec.geom.in_domain(spec.theta0)) {
    throw std::invalid_argument("FlowSpec: theta0 outside int dom h");
  }
  if (spec.f && spec.f->dim() != spec.geom.dim()) {
    throw std::invalid_argument("FlowSpec: f dimension mismatch");
  }
}

Vector psi_grad(const FlowSpec& spec, const Vector& theta) {
  Vector grad = spec.g.smooth_grad(theta);
  if (spec.f) grad += spec.f->grad(theta);
  return grad;
}

// Velocity field; `time_weight` multiplies hess g (0 for MD, t for DA).
Vector velocity(const FlowSpec& spec, double time_weight, const Vector& theta) {
  const Vector grad = psi_grad(spec, theta);
  if (spec.geom.kind() == GeometryKind::kEuclidean &&
      spec.g.kind() == RegularizerKind::kZero) {
    return -grad;
  }
  if (spec.geom.kind() == GeometryKind::kEuclidean && !spec.g.has_matrix()) {
    // (1 + w nu)^{-1} is a scalar
    return -grad / (1.0 + time_weight * spec.g.nu());
  }
  if (spec.geom.kind() == GeometryKind::kNegativeEntropy && !spec.g.has_matrix() &&
      spec.g.kind() == RegularizerKind::kZero) {
    // diagonal Hessian 1/theta_i
    return -(theta.array() * grad.array()).matrix();
  }
  Matrix m = spec.geom.h_hessian(theta);
  if (time_weight != 0.0 || spec.g.kind() != RegularizerKind::kZero) {
    m += time_weight * spec.g.smooth_hessian(theta.size());
  }
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("flow: metric solve failed (Hessian not positive)");
  }
  return -llt.solve(grad);
}

double lyapunov_md(const FlowSpec& spec, const Vector& theta_star, const Vector& theta) {
  return spec.geom.bregman(theta_star, theta);
}

// D_{h + t g}(theta*, theta) = D_h + t * (g(theta*) - g(theta) - <grad
// g(theta), theta* - theta>)
double lyapunov_da(const FlowSpec& spec, double t, const Vector& theta_star,
                   const Vector& theta) {
  double v = spec.geom.bregman(theta_star, theta);
  if (spec.g.kind() != RegularizerKind::kZero) {
    v += t * (spec.g.eval(theta_star) - spec.g.eval(theta) -
              spec.g.smooth_grad(theta).dot(theta_star - theta));
  }
  return v;
}

FlowTrace integrate(const FlowSpec& spec, bool da_flow) {
  validate(spec);
  const Vector theta_star = spec.theta_star ? *spec.theta_star : flow_optimum(spec);

  FlowTrace trace;
  Vector theta = spec.theta0;
  double t = 0.0;
  double dt = spec.dt;

  auto record = [&](double time, const Vector& state) {
    FlowSample s;
    s.t = time;
    s.theta = state;
    s.lyapunov = da_flow ? lyapunov_da(spec, time, theta_star, state)
                         : lyapunov_md(spec, theta_star, state);
    trace.samples.push_back(std::move(s));
  };
  record(0.0, theta);

  const auto rhs = [&](double time, const Vector& state) {
    return velocity(spec, da_flow ? time : 0.0, state);
  };

  while (t < spec.t_end - 1e-12 * spec.t_end) {
    const double step = std::min(dt, spec.t_end - t);
    bool ok = true;
    Vector next;
    try {
      const Vector k1 = rhs(t, theta);
      const Vector k2 = rhs(t + 0.5 * step, theta + 0.5 * step * k1);
      const Vector k3 = rhs(t + 0.5 * step, theta + 0.5 * step * k2);
      const Vector k4 = rhs(t + step, theta + step * k3);
      next = theta + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      ok = spec.geom.in_domain(next) && next.allFinite();
    } catch (const std::domain_error&) {
      ok = false;
    }
    if (!ok) {
      ++trace.rejected_steps;
      dt *= 0.5;
      if (dt < kDtMin) {
        throw std::runtime_error("flow: step size underflow while avoiding dom h boundary");
      }
      continue;
    }
    theta = std::move(next);
    t += step;
    ++trace.accepted_steps;
    record(t, theta);
  }
  return trace;
}

}  // namespace

Vector flow_optimum(const FlowSpec& spec) {
  const Eigen::Index d = spec.geom.dim();
  if (spec.g.kind() == RegularizerKind::kZero) {
    if (!spec.f) throw std::invalid_argument("flow_optimum: psi has no minimizer (f = g = 0)");
    return spec.f->theta_sigma();
  }
  if (!spec.f) return spec.g.center();
  // minimize 1/2<t,S t> - <q,t> + 1/2||t - c||_Q^2  ->  (S + Q) t = q + Q c
  const Matrix q_mat = spec.g.smooth_hessian(d);
  const Matrix m = spec.f->sigma().dense() + q_mat;
  const Vector rhs = spec.f->q() + q_mat * spec.g.center();
  return m.llt().solve(rhs);
}

FlowTrace integrate_md_flow(const FlowSpec& spec) { return integrate(spec, false); }

FlowTrace integrate_da_flow(const FlowSpec& spec) { return integrate(spec, true); }

}  // namespace sda
