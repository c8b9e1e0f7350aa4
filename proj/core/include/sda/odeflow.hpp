#pragma once

#include "sda/problems.hpp"

namespace sda {

/// Continuous-time flow setup. f may be null (pure regularizer flow); g must
/// be twice differentiable (Zero or QuadraticL2). theta_star is the
/// psi-minimizer used by the Lyapunov values; when unset it is computed from
/// the quadratic data.
struct FlowSpec {
  Geometry geom = Geometry::euclidean(1);
  const QuadraticProblem* f = nullptr;
  Regularizer g = Regularizer::zero();
  double t_end = 1.0;
  double dt = 1e-2;
  Vector theta0;
  std::optional<Vector> theta_star;
};

struct FlowSample {
  double t = 0.0;
  Vector theta;
  double lyapunov = 0.0;  // D_h(theta*, theta(t)) for MD, D_{h+tg} for DA
};

struct FlowTrace {
  std::vector<FlowSample> samples;
  std::int64_t accepted_steps = 0;
  std::int64_t rejected_steps = 0;
};

// Minimizer of f + g for the smooth pairs the flows support.
Vector flow_optimum(const FlowSpec& spec);

/// MD flow  dtheta/dt = -hess h(theta)^{-1} [grad f(theta) + grad g(theta)],
/// integrated with the classical fourth-order scheme at fixed dt; steps that
/// leave int dom h are rejected and retried at half the step (aborts below
/// dt = 1e-9).
FlowTrace integrate_md_flow(const FlowSpec& spec);

/// DA flow  dtheta/dt = -[hess h(theta) + t hess g(theta)]^{-1}
///                       [grad f(theta) + grad g(theta)].
FlowTrace integrate_da_flow(const FlowSpec& spec);

}  // namespace sda
