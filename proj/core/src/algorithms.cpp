#include "sda/algorithms.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>

namespace sda {

StepSchedule StepSchedule::constant(double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("step-size must be positive");
  return StepSchedule{Kind::kConstant, gamma};
}

StepSchedule StepSchedule::decaying(double c) {
  if (!(c > 0.0)) throw std::invalid_argument("step constant must be positive");
  return StepSchedule{Kind::kDecaying, c};
}

double StepSchedule::gamma(std::int64_t n) const {
  if (n < 1) throw std::invalid_argument("StepSchedule::gamma: n must be >= 1");
  return kind == Kind::kConstant ? value : value / std::sqrt(static_cast<double>(n));
}

double MetricEvaluator::psi(const Vector& theta) const {
  double v = f ? f->value(theta) : 0.0;
  if (g) v += g->eval(theta);
  return v;
}

double MetricEvaluator::mahalanobis_gap_sq(const Vector& theta) const {
  if (!sigma) return std::numeric_limits<double>::quiet_NaN();
  return 0.5 * sigma->quad(theta - theta_star);
}

std::vector<std::int64_t> checkpoint_grid(std::int64_t n_iters) {
  if (n_iters < 1) throw std::invalid_argument("checkpoint_grid: n_iters must be >= 1");
  std::vector<std::int64_t> grid;
  for (std::int64_t n = 1; n < n_iters; n *= 2) grid.push_back(n);
  grid.push_back(n_iters);
  return grid;
}

void RunningAverage::add(const Vector& v) {
  if (count_ == 0) {
    sum_ = v;
    comp_ = Vector::Zero(v.size());
  } else {
    const Vector y = v - comp_;
    const Vector t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
  }
  ++count_;
}

Vector RunningAverage::mean() const {
  if (count_ == 0) throw std::logic_error("RunningAverage: empty");
  return sum_ / static_cast<double>(count_);
}

Vector dual_start(const Geometry& geom, const Vector& theta0) {
  if (geom.kind() == GeometryKind::kSquaredLpNorm && theta0.isZero(0.0)) {
    return Vector::Zero(theta0.size());
  }
  return geom.h_grad(theta0);
}

Vector face_dual(const Geometry& geom, const Vector& theta) {
  if (geom.kind() == GeometryKind::kNegativeEntropy && theta.minCoeff() <= 0.0) {
    Vector eta(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      eta(i) = theta(i) > 0.0 ? std::log(theta(i)) + 1.0
                              : -std::numeric_limits<double>::infinity();
    }
    return eta;
  }
  return dual_start(geom, theta);
}

namespace {

using GradFn = std::function<Vector(const Vector&)>;

void check_start(const Geometry& geom, const Regularizer& g, const Vector& theta0) {
  if (theta0.size() != geom.dim()) {
    throw std::invalid_argument("run: theta0 dimension mismatch");
  }
  if (!geom.in_domain(theta0)) {
    throw std::invalid_argument("run: theta0 outside int dom h");
  }
  if (g.is_indicator() && std::isinf(g.eval(theta0))) {
    throw std::invalid_argument("run: theta0 infeasible for the indicator regularizer");
  }
}

// Entropy iterates must stay strictly positive when the map is the raw
// conjugate; under the simplex indicator the normalized map may underflow a
// coordinate to exact zero, which is harmless (the iterate stays feasible).
void check_iterate_domain(const Geometry& geom, const Regularizer& g,
                          const Vector& theta, std::int64_t n) {
  if (geom.kind() == GeometryKind::kNegativeEntropy &&
      g.kind() != RegularizerKind::kIndicatorSimplex && theta.minCoeff() <= 0.0) {
    throw std::runtime_error("entropy iterate left the positive orthant at n = " +
                             std::to_string(n));
  }
}

void maybe_warn_stepsize(const Geometry& geom, const Objective* f,
                         const StepSchedule& schedule, RunTrace& trace) {
  if (schedule.kind != StepSchedule::Kind::kConstant) return;
  const auto* quad = dynamic_cast<const QuadraticProblem*>(f);
  if (!quad) return;
  try {
    const double cap = max_stepsize(geom, *quad);
    if (schedule.value > cap * (1.0 + 1e-12)) {
      trace.stepsize_warning = true;
      std::cerr << "warning: step-size " << schedule.value
                << " exceeds certified maximum " << cap << "\n";
    }
  } catch (const std::exception&) {
    // no certified bound available (e.g. missing design moments); skip
  }
}

struct CheckpointRecorder {
  const MetricEvaluator* metrics;
  std::vector<std::int64_t> grid;
  std::size_t next = 0;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  bool due(std::int64_t n) const { return next < grid.size() && grid[next] == n; }

  void record(RunTrace& trace, std::int64_t n, const Vector& theta,
              const RunningAverage& avg) {
    TracePoint pt;
    pt.n = n;
    pt.theta = theta;
    pt.theta_avg = avg.mean();
    pt.theta_hash = hash_vector(theta);
    if (metrics) {
      pt.psi_gap_avg = metrics->psi_gap(pt.theta_avg);
      pt.psi_gap_last = metrics->psi_gap(theta);
      pt.mahal_sq_avg = metrics->mahalanobis_gap_sq(pt.theta_avg);
    } else {
      pt.psi_gap_avg = pt.psi_gap_last = pt.mahal_sq_avg =
          std::numeric_limits<double>::quiet_NaN();
    }
    pt.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    trace.points.push_back(std::move(pt));
    ++next;
  }
};

RunTrace run_dual_averaging(const Geometry& geom, const Regularizer& g,
                            const GradFn& grad, const StepSchedule& schedule,
                            const Vector& theta0, std::int64_t n_iters,
                            const MetricEvaluator* metrics, std::uint64_t seed_label) {
  check_start(geom, g, theta0);
  require_pair_supported(geom, g);

  RunTrace trace;
  trace.seed = seed_label;
  trace.n_iters = n_iters;

  CheckpointRecorder rec{metrics, checkpoint_grid(n_iters)};

  Vector theta = theta0;
  Vector eta = dual_start(geom, theta0);
  double tau = 0.0;
  RunningAverage avg;

  for (std::int64_t n = 1; n <= n_iters; ++n) {
    const double gamma_n = schedule.gamma(n);
    eta -= gamma_n * grad(theta);
    tau += gamma_n;
    avg.add(theta);  // average covers theta_0 .. theta_{n-1}
    theta = composite_map(geom, g, eta, tau);
    check_iterate_domain(geom, g, theta, n);
    if (rec.due(n)) rec.record(trace, n, theta, avg);
  }
  return trace;
}

RunTrace run_mirror_descent(const Geometry& geom, const Regularizer& g,
                            const GradFn& grad, const StepSchedule& schedule,
                            const Vector& theta0, std::int64_t n_iters,
                            const MetricEvaluator* metrics, std::uint64_t seed_label) {
  check_start(geom, g, theta0);
  require_pair_supported(geom, g);

  RunTrace trace;
  trace.seed = seed_label;
  trace.n_iters = n_iters;

  CheckpointRecorder rec{metrics, checkpoint_grid(n_iters)};

  Vector theta = theta0;
  RunningAverage avg;

  for (std::int64_t n = 1; n <= n_iters; ++n) {
    const double gamma_n = schedule.gamma(n);
    const Vector eta = face_dual(geom, theta) - gamma_n * grad(theta);
    avg.add(theta);
    theta = composite_map(geom, g, eta, gamma_n);
    check_iterate_domain(geom, g, theta, n);
    if (rec.due(n)) rec.record(trace, n, theta, avg);
  }
  return trace;
}

}  // namespace

RunTrace run_da(const Geometry& geom, const Regularizer& g, const Objective& f,
                const StepSchedule& schedule, const Vector& theta0,
                std::int64_t n_iters, const MetricEvaluator* metrics) {
  auto grad = [&f](const Vector& t) { return f.grad(t); };
  RunTrace trace =
      run_dual_averaging(geom, g, grad, schedule, theta0, n_iters, metrics, 0);
  maybe_warn_stepsize(geom, &f, schedule, trace);
  return trace;
}

RunTrace run_sda(const Geometry& geom, const Regularizer& g, StochasticGradient& oracle,
                 const StepSchedule& schedule, const Vector& theta0,
                 std::int64_t n_iters, const MetricEvaluator* metrics,
                 std::uint64_t seed_label) {
  auto grad = [&oracle](const Vector& t) { return oracle.sample_grad(t); };
  return run_dual_averaging(geom, g, grad, schedule, theta0, n_iters, metrics,
                            seed_label);
}

RunTrace run_md(const Geometry& geom, const Regularizer& g, const Objective& f,
                const StepSchedule& schedule, const Vector& theta0,
                std::int64_t n_iters, const MetricEvaluator* metrics) {
  auto grad = [&f](const Vector& t) { return f.grad(t); };
  return run_mirror_descent(geom, g, grad, schedule, theta0, n_iters, metrics, 0);
}

RunTrace run_md(const Geometry& geom, const Regularizer& g, StochasticGradient& oracle,
                const StepSchedule& schedule, const Vector& theta0,
                std::int64_t n_iters, const MetricEvaluator* metrics,
                std::uint64_t seed_label) {
  auto grad = [&oracle](const Vector& t) { return oracle.sample_grad(t); };
  return run_mirror_descent(geom, g, grad, schedule, theta0, n_iters, metrics,
                            seed_label);
}

RunTrace run_sgd(const Regularizer& g, StochasticGradient& oracle,
                 const StepSchedule& schedule, const Vector& theta0,
                 std::int64_t n_iters, const MetricEvaluator* metrics,
                 std::uint64_t seed_label) {
  const Geometry geom = Geometry::euclidean(theta0.size());
  return run_md(geom, g, oracle, schedule, theta0, n_iters, metrics, seed_label);
}

RunTrace run_saga(const Regularizer& g, const std::vector<Vector>& xs,
                  const std::vector<double>& ys, double gamma, const Vector& theta0,
                  std::int64_t n_iters, const MetricEvaluator* metrics,
                  std::uint64_t seed, std::size_t table_cap, SagaState* final_state) {
  if (xs.empty() || xs.size() != ys.size()) {
    throw std::invalid_argument("run_saga: bad dataset");
  }
  if (xs.size() > table_cap) {
    throw std::invalid_argument("run_saga: dataset exceeds the gradient-table cap");
  }
  const std::size_t n_samples = xs.size();
  const auto n_d = static_cast<double>(n_samples);
  const Geometry geom = Geometry::euclidean(theta0.size());
  check_start(geom, g, theta0);

  if (gamma <= 0.0) {
    double l_hat = 0.0;
    for (const Vector& x : xs) l_hat = std::max(l_hat, x.squaredNorm());
    gamma = 1.0 / (3.0 * l_hat);
  }

  RunTrace trace;
  trace.seed = seed;
  trace.n_iters = n_iters;
  CheckpointRecorder rec{metrics, checkpoint_grid(n_iters)};

  // Stored gradient of sample i is residuals[i] * x_i.
  std::vector<double> residuals(n_samples);
  Vector gbar = Vector::Zero(theta0.size());
  for (std::size_t i = 0; i < n_samples; ++i) {
    residuals[i] = xs[i].dot(theta0) - ys[i];
    gbar.noalias() += residuals[i] * xs[i];
  }
  gbar /= n_d;

  RngStream rng(seed);
  Vector theta = theta0;
  RunningAverage avg;

  for (std::int64_t n = 1; n <= n_iters; ++n) {
    const auto j = static_cast<std::size_t>(rng.uniform_index(n_samples));
    const double r_new = xs[j].dot(theta) - ys[j];
    const Vector v = (r_new - residuals[j]) * xs[j] + gbar;
    avg.add(theta);
    theta = composite_map(geom, g, theta - gamma * v, gamma);
    gbar.noalias() += ((r_new - residuals[j]) / n_d) * xs[j];
    residuals[j] = r_new;
    if (rec.due(n)) rec.record(trace, n, theta, avg);
  }

  if (final_state) {
    final_state->residuals = std::move(residuals);
    final_state->table_mean = std::move(gbar);
  }
  return trace;
}

}  // namespace sda
