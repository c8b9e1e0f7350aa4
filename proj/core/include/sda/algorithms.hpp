#pragma once

#include "sda/problems.hpp"

#include <cstdint>

namespace sda {

/// Constant gamma or decaying gamma_n = C / sqrt(n).
struct StepSchedule {
  enum class Kind { kConstant, kDecaying };

  static StepSchedule constant(double gamma);
  static StepSchedule decaying(double c);

  double gamma(std::int64_t n) const;  // n >= 1

  Kind kind = Kind::kConstant;
  double value = 0.0;
};

/// Scores iterates against a certified optimum. f may be null (pure
/// regularizer objectives); sigma may be null (no Mahalanobis metric).
struct MetricEvaluator {
  const Objective* f = nullptr;
  const Regularizer* g = nullptr;
  Vector theta_star;
  double psi_star = 0.0;
  const SpdMatrix* sigma = nullptr;

  double psi(const Vector& theta) const;
  double psi_gap(const Vector& theta) const { return psi(theta) - psi_star; }
  double mahalanobis_gap_sq(const Vector& theta) const;
};

struct TracePoint {
  std::int64_t n = 0;
  std::uint64_t theta_hash = 0;
  double psi_gap_avg = 0.0;     // psi(avg theta_n) - psi*
  double psi_gap_last = 0.0;    // psi(theta_n) - psi*
  double mahal_sq_avg = 0.0;    // 1/2 ||avg theta_n - theta*||_Sigma^2
  double wall_seconds = 0.0;
  Vector theta;                 // iterate snapshot
  Vector theta_avg;             // running average snapshot
};

struct RunTrace {
  std::vector<TracePoint> points;
  std::uint64_t seed = 0;
  std::int64_t n_iters = 0;
  bool stepsize_warning = false;
};

// Geometric checkpoint grid {1, 2, 4, ...} plus the final iteration.
std::vector<std::int64_t> checkpoint_grid(std::int64_t n_iters);

/// Running average of theta_0 .. theta_{n-1} (the Polyak average the bounds
/// are stated for). Compensated summation keeps the accumulated error far
/// below the metric tolerances even over 1e7 iterates.
class RunningAverage {
 public:
  void add(const Vector& v);
  Vector mean() const;
  std::int64_t count() const { return count_; }

 private:
  Vector sum_;
  Vector comp_;  // Kahan compensation
  std::int64_t count_ = 0;
};

// grad h(theta), extended by the limit value 0 at theta = 0 for the lp
// geometry so runs may start from the origin.
Vector dual_start(const Geometry& geom, const Vector& theta0);

// grad h extended to simplex faces: entropy coordinates at exact zero map to
// -inf, which the normalized exponential turns back into exact zeros (the
// exponentiated-gradient step keeps a vanished coordinate at zero).
Vector face_dual(const Geometry& geom, const Vector& theta);

/// Deterministic dual averaging (constant step):
///   eta_n = eta_{n-1} - gamma grad f(theta_{n-1}),
///   theta_n = composite_map(eta_n, n gamma).
/// Warns (does not reject) when gamma exceeds the certified maximum.
RunTrace run_da(const Geometry& geom, const Regularizer& g, const Objective& f,
                const StepSchedule& schedule, const Vector& theta0,
                std::int64_t n_iters, const MetricEvaluator* metrics = nullptr);

/// Stochastic dual averaging; with a decaying schedule the composite weight
/// is the cumulative step sum tau_n = sum_{k<=n} gamma_k.
RunTrace run_sda(const Geometry& geom, const Regularizer& g, StochasticGradient& oracle,
                 const StepSchedule& schedule, const Vector& theta0,
                 std::int64_t n_iters, const MetricEvaluator* metrics = nullptr,
                 std::uint64_t seed_label = 0);

/// Composite mirror descent:
///   theta_n = argmin { gamma <g_n, t> + gamma g(t) + D_h(t, theta_{n-1}) }
///           = composite_map(grad h(theta_{n-1}) - gamma g_n, gamma).
RunTrace run_md(const Geometry& geom, const Regularizer& g, const Objective& f,
                const StepSchedule& schedule, const Vector& theta0,
                std::int64_t n_iters, const MetricEvaluator* metrics = nullptr);
RunTrace run_md(const Geometry& geom, const Regularizer& g, StochasticGradient& oracle,
                const StepSchedule& schedule, const Vector& theta0,
                std::int64_t n_iters, const MetricEvaluator* metrics = nullptr,
                std::uint64_t seed_label = 0);

/// Averaged proximal/projected SGD (Euclidean geometry only):
///   theta_n = Prox_{gamma_n g}(theta_{n-1} - gamma_n g_n).
RunTrace run_sgd(const Regularizer& g, StochasticGradient& oracle,
                 const StepSchedule& schedule, const Vector& theta0,
                 std::int64_t n_iters, const MetricEvaluator* metrics = nullptr,
                 std::uint64_t seed_label = 0);

struct SagaState {
  std::vector<double> residuals;  // stored scalar residual per sample
  Vector table_mean;              // running mean of stored gradients
};

/// Proximal SAGA on the finite least-squares sum 1/N sum_i 1/2(<x_i,t>-y_i)^2
/// + g. gamma <= 0 selects the default 1/(3 max_i ||x_i||^2).
RunTrace run_saga(const Regularizer& g, const std::vector<Vector>& xs,
                  const std::vector<double>& ys, double gamma, const Vector& theta0,
                  std::int64_t n_iters, const MetricEvaluator* metrics = nullptr,
                  std::uint64_t seed = 0, std::size_t table_cap = (1u << 24),
                  SagaState* final_state = nullptr);

}  // namespace sda
