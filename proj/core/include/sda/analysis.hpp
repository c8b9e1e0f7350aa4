#pragma once

#include "sda/algorithms.hpp"

#include <optional>
#include <utility>

namespace sda {

/// Ingredients of the convergence bounds. Only the fields a given evaluator
/// reads need to be populated.
struct BoundInputs {
  double dh0 = 0.0;     // D_h(theta*, theta_0)
  double gamma = 0.0;
  std::int64_t n = 0;
  // ||grad h(theta_0) - grad h(theta*)||^2_{Sigma^{-1}}; absent -> +inf side
  // of the min is ignored.
  std::optional<double> dual_distance_sq;
  double tr_sigma_inv_c = 0.0;       // tr Sigma^{-1} C
  double tr_c_sigma_minus_b = 0.0;   // tr C Sigma^{-b}
  double tr_sigma_one_minus_b = 0.0; // tr Sigma^{1-b}
  double sigma_sq = 0.0;             // statistical noise level
  double kappa = 3.0;                // kurtosis constant (Gaussian: 3)
  int d = 0;
  double l_smooth = 0.0;             // L with L h - 1/2||.||_Sigma^2 convex
  double mu_b = 0.0;                 // h - mu_b/2 ||.||_{Sigma^b}^2 convex
  double b = 1.0;
  double g_theta0 = 0.0;
  double dist_opt_sq = 0.0;          // ||theta* - theta_Sigma||_Sigma^2
};

// Deterministic composite rate: dh / (gamma (n+1)).
double bound_deterministic(double dh, double gamma, std::int64_t n);
// Linear rate under relative strong convexity: (1 - gamma mu)^n dh / gamma.
double bound_deterministic_linear(double dh, double gamma, double mu, std::int64_t n);
// Additive-noise averaged bound:
//   2 min{ dh/(gamma n); dual/(gamma n)^2 } + (4/n) tr Sigma^{-1} C.
double bound_additive_noise(const BoundInputs& in);
// Least-squares averaged bound (warns when gamma > 1/(4 kappa L d)):
//   2 dh/(gamma n) + (32 d / n)(sigma^2 + kappa dist^2)
//   + (16 kappa d / n^2)(5 dh / gamma + g(theta_0)).
double bound_least_squares(const BoundInputs& in);
// General-b variant of the least-squares bound.
double bound_least_squares_general(const BoundInputs& in);

/// Worst-case instance for averaged constant-step SDA on a quadratic
/// regularizer: A = diag(L, ..., L, mu) with mu = L / horizon, noise
/// covariance sigma^2 L I.
struct LowerBoundInstance {
  int d = 2;
  double l_smooth = 1.0;
  double gamma = 1.0;
  double sigma = 1.0;
  std::int64_t horizon = 1;

  double mu() const { return l_smooth / static_cast<double>(horizon); }
  Vector a_diagonal() const;
};

// Exact E <avg theta_n, A avg theta_n> by suffix-summed double summation.
double lower_bound_exact(const LowerBoundInstance& inst, std::int64_t n);
// (sigma^2 L / 12) min{ n mu gamma^2, 1/(mu n) }.
double lower_bound_floor(const LowerBoundInstance& inst, std::int64_t n);
// Monte Carlo estimate of the same expectation by direct simulation of the
// diagonal SDA recursion; returns (mean, stderr).
std::pair<double, double> lower_bound_monte_carlo(const LowerBoundInstance& inst,
                                                  std::int64_t n, int n_seeds,
                                                  std::uint64_t base_seed);
// Same simulation recorded at several checkpoints: (n, mean, stderr) rows.
std::vector<std::tuple<std::int64_t, double, double>> lower_bound_monte_carlo_grid(
    const LowerBoundInstance& inst, const std::vector<std::int64_t>& grid, int n_seeds,
    std::uint64_t base_seed);

/// Closed forms for f = 0, g = nu/2 ||t - t*||^2, Euclidean h:
///   MD contracts by 1/(1 + gamma nu) per step; DA follows
///   (theta_0 + gamma nu n t*) / (gamma nu n + 1).
struct ClosedFormIterates {
  Vector md;
  Vector da;
};
ClosedFormIterates closed_form_md_da(double nu, double gamma, const Vector& theta0,
                                     const Vector& theta_star, std::int64_t n);

struct MetricRow {
  std::int64_t n = 0;
  double psi_gap_avg = 0.0;
  double psi_gap_last = 0.0;
  double mahal_sq_avg = 0.0;
};

// Recomputes the per-checkpoint metrics from the stored iterate snapshots;
// `normalized` divides each column by its value at theta_0.
std::vector<MetricRow> compute_metrics(const RunTrace& trace,
                                       const MetricEvaluator& eval,
                                       const Vector& theta0, bool normalized = false);

// Least-squares slope of log(value) against log(n) over checkpoints with
// n_lo <= n <= n_hi (needs >= 3 points).
double slope_estimate(const std::vector<std::pair<std::int64_t, double>>& series,
                      std::int64_t n_lo, std::int64_t n_hi);

// Smallest L_g with L_g f - g convex for a quadratic f and QuadraticL2 g:
// lambda_max(Sigma^{-1/2} Q Sigma^{-1/2}).
double smoothness_ratio(const Regularizer& g, const SpdMatrix& sigma);

}  // namespace sda
