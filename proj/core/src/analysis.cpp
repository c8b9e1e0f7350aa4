#include "sda/analysis.hpp"

#include <cmath>
#include <iostream>

namespace sda {

double bound_deterministic(double dh, double gamma, std::int64_t n) {
  if (!(gamma > 0.0) || n < 0) {
    throw std::invalid_argument("bound_deterministic: need gamma > 0 and n >= 0");
  }
  return dh / (gamma * static_cast<double>(n + 1));
}

double bound_deterministic_linear(double dh, double gamma, double mu, std::int64_t n) {
  const double gm = gamma * mu;
  if (!(gm > 0.0) || gm > 1.0) {
    throw std::invalid_argument("bound_deterministic_linear: need 0 < gamma mu <= 1");
  }
  return std::pow(1.0 - gm, static_cast<double>(n)) * dh / gamma;
}

double bound_additive_noise(const BoundInputs& in) {
  if (in.n < 1) throw std::invalid_argument("bound_additive_noise: n must be >= 1");
  const double gn = in.gamma * static_cast<double>(in.n);
  double bias = in.dh0 / gn;
  if (in.dual_distance_sq) {
    bias = std::min(bias, *in.dual_distance_sq / (gn * gn));
  }
  return 2.0 * bias + 4.0 / static_cast<double>(in.n) * in.tr_sigma_inv_c;
}

double bound_least_squares(const BoundInputs& in) {
  if (in.n < 1) throw std::invalid_argument("bound_least_squares: n must be >= 1");
  const double cap = 1.0 / (4.0 * in.kappa * in.l_smooth * in.d);
  if (in.gamma > cap * (1.0 + 1e-12)) {
    std::cerr << "warning: bound_least_squares evaluated with gamma " << in.gamma
              << " above the proven range 1/(4 kappa L d) = " << cap << "\n";
  }
  const double n = static_cast<double>(in.n);
  return 2.0 * in.dh0 / (in.gamma * n) +
         32.0 * in.d / n * (in.sigma_sq + in.kappa * in.dist_opt_sq) +
         16.0 * in.kappa * in.d / (n * n) * (5.0 * in.dh0 / in.gamma + in.g_theta0);
}

double bound_least_squares_general(const BoundInputs& in) {
  if (in.n < 1) throw std::invalid_argument("bound_least_squares_general: n must be >= 1");
  if (!(in.mu_b > 0.0)) {
    throw std::invalid_argument("bound_least_squares_general: mu_b must be positive");
  }
  const double n = static_cast<double>(in.n);
  const double kd = in.kappa * in.d;
  return 2.0 * in.dh0 / (in.gamma * n) + 24.0 / n * in.tr_sigma_inv_c +
         16.0 * kd * in.gamma / (n * in.mu_b) * in.tr_c_sigma_minus_b +
         8.0 * kd / n *
             (4.0 * in.kappa * in.gamma * in.tr_sigma_one_minus_b / in.mu_b + 3.0) *
             in.dist_opt_sq +
         80.0 * kd / (in.gamma * n * n) * in.dh0 +
         16.0 * kd / (n * n) * in.g_theta0;
}

Vector LowerBoundInstance::a_diagonal() const {
  if (d < 2) throw std::invalid_argument("LowerBoundInstance: d must be >= 2");
  Vector diag = Vector::Constant(d, l_smooth);
  diag(d - 1) = mu();
  return diag;
}

double lower_bound_exact(const LowerBoundInstance& inst, std::int64_t n) {
  if (n < 1) throw std::invalid_argument("lower_bound_exact: n must be >= 1");
  const double gamma = inst.gamma;
  const double l = inst.l_smooth;
  const double m = inst.mu();
  // suffix sums S_a(j) = sum_{k=j}^n 1/(1 + gamma a k)
  double suffix_l = 0.0, suffix_m = 0.0;
  double total = 0.0;
  for (std::int64_t j = n; j >= 1; --j) {
    const double k = static_cast<double>(j);
    suffix_l += 1.0 / (1.0 + gamma * l * k);
    suffix_m += 1.0 / (1.0 + gamma * m * k);
    total += static_cast<double>(inst.d - 1) * l * suffix_l * suffix_l +
             m * suffix_m * suffix_m;
  }
  const double nn = static_cast<double>(n);
  return gamma * gamma * inst.sigma * inst.sigma * l / (nn * nn) * total;
}

double lower_bound_floor(const LowerBoundInstance& inst, std::int64_t n) {
  const double nn = static_cast<double>(n);
  const double m = inst.mu();
  return inst.sigma * inst.sigma * inst.l_smooth / 12.0 *
         std::min(nn * m * inst.gamma * inst.gamma, 1.0 / (m * nn));
}

std::vector<std::tuple<std::int64_t, double, double>> lower_bound_monte_carlo_grid(
    const LowerBoundInstance& inst, const std::vector<std::int64_t>& grid, int n_seeds,
    std::uint64_t base_seed) {
  if (n_seeds < 2) throw std::invalid_argument("lower_bound_monte_carlo: need >= 2 seeds");
  if (grid.empty()) throw std::invalid_argument("lower_bound_monte_carlo: empty grid");
  const Vector diag = inst.a_diagonal();
  const double noise_scale = inst.sigma * std::sqrt(inst.l_smooth);
  const std::int64_t n_max = grid.back();

  // The stochastic recursion with f = 0 and quadratic g has the closed primal
  // map theta_k = (I + gamma k A)^{-1} eta_k coordinatewise; the quadratic
  // form of the average of theta_1..theta_k is recorded at each grid point.
  std::vector<double> sum(grid.size(), 0.0), sum_sq(grid.size(), 0.0);
  for (int s = 0; s < n_seeds; ++s) {
    RngStream rng(RngStream::derived_seed(base_seed, static_cast<std::uint64_t>(s)));
    Vector eta = Vector::Zero(inst.d);
    Vector avg_sum = Vector::Zero(inst.d);
    std::size_t gi = 0;
    for (std::int64_t k = 1; k <= n_max; ++k) {
      for (int i = 0; i < inst.d; ++i) eta(i) -= inst.gamma * noise_scale * rng.gaussian();
      const double gk = inst.gamma * static_cast<double>(k);
      for (int i = 0; i < inst.d; ++i) avg_sum(i) += eta(i) / (1.0 + gk * diag(i));
      if (gi < grid.size() && grid[gi] == k) {
        const Vector avg = avg_sum / static_cast<double>(k);
        double val = 0.0;
        for (int i = 0; i < inst.d; ++i) val += diag(i) * avg(i) * avg(i);
        sum[gi] += val;
        sum_sq[gi] += val * val;
        ++gi;
      }
    }
  }
  std::vector<std::tuple<std::int64_t, double, double>> out;
  out.reserve(grid.size());
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const double mean = sum[gi] / n_seeds;
    const double var = (sum_sq[gi] - n_seeds * mean * mean) / (n_seeds - 1);
    out.emplace_back(grid[gi], mean, std::sqrt(std::max(0.0, var) / n_seeds));
  }
  return out;
}

std::pair<double, double> lower_bound_monte_carlo(const LowerBoundInstance& inst,
                                                  std::int64_t n, int n_seeds,
                                                  std::uint64_t base_seed) {
  const auto rows = lower_bound_monte_carlo_grid(inst, {n}, n_seeds, base_seed);
  return {std::get<1>(rows[0]), std::get<2>(rows[0])};
}

ClosedFormIterates closed_form_md_da(double nu, double gamma, const Vector& theta0,
                                     const Vector& theta_star, std::int64_t n) {
  if (!(nu > 0.0) || !(gamma > 0.0)) {
    throw std::invalid_argument("closed_form_md_da: nu and gamma must be positive");
  }
  const double gn = gamma * nu;
  ClosedFormIterates out;
  out.md = theta_star + (theta0 - theta_star) / std::pow(1.0 + gn, static_cast<double>(n));
  const double t = gn * static_cast<double>(n);
  out.da = (theta0 + t * theta_star) / (1.0 + t);
  return out;
}

std::vector<MetricRow> compute_metrics(const RunTrace& trace, const MetricEvaluator& eval,
                                       const Vector& theta0, bool normalized) {
  std::vector<MetricRow> rows;
  rows.reserve(trace.points.size());
  double psi_base = 1.0, mahal_base = 1.0;
  if (normalized) {
    psi_base = eval.psi_gap(theta0);
    mahal_base = eval.mahalanobis_gap_sq(theta0);
  }
  for (const TracePoint& pt : trace.points) {
    MetricRow row;
    row.n = pt.n;
    row.psi_gap_avg = eval.psi_gap(pt.theta_avg) / psi_base;
    row.psi_gap_last = eval.psi_gap(pt.theta) / psi_base;
    row.mahal_sq_avg = eval.mahalanobis_gap_sq(pt.theta_avg) / mahal_base;
    rows.push_back(row);
  }
  return rows;
}

double slope_estimate(const std::vector<std::pair<std::int64_t, double>>& series,
                      std::int64_t n_lo, std::int64_t n_hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (const auto& [n, v] : series) {
    if (n < n_lo || n > n_hi) continue;
    if (!(v > 0.0)) {
      throw std::invalid_argument("slope_estimate: values must be positive");
    }
    const double x = std::log(static_cast<double>(n));
    const double y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 3) throw std::invalid_argument("slope_estimate: need >= 3 points in window");
  const double denom = count * sxx - sx * sx;
  if (denom <= 0.0) throw std::invalid_argument("slope_estimate: degenerate window");
  return (count * sxy - sx * sy) / denom;
}

double smoothness_ratio(const Regularizer& g, const SpdMatrix& sigma) {
  if (g.kind() == RegularizerKind::kZero) return 0.0;
  if (g.kind() != RegularizerKind::kQuadraticL2) {
    throw std::invalid_argument("smoothness_ratio: regularizer must be quadratic");
  }
  if (!g.has_matrix()) {
    return g.nu() / sigma.min_eigenvalue();
  }
  const Matrix half_inv = sigma.power(-0.5);
  const Matrix m = half_inv * g.q_matrix().dense() * half_inv;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  return solver.eigenvalues().maxCoeff();
}

}  // namespace sda
