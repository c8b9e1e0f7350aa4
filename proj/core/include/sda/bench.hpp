#pragma once

#include "sda/analysis.hpp"
#include "sda/odeflow.hpp"

#include <map>
#include <string>

namespace sda {

struct AlgoSpec {
  std::string algo;      // da | sda | sgd | md | saga
  std::string schedule;  // constant | decaying
};

/// Flat experiment description; file form is `key=value` lines, command-line
/// flags override. Unset numeric fields (0) resolve to per-kind defaults.
struct ExperimentConfig {
  std::string kind = "synthetic";  // synthetic|dataset|lowerbound|ode|bounds
  int d = 0;
  std::int64_t iters = 0;
  int reps = 0;
  std::uint64_t seed = 1;
  std::string out_dir;
  std::string geometry = "euclidean";  // euclidean | entropy | lp:<p>
  std::string regularizer;             // none|simplex:<r>|l1:<l>|l2:<nu>|ball:<r>
  std::vector<AlgoSpec> algos;
  double gamma = 0.0;  // constant step / decaying constant; 0 -> 1/(2 R^2)
  bool quick = false;
  int threads = 0;  // 0 -> BENCH_THREADS env or hardware parallelism
  std::string data_path;
  // lower-bound experiment
  double lb_l = 1.0;
  double lb_sigma = 1.0;
  // ode experiment
  double ode_dt = 1e-3;
  double ode_tend = 10.0;
  double ode_nu = 1.0;
};

ExperimentConfig read_config_file(const std::string& path);
void apply_override(ExperimentConfig& config, const std::string& key,
                    const std::string& value);
// Fills per-kind defaults (dimensions, iteration counts, algorithms).
void resolve_defaults(ExperimentConfig& config);
// The fully-resolved `key=value` echo written next to the results.
std::string resolved_config_text(const ExperimentConfig& config);

Geometry geometry_from_string(const std::string& s, Eigen::Index d);
// d sizes the center of the quadratic variant.
Regularizer regularizer_from_string(const std::string& s, Eigen::Index d);

struct ResultRow {
  std::string algorithm;
  std::string schedule;
  std::int64_t n = 0;
  std::string metric;
  double mean = 0.0;
  std::optional<double> stderr_value;  // absent for < 2 replications
  std::vector<double> raw;             // per-replication values (not serialized)
};

struct ResultTable {
  std::string experiment;
  std::string geometry;
  std::string regularizer;
  std::uint64_t seed_base = 0;
  int replications = 0;
  std::vector<ResultRow> rows;
};

/// Runs the configured experiment; when out_dir is set, writes results.csv,
/// convergence.svg and config.resolved there. theta* is computed once and all
/// algorithms are scored against the same certificate.
ResultTable run_experiment(const ExperimentConfig& config);

// Schema: experiment,algorithm,schedule,geometry,regularizer,seed_base,
// replications,n,metric,mean,stderr with shortest round-trip floats, rows
// sorted by (algorithm, n, metric).
void emit_csv(const ResultTable& table, const std::string& path);
ResultTable parse_csv(const std::string& path);

// Self-contained two-panel log-log SVG, one curve per (algorithm, schedule).
void emit_plot(const ResultTable& table, const std::string& path);

// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

}  // namespace sda
