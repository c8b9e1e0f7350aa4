#include "sda/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

namespace sda {

namespace {

constexpr double kCertTol = 1e-10;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string("cannot parse number for ") + what + ": '" +
                                s + "'");
  }
}

std::string algos_to_string(const std::vector<AlgoSpec>& algos) {
  std::string s;
  for (std::size_t i = 0; i < algos.size(); ++i) {
    if (i) s += ",";
    s += algos[i].algo + ":" + algos[i].schedule;
  }
  return s;
}

std::vector<AlgoSpec> algos_from_string(const std::string& s) {
  std::vector<AlgoSpec> out;
  if (trim(s).empty()) return out;
  for (const std::string& part : split(s, ',')) {
    const auto bits = split(trim(part), ':');
    AlgoSpec spec;
    spec.algo = bits[0];
    spec.schedule = bits.size() > 1 ? bits[1] : "constant";
    if (spec.algo != "da" && spec.algo != "sda" && spec.algo != "sgd" &&
        spec.algo != "md" && spec.algo != "saga") {
      throw std::invalid_argument("unknown algorithm '" + spec.algo + "'");
    }
    if (spec.schedule != "constant" && spec.schedule != "decaying") {
      throw std::invalid_argument("unknown schedule '" + spec.schedule + "'");
    }
    out.push_back(std::move(spec));
  }
  return out;
}

int resolve_thread_count(const ExperimentConfig& config) {
  if (config.threads > 0) return config.threads;
  if (const char* env = std::getenv("BENCH_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) return t;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs fn(0..jobs-1) on a small pool; results must be written to per-index
// slots so completion order cannot matter. The first failure aborts the
// whole experiment.
void parallel_jobs(int jobs, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, jobs));
  if (threads == 1) {
    for (int j = 0; j < jobs; ++j) fn(j);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const int j = next.fetch_add(1);
      if (j >= jobs) return;
      try {
        fn(j);
      } catch (...) {
        std::lock_guard<std::mutex> lk(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

struct SeriesKey {
  std::string algorithm;
  std::string schedule;
};

// Collects the per-replication metric values at every checkpoint and turns
// them into mean/stderr rows.
void aggregate_traces(ResultTable& table, const SeriesKey& key,
                      const std::vector<RunTrace>& traces) {
  if (traces.empty()) return;
  const std::size_t n_points = traces.front().points.size();
  for (const RunTrace& t : traces) {
    if (t.points.size() != n_points) {
      throw std::logic_error("aggregate_traces: ragged traces");
    }
  }
  const char* metric_names[3] = {"psi_gap_avg", "psi_gap_last", "mahal_sq_avg"};
  for (std::size_t p = 0; p < n_points; ++p) {
    for (int m = 0; m < 3; ++m) {
      ResultRow row;
      row.algorithm = key.algorithm;
      row.schedule = key.schedule;
      row.n = traces.front().points[p].n;
      row.metric = metric_names[m];
      row.raw.reserve(traces.size());
      for (const RunTrace& t : traces) {
        const TracePoint& pt = t.points[p];
        const double v = m == 0 ? pt.psi_gap_avg : (m == 1 ? pt.psi_gap_last : pt.mahal_sq_avg);
        row.raw.push_back(v);
      }
      double sum = 0.0;
      for (double v : row.raw) sum += v;
      row.mean = sum / static_cast<double>(row.raw.size());
      if (row.raw.size() >= 2) {
        double ss = 0.0;
        for (double v : row.raw) ss += (v - row.mean) * (v - row.mean);
        row.stderr_value =
            std::sqrt(ss / static_cast<double>(row.raw.size() - 1) /
                      static_cast<double>(row.raw.size()));
      }
      table.rows.push_back(std::move(row));
    }
  }
}

void sort_rows(ResultTable& table) {
  std::stable_sort(table.rows.begin(), table.rows.end(),
                   [](const ResultRow& a, const ResultRow& b) {
                     if (a.algorithm != b.algorithm) return a.algorithm < b.algorithm;
                     if (a.n != b.n) return a.n < b.n;
                     return a.metric < b.metric;
                   });
}

void write_outputs(const ExperimentConfig& config, const ResultTable& table) {
  if (config.out_dir.empty()) return;
  std::filesystem::create_directories(config.out_dir);
  emit_csv(table, config.out_dir + "/results.csv");
  emit_plot(table, config.out_dir + "/convergence.svg");
  std::ofstream cfg(config.out_dir + "/config.resolved");
  cfg << resolved_config_text(config);
}

// ---------------------------------------------------------------------------
// synthetic / dataset experiments

struct TraceExperiment {
  Geometry geom;
  Regularizer reg;
  QuadraticProblem problem;
  OptimumCertificate certificate;
  double gamma;
  Vector theta0;
};

RunTrace run_one(const TraceExperiment& exp, const AlgoSpec& algo,
                 const MetricEvaluator& eval, StochasticGradient& oracle,
                 std::int64_t iters, std::uint64_t rep_seed) {
  const StepSchedule schedule = algo.schedule == "constant"
                                    ? StepSchedule::constant(exp.gamma)
                                    : StepSchedule::decaying(exp.gamma);
  if (algo.algo == "sda") {
    return run_sda(exp.geom, exp.reg, oracle, schedule, exp.theta0, iters, &eval,
                   rep_seed);
  }
  if (algo.algo == "sgd") {
    if (exp.geom.kind() != GeometryKind::kEuclidean) {
      throw std::invalid_argument("sgd requires the euclidean geometry");
    }
    return run_sgd(exp.reg, oracle, schedule, exp.theta0, iters, &eval, rep_seed);
  }
  if (algo.algo == "md") {
    return run_md(exp.geom, exp.reg, oracle, schedule, exp.theta0, iters, &eval,
                  rep_seed);
  }
  if (algo.algo == "da") {
    return run_da(exp.geom, exp.reg, exp.problem, schedule, exp.theta0, iters, &eval);
  }
  throw std::invalid_argument("algorithm '" + algo.algo + "' not valid here");
}

ResultTable run_synthetic(const ExperimentConfig& config) {
  SyntheticInstance inst = generate_synthetic(config.d, config.seed);

  Regularizer reg = config.regularizer.empty()
                        ? Regularizer::simplex(0.5 * inst.problem.theta_sigma().lpNorm<1>())
                        : regularizer_from_string(config.regularizer, config.d);
  Geometry geom = geometry_from_string(config.geometry, config.d);
  require_pair_supported(geom, reg);

  const double r_sq = inst.problem.sigma().trace();
  const double gamma = config.gamma > 0.0 ? config.gamma : 1.0 / (2.0 * r_sq);

  TraceExperiment exp{geom,
                      reg,
                      inst.problem,
                      compute_optimum(inst.problem, reg, geom, kCertTol),
                      gamma,
                      default_start(geom, reg)};
  MetricEvaluator eval{&exp.problem, &exp.reg, exp.certificate.theta_star,
                       exp.certificate.psi_min, &exp.problem.sigma()};

  ResultTable table;
  table.experiment = "synthetic";
  table.geometry = config.geometry;
  table.regularizer = config.regularizer.empty()
                          ? "simplex:" + format_double(reg.radius())
                          : config.regularizer;
  table.seed_base = config.seed;
  table.replications = config.reps;

  // echo the resolved values so config.resolved is fully concrete
  ExperimentConfig resolved = config;
  resolved.gamma = gamma;
  resolved.regularizer = table.regularizer;

  const int threads = resolve_thread_count(config);
  for (const AlgoSpec& algo : config.algos) {
    if (algo.algo == "saga") {
      throw std::invalid_argument("saga needs a finite dataset; use the dataset kind");
    }
    std::vector<RunTrace> traces(static_cast<std::size_t>(config.reps));
    parallel_jobs(config.reps, threads, [&](int rep) {
      const std::uint64_t rep_seed =
          RngStream::derived_seed(config.seed, static_cast<std::uint64_t>(rep));
      try {
        LeastSquaresStream oracle = inst.make_stream(rep_seed);
        traces[static_cast<std::size_t>(rep)] =
            run_one(exp, algo, eval, oracle, config.iters, rep_seed);
      } catch (const std::exception& e) {
        throw std::runtime_error("replication " + std::to_string(rep) + " (seed " +
                                 std::to_string(rep_seed) + ") failed: " + e.what());
      }
    });
    aggregate_traces(table, {algo.algo, algo.schedule}, traces);
  }
  sort_rows(table);
  write_outputs(resolved, table);
  return table;
}

// Drops all-zero feature columns so the empirical covariance can be pd.
Dataset compact_columns(const Dataset& data, std::vector<Eigen::Index>& mapping) {
  std::vector<bool> active(static_cast<std::size_t>(data.dim), false);
  for (const Vector& x : data.xs) {
    for (Eigen::Index i = 0; i < data.dim; ++i) {
      if (x(i) != 0.0) active[static_cast<std::size_t>(i)] = true;
    }
  }
  mapping.clear();
  for (Eigen::Index i = 0; i < data.dim; ++i) {
    if (active[static_cast<std::size_t>(i)]) mapping.push_back(i);
  }
  Dataset out;
  out.dim = static_cast<Eigen::Index>(mapping.size());
  for (const Vector& x : data.xs) {
    Vector row(out.dim);
    for (Eigen::Index j = 0; j < out.dim; ++j) row(j) = x(mapping[static_cast<std::size_t>(j)]);
    out.xs.push_back(std::move(row));
  }
  out.ys = data.ys;
  return out;
}

ResultTable run_dataset(const ExperimentConfig& config) {
  if (config.data_path.empty()) {
    throw std::invalid_argument("dataset experiment needs --data <libsvm file>");
  }
  Dataset raw = load_libsvm(config.data_path);
  Dataset filtered = remove_outliers(raw);
  auto [train, test] = train_test_split(filtered, config.seed);
  if (train.size() < 2) throw std::invalid_argument("dataset too small after split");

  std::vector<Eigen::Index> mapping;
  Dataset compact = compact_columns(train, mapping);

  QuadraticProblem problem = empirical_quadratic(compact);
  Regularizer reg = config.regularizer.empty()
                        ? Regularizer::l1(0.01)
                        : regularizer_from_string(config.regularizer, compact.dim);
  Geometry geom = geometry_from_string(config.geometry, compact.dim);
  require_pair_supported(geom, reg);

  const double r_sq = problem.sigma().trace();
  const double gamma = config.gamma > 0.0 ? config.gamma : 1.0 / (2.0 * r_sq);

  TraceExperiment exp{geom,
                      reg,
                      problem,
                      compute_optimum(problem, reg, geom, kCertTol),
                      gamma,
                      default_start(geom, reg)};
  MetricEvaluator eval{&exp.problem, &exp.reg, exp.certificate.theta_star,
                       exp.certificate.psi_min, &exp.problem.sigma()};

  auto xs = std::make_shared<const std::vector<Vector>>(compact.xs);
  auto ys = std::make_shared<const std::vector<double>>(compact.ys);

  ResultTable table;
  table.experiment = "dataset";
  table.geometry = config.geometry;
  table.regularizer = config.regularizer.empty() ? "l1:0.01" : config.regularizer;
  table.seed_base = config.seed;
  table.replications = config.reps;

  ExperimentConfig resolved = config;
  resolved.gamma = gamma;
  resolved.regularizer = table.regularizer;

  const int threads = resolve_thread_count(config);
  for (const AlgoSpec& algo : config.algos) {
    std::vector<RunTrace> traces(static_cast<std::size_t>(config.reps));
    parallel_jobs(config.reps, threads, [&](int rep) {
      const std::uint64_t rep_seed =
          RngStream::derived_seed(config.seed, static_cast<std::uint64_t>(rep));
      try {
        if (algo.algo == "saga") {
          traces[static_cast<std::size_t>(rep)] =
              run_saga(exp.reg, *xs, *ys, config.gamma, exp.theta0, config.iters, &eval,
                       rep_seed);
        } else {
          LeastSquaresStream oracle = LeastSquaresStream::finite(xs, ys, rep_seed);
          traces[static_cast<std::size_t>(rep)] =
              run_one(exp, algo, eval, oracle, config.iters, rep_seed);
        }
      } catch (const std::exception& e) {
        throw std::runtime_error("replication " + std::to_string(rep) + " (seed " +
                                 std::to_string(rep_seed) + ") failed: " + e.what());
      }
    });
    aggregate_traces(table, {algo.algo, algo.schedule}, traces);
  }
  sort_rows(table);
  write_outputs(resolved, table);
  return table;
}

// ---------------------------------------------------------------------------
// lower-bound experiment

ResultTable run_lowerbound(const ExperimentConfig& config) {
  LowerBoundInstance inst;
  inst.d = std::max(2, config.d);
  inst.l_smooth = config.lb_l;
  inst.sigma = config.lb_sigma;
  inst.gamma = config.gamma > 0.0 ? config.gamma : 1.0;
  inst.horizon = config.iters;

  ResultTable table;
  table.experiment = "lowerbound";
  table.geometry = "euclidean";
  table.regularizer = "l2:quadratic";
  table.seed_base = config.seed;
  table.replications = config.reps;

  const auto grid = checkpoint_grid(inst.horizon);
  for (std::int64_t n : grid) {
    table.rows.push_back(
        {"sda", "constant", n, "lower_exact", lower_bound_exact(inst, n), {}, {}});
    table.rows.push_back(
        {"sda", "constant", n, "lower_floor", lower_bound_floor(inst, n), {}, {}});
  }
  const auto mc = lower_bound_monte_carlo_grid(inst, grid, config.reps, config.seed);
  for (const auto& [n, mean, se] : mc) {
    table.rows.push_back({"sda", "constant", n, "lower_mc", mean, se, {}});
  }
  sort_rows(table);
  write_outputs(config, table);
  return table;
}

// ---------------------------------------------------------------------------
// ode experiment

ResultTable run_ode(const ExperimentConfig& config) {
  SyntheticInstance inst = generate_synthetic(config.d, config.seed);
  const Geometry geom = geometry_from_string(config.geometry, config.d);

  FlowSpec spec;
  spec.geom = geom;
  spec.f = &inst.problem;
  spec.g = Regularizer::quadratic_l2(config.ode_nu, Vector::Zero(config.d));
  spec.t_end = config.ode_tend;
  spec.dt = config.ode_dt;
  spec.theta0 = geom.kind() == GeometryKind::kNegativeEntropy
                    ? Vector(Vector::Constant(config.d, 1.0 / config.d))
                    : Vector(Vector::Ones(config.d));

  const Vector opt = flow_optimum(spec);
  spec.theta_star = opt;

  ResultTable table;
  table.experiment = "ode";
  table.geometry = config.geometry;
  table.regularizer = "l2:" + format_double(config.ode_nu);
  table.seed_base = config.seed;
  table.replications = 1;

  auto add_flow = [&](const char* name, const FlowTrace& trace) {
    // subsample to at most 128 rows
    const std::size_t stride = std::max<std::size_t>(1, trace.samples.size() / 128);
    std::int64_t row = 0;
    for (std::size_t i = 0; i < trace.samples.size(); i += stride) {
      const FlowSample& s = trace.samples[i];
      ++row;
      table.rows.push_back({name, "flow", row, "time", s.t, {}, {}});
      table.rows.push_back({name, "flow", row, "lyapunov", s.lyapunov, {}, {}});
      table.rows.push_back(
          {name, "flow", row, "dist_sq", (s.theta - opt).squaredNorm(), {}, {}});
    }
  };
  add_flow("md_flow", integrate_md_flow(spec));
  add_flow("da_flow", integrate_da_flow(spec));
  sort_rows(table);
  write_outputs(config, table);
  return table;
}

// ---------------------------------------------------------------------------
// bound-check experiment

ResultTable run_bounds(const ExperimentConfig& config) {
  SyntheticInstance inst = generate_synthetic(config.d, config.seed);
  const QuadraticProblem& problem = inst.problem;
  const Geometry geom = Geometry::euclidean(config.d);
  const Regularizer reg = Regularizer::zero();

  const OptimumCertificate cert = compute_optimum(problem, reg, geom, kCertTol);
  MetricEvaluator eval{&problem, &reg, cert.theta_star, cert.psi_min, &problem.sigma()};
  const Vector theta0 = default_start(geom, reg);
  const int threads = resolve_thread_count(config);
  const auto grid = checkpoint_grid(config.iters);

  ResultTable table;
  table.experiment = "bounds";
  table.geometry = "euclidean";
  table.regularizer = "none";
  table.seed_base = config.seed;
  table.replications = config.reps;

  const double gamma_max = max_stepsize(geom, problem);
  const double gamma = config.gamma > 0.0 ? config.gamma : gamma_max;

  // deterministic arm against the composite O(1/n) bound
  {
    RunTrace trace = run_da(geom, reg, problem, StepSchedule::constant(gamma), theta0,
                            config.iters, &eval);
    aggregate_traces(table, {"da", "constant"}, {trace});
    for (const TracePoint& pt : trace.points) {
      table.rows.push_back({"da", "constant", pt.n, "bound_deterministic",
                            bound_deterministic(cert.dh_from_start, gamma, pt.n), {}, {}});
    }
  }

  const Matrix sqrt_sigma = problem.sigma().power(0.5);
  const Vector start_gap = theta0 - cert.theta_star;
  const double dual_dist_sq = start_gap.dot(problem.sigma().solve(start_gap));

  // additive-noise arm, C = Sigma
  {
    std::vector<RunTrace> traces(static_cast<std::size_t>(config.reps));
    parallel_jobs(config.reps, threads, [&](int rep) {
      const std::uint64_t rep_seed =
          RngStream::derived_seed(config.seed, static_cast<std::uint64_t>(rep));
      AdditiveNoiseOracle oracle(problem, sqrt_sigma, rep_seed);
      traces[static_cast<std::size_t>(rep)] =
          run_sda(geom, reg, oracle, StepSchedule::constant(gamma), theta0, config.iters,
                  &eval, rep_seed);
    });
    aggregate_traces(table, {"sda_additive", "constant"}, traces);
    BoundInputs in;
    in.dh0 = cert.dh_from_start;
    in.gamma = gamma;
    in.dual_distance_sq = dual_dist_sq;
    in.tr_sigma_inv_c = static_cast<double>(config.d);  // C = Sigma
    for (std::int64_t n : grid) {
      in.n = n;
      table.rows.push_back(
          {"sda_additive", "constant", n, "bound_additive_noise", bound_additive_noise(in), {}, {}});
    }
  }

  // least-squares arm at the proven step-size
  {
    const double kappa = 3.0;
    const double l_smooth = problem.sigma().max_eigenvalue();
    const double gamma3 = 1.0 / (4.0 * kappa * l_smooth * config.d);
    std::vector<RunTrace> traces(static_cast<std::size_t>(config.reps));
    parallel_jobs(config.reps, threads, [&](int rep) {
      const std::uint64_t rep_seed =
          RngStream::derived_seed(config.seed, static_cast<std::uint64_t>(rep));
      LeastSquaresStream oracle = inst.make_stream(rep_seed);
      traces[static_cast<std::size_t>(rep)] =
          run_sda(geom, reg, oracle, StepSchedule::constant(gamma3), theta0,
                  config.iters, &eval, rep_seed);
    });
    aggregate_traces(table, {"sda_ls", "constant"}, traces);
    BoundInputs in;
    in.dh0 = geom.bregman(cert.theta_star, theta0);
    in.gamma = gamma3;
    in.sigma_sq = inst.sigma_noise * inst.sigma_noise;
    in.kappa = kappa;
    in.d = static_cast<int>(config.d);
    in.l_smooth = l_smooth;
    in.g_theta0 = 0.0;
    in.dist_opt_sq = 0.0;  // g = 0: theta* = theta_Sigma
    for (std::int64_t n : grid) {
      in.n = n;
      table.rows.push_back({"sda_ls", "constant", n, "bound_least_squares", bound_least_squares(in), {}, {}});
    }
  }

  sort_rows(table);
  write_outputs(config, table);
  return table;
}

}  // namespace

// ---------------------------------------------------------------------------
// config plumbing

ExperimentConfig read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  ExperimentConfig config;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto pos = line.find('#'); pos != std::string::npos) line.resize(pos);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config parse error at line " + std::to_string(lineno));
    }
    apply_override(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return config;
}

void apply_override(ExperimentConfig& config, const std::string& key,
                    const std::string& value) {
  if (key == "kind") {
    config.kind = value;
  } else if (key == "d") {
    config.d = static_cast<int>(parse_double(value, "d"));
  } else if (key == "iters") {
    config.iters = static_cast<std::int64_t>(parse_double(value, "iters"));
  } else if (key == "reps") {
    config.reps = static_cast<int>(parse_double(value, "reps"));
  } else if (key == "seed") {
    config.seed = static_cast<std::uint64_t>(parse_double(value, "seed"));
  } else if (key == "out") {
    config.out_dir = value;
  } else if (key == "geometry") {
    config.geometry = value;
  } else if (key == "regularizer") {
    config.regularizer = value;
  } else if (key == "algos") {
    config.algos = algos_from_string(value);
  } else if (key == "gamma") {
    config.gamma = parse_double(value, "gamma");
  } else if (key == "quick") {
    config.quick = value == "1" || value == "true";
  } else if (key == "threads") {
    config.threads = static_cast<int>(parse_double(value, "threads"));
  } else if (key == "data") {
    config.data_path = value;
  } else if (key == "lb_l") {
    config.lb_l = parse_double(value, "lb_l");
  } else if (key == "lb_sigma") {
    config.lb_sigma = parse_double(value, "lb_sigma");
  } else if (key == "ode_dt") {
    config.ode_dt = parse_double(value, "ode_dt");
  } else if (key == "ode_tend") {
    config.ode_tend = parse_double(value, "ode_tend");
  } else if (key == "ode_nu") {
    config.ode_nu = parse_double(value, "ode_nu");
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

void resolve_defaults(ExperimentConfig& config) {
  if (config.kind == "synthetic") {
    if (config.d == 0) config.d = config.quick ? 20 : 100;
    if (config.iters == 0) config.iters = config.quick ? 100'000 : 1'000'000;
    if (config.reps == 0) config.reps = 10;
    if (config.quick) {
      config.d = std::min(config.d, 20);
      config.iters = std::min<std::int64_t>(config.iters, 100'000);
    }
    if (config.algos.empty()) {
      // the projected-SGD baseline is Euclidean-only
      if (config.geometry == "euclidean") {
        config.algos = {{"sda", "constant"},
                        {"sda", "decaying"},
                        {"sgd", "constant"},
                        {"sgd", "decaying"}};
      } else {
        config.algos = {{"sda", "constant"}, {"sda", "decaying"}};
      }
    }
  } else if (config.kind == "dataset") {
    if (config.iters == 0) config.iters = config.quick ? 10'000 : 100'000;
    if (config.reps == 0) config.reps = config.quick ? 3 : 10;
    if (config.algos.empty()) {
      if (config.geometry == "euclidean") {
        config.algos = {{"sda", "constant"},
                        {"sda", "decaying"},
                        {"sgd", "constant"},
                        {"sgd", "decaying"},
                        {"saga", "constant"}};
      } else {
        config.algos = {{"sda", "constant"}, {"sda", "decaying"}};
      }
    }
  } else if (config.kind == "lowerbound") {
    if (config.d == 0) config.d = 2;
    if (config.iters == 0) config.iters = 100;
    if (config.reps == 0) config.reps = 2000;
  } else if (config.kind == "ode") {
    if (config.d == 0) config.d = 4;
    if (config.reps == 0) config.reps = 1;
    if (config.iters == 0) config.iters = 1;
  } else if (config.kind == "bounds") {
    if (config.d == 0) config.d = 10;
    if (config.iters == 0) config.iters = config.quick ? 1'000 : 10'000;
    if (config.reps == 0) config.reps = config.quick ? 50 : 200;
  } else {
    throw std::invalid_argument("unknown experiment kind '" + config.kind + "'");
  }
  if (config.reps < 1) throw std::invalid_argument("replications must be >= 1");
}

std::string resolved_config_text(const ExperimentConfig& config) {
  std::map<std::string, std::string> kv;
  kv["kind"] = config.kind;
  kv["d"] = std::to_string(config.d);
  kv["iters"] = std::to_string(config.iters);
  kv["reps"] = std::to_string(config.reps);
  kv["seed"] = std::to_string(config.seed);
  kv["out"] = config.out_dir;
  kv["geometry"] = config.geometry;
  kv["regularizer"] = config.regularizer;
  kv["algos"] = algos_to_string(config.algos);
  kv["gamma"] = format_double(config.gamma);
  kv["quick"] = config.quick ? "1" : "0";
  kv["threads"] = std::to_string(config.threads);
  kv["data"] = config.data_path;
  kv["lb_l"] = format_double(config.lb_l);
  kv["lb_sigma"] = format_double(config.lb_sigma);
  kv["ode_dt"] = format_double(config.ode_dt);
  kv["ode_tend"] = format_double(config.ode_tend);
  kv["ode_nu"] = format_double(config.ode_nu);
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

Geometry geometry_from_string(const std::string& s, Eigen::Index d) {
  if (s == "euclidean") return Geometry::euclidean(d);
  if (s == "entropy") return Geometry::negative_entropy(d);
  if (s.rfind("lp:", 0) == 0) {
    return Geometry::squared_lp(d, parse_double(s.substr(3), "lp exponent"));
  }
  throw std::invalid_argument("unknown geometry '" + s + "'");
}

Regularizer regularizer_from_string(const std::string& s, Eigen::Index d) {
  if (s.empty() || s == "none") return Regularizer::zero();
  const auto colon = s.find(':');
  const std::string name = s.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : s.substr(colon + 1);
  if (name == "simplex") return Regularizer::simplex(parse_double(arg, "simplex radius"));
  if (name == "l1") return Regularizer::l1(parse_double(arg, "l1 weight"));
  if (name == "ball") return Regularizer::l2_ball(parse_double(arg, "ball radius"));
  if (name == "l2") {
    // scalar nu, centered at the origin
    return Regularizer::quadratic_l2(parse_double(arg, "l2 weight"), Vector::Zero(d));
  }
  throw std::invalid_argument("unknown regularizer '" + s + "'");
}

ResultTable run_experiment(const ExperimentConfig& raw) {
  ExperimentConfig config = raw;
  resolve_defaults(config);
  if (config.kind == "synthetic") return run_synthetic(config);
  if (config.kind == "dataset") return run_dataset(config);
  if (config.kind == "lowerbound") return run_lowerbound(config);
  if (config.kind == "ode") return run_ode(config);
  if (config.kind == "bounds") return run_bounds(config);
  throw std::invalid_argument("unknown experiment kind '" + config.kind + "'");
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void emit_csv(const ResultTable& table, const std::string& path) {
  if (table.rows.empty()) throw std::invalid_argument("emit_csv: empty table");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_csv: cannot open " + path);
  out << "experiment,algorithm,schedule,geometry,regularizer,seed_base,replications,"
         "n,metric,mean,stderr\n";
  for (const ResultRow& row : table.rows) {
    out << table.experiment << ',' << row.algorithm << ',' << row.schedule << ','
        << table.geometry << ',' << table.regularizer << ',' << table.seed_base << ','
        << table.replications << ',' << row.n << ',' << row.metric << ','
        << format_double(row.mean) << ',';
    if (row.stderr_value) out << format_double(*row.stderr_value);
    out << '\n';
  }
  if (!out) throw std::runtime_error("emit_csv: write failure for " + path);
}

ResultTable parse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("parse_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("parse_csv: empty file");
  ResultTable table;
  bool first = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 11) throw std::runtime_error("parse_csv: bad row: " + line);
    if (first) {
      table.experiment = f[0];
      table.geometry = f[3];
      table.regularizer = f[4];
      table.seed_base = static_cast<std::uint64_t>(std::stoull(f[5]));
      table.replications = std::stoi(f[6]);
      first = false;
    }
    ResultRow row;
    row.algorithm = f[1];
    row.schedule = f[2];
    row.n = std::stoll(f[7]);
    row.metric = f[8];
    row.mean = std::stod(f[9]);
    if (!f[10].empty()) row.stderr_value = std::stod(f[10]);
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace sda
