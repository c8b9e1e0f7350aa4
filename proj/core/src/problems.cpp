#include "sda/problems.hpp"

#include <Eigen/QR>

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace sda {

QuadraticProblem::QuadraticProblem(SpdMatrix sigma, Vector q)
    : sigma_(std::move(sigma)), q_(std::move(q)) {
  if (q_.size() != sigma_.dim()) {
    throw std::invalid_argument("QuadraticProblem: q/Sigma dimension mismatch");
  }
  theta_sigma_ = sigma_.solve(q_);
  const double resid = (sigma_.apply(theta_sigma_) - q_).norm();
  if (resid > 1e-10 * std::max(1.0, q_.norm())) {
    throw std::runtime_error("QuadraticProblem: solve residual too large");
  }
  f_min_ = 0.5 * theta_sigma_.dot(sigma_.apply(theta_sigma_)) - q_.dot(theta_sigma_);
}

QuadraticProblem QuadraticProblem::from_optimum(SpdMatrix sigma, const Vector& theta_sigma) {
  Vector q = sigma.apply(theta_sigma);
  return QuadraticProblem(std::move(sigma), std::move(q));
}

double QuadraticProblem::value(const Vector& theta) const {
  return 0.5 * theta.dot(sigma_.apply(theta)) - q_.dot(theta);
}

Vector QuadraticProblem::grad(const Vector& theta) const {
  if (theta.size() != dim()) {
    throw std::invalid_argument("QuadraticProblem::grad: dimension mismatch");
  }
  return sigma_.apply(theta) - q_;
}

void QuadraticProblem::set_gaussian_design(std::uint64_t moment_seed) {
  design_kind_ = DesignKind::kGaussian;
  moment_seed_ = moment_seed;
}

void QuadraticProblem::set_design_atoms(std::vector<Vector> atoms) {
  if (atoms.empty()) throw std::invalid_argument("set_design_atoms: empty atom list");
  design_kind_ = DesignKind::kAtoms;
  atoms_ = std::make_shared<const std::vector<Vector>>(std::move(atoms));
}

double QuadraticProblem::design_moment_lq(double q_exp) const {
  if (q_exp == 2.0) return sigma_.trace();  // E ||x||_2^2 = tr Sigma
  switch (design_kind_) {
    case DesignKind::kAtoms: {
      double s = 0.0;
      for (const Vector& x : *atoms_) {
        const double n = std::pow(x.array().abs().pow(q_exp).sum(), 1.0 / q_exp);
        s += n * n;
      }
      return s / static_cast<double>(atoms_->size());
    }
    case DesignKind::kGaussian: {
      // Fixed-seed Monte Carlo; deterministic for a given problem.
      constexpr int kSamples = 16384;
      RngStream rng(RngStream::salted_seed(moment_seed_, 0x6d6f6d32));
      const Matrix factor =
          sigma_.eigenvectors() *
          Vector(sigma_.eigenvalues().array().sqrt()).asDiagonal();
      double s = 0.0;
      for (int i = 0; i < kSamples; ++i) {
        const Vector x = factor * rng.gaussian_vector(dim());
        const double n = std::pow(x.array().abs().pow(q_exp).sum(), 1.0 / q_exp);
        s += n * n;
      }
      return s / kSamples;
    }
    case DesignKind::kNone:
      throw std::runtime_error(
          "design_moment_lq: no design information attached to this problem");
  }
  throw std::logic_error("unreachable");
}

AdditiveNoiseOracle::AdditiveNoiseOracle(const QuadraticProblem& base, Matrix noise_factor,
                                         std::uint64_t seed)
    : base_(base), noise_factor_(std::move(noise_factor)), rng_(seed) {
  if (noise_factor_.rows() != base.dim()) {
    throw std::invalid_argument("AdditiveNoiseOracle: factor must have d rows");
  }
}

Vector AdditiveNoiseOracle::sample_grad(const Vector& theta) {
  const Vector xi = noise_factor_ * rng_.gaussian_vector(noise_factor_.cols());
  return base_.grad(theta) - xi;
}

LeastSquaresStream LeastSquaresStream::synthetic(Matrix x_factor, Vector theta_sigma,
                                                 double sigma_noise, std::uint64_t seed) {
  LeastSquaresStream s;
  s.synthetic_ = true;
  s.x_factor_ = std::move(x_factor);
  s.theta_sigma_ = std::move(theta_sigma);
  s.sigma_noise_ = sigma_noise;
  s.rng_ = RngStream(seed);
  return s;
}

LeastSquaresStream LeastSquaresStream::finite(
    std::shared_ptr<const std::vector<Vector>> xs,
    std::shared_ptr<const std::vector<double>> ys, std::uint64_t seed,
    bool with_replacement) {
  if (!xs || !ys || xs->size() != ys->size() || xs->empty()) {
    throw std::invalid_argument("LeastSquaresStream::finite: bad dataset");
  }
  LeastSquaresStream s;
  s.synthetic_ = false;
  s.xs_ = std::move(xs);
  s.ys_ = std::move(ys);
  s.with_replacement_ = with_replacement;
  s.rng_ = RngStream(seed);
  return s;
}

std::pair<Vector, double> LeastSquaresStream::draw() {
  if (synthetic_) {
    Vector x = x_factor_ * rng_.gaussian_vector(x_factor_.cols());
    const double y = x.dot(theta_sigma_) + sigma_noise_ * rng_.gaussian();
    return {std::move(x), y};
  }
  std::size_t idx;
  if (with_replacement_) {
    idx = static_cast<std::size_t>(rng_.uniform_index(xs_->size()));
  } else {
    if (cursor_ >= xs_->size()) {
      throw std::runtime_error("LeastSquaresStream: finite dataset exhausted");
    }
    idx = cursor_++;
  }
  return {(*xs_)[idx], (*ys_)[idx]};
}

Vector LeastSquaresStream::sample_grad(const Vector& theta) {
  auto [x, y] = draw();
  const double resid = x.dot(theta) - y;
  x *= resid;
  return x;
}

SyntheticInstance generate_synthetic(Eigen::Index d, std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("generate_synthetic: d must be >= 1");
  RngStream rng(seed);

  // Orthogonalize a Gaussian matrix; fix signs so the draw is deterministic
  // under any QR convention.
  Matrix raw(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) raw(i, j) = rng.gaussian();
  Eigen::HouseholderQR<Matrix> qr(raw);
  Matrix u = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (r(j, j) < 0.0) u.col(j) *= -1.0;
  }

  Vector eigenvalues(d);
  for (Eigen::Index k = 0; k < d; ++k) eigenvalues(k) = 1.0 / static_cast<double>(k + 1);
  SpdMatrix sigma = SpdMatrix::from_spectrum(u, eigenvalues);

  Vector theta_sigma(d);
  for (Eigen::Index i = 0; i < d; ++i) theta_sigma(i) = std::abs(rng.gaussian());

  QuadraticProblem problem = QuadraticProblem::from_optimum(std::move(sigma), theta_sigma);
  problem.set_gaussian_design(seed);

  Matrix x_factor = u * Vector(eigenvalues.array().sqrt()).asDiagonal();

  SyntheticInstance inst{std::move(problem), std::move(x_factor), 1.0, seed};
  return inst;
}

Dataset load_libsvm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_libsvm: cannot open " + path);

  struct SparseRow {
    double label;
    std::vector<std::pair<Eigen::Index, double>> entries;
  };
  std::vector<SparseRow> rows;
  Eigen::Index max_index = 0;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // strip comments and blank lines
    if (auto pos = line.find('#'); pos != std::string::npos) line.resize(pos);
    std::istringstream ls(line);
    double label;
    if (!(ls >> label)) {
      if (ls.eof()) continue;  // blank line
      throw std::runtime_error("load_libsvm: parse error at line " +
                               std::to_string(lineno));
    }
    SparseRow row;
    row.label = label;
    std::string tok;
    Eigen::Index prev_index = 0;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) {
        throw std::runtime_error("load_libsvm: malformed feature at line " +
                                 std::to_string(lineno));
      }
      Eigen::Index idx;
      double val;
      try {
        idx = static_cast<Eigen::Index>(std::stoll(tok.substr(0, colon)));
        val = std::stod(tok.substr(colon + 1));
      } catch (const std::exception&) {
        throw std::runtime_error("load_libsvm: malformed feature at line " +
                                 std::to_string(lineno));
      }
      if (idx < 1 || idx <= prev_index) {
        throw std::runtime_error(
            "load_libsvm: indices must be 1-based ascending at line " +
            std::to_string(lineno));
      }
      prev_index = idx;
      max_index = std::max(max_index, idx);
      row.entries.emplace_back(idx - 1, val);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("load_libsvm: empty file " + path);

  Dataset data;
  data.dim = max_index;
  data.xs.reserve(rows.size());
  data.ys.reserve(rows.size());
  for (const auto& row : rows) {
    Vector x = Vector::Zero(max_index);
    for (const auto& [i, v] : row.entries) x(i) = v;
    data.xs.push_back(std::move(x));
    data.ys.push_back(row.label);
  }
  return data;
}

Dataset remove_outliers(const Dataset& data) {
  double mean_norm = 0.0;
  for (const Vector& x : data.xs) mean_norm += x.norm();
  mean_norm /= static_cast<double>(data.size());
  const double cutoff = 5.0 * mean_norm;

  Dataset out;
  out.dim = data.dim;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.xs[i].norm() <= cutoff) {
      out.xs.push_back(data.xs[i]);
      out.ys.push_back(data.ys[i]);
    }
  }
  return out;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& data, std::uint64_t seed) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  RngStream rng(RngStream::salted_seed(seed, 0x73706c69));
  for (std::size_t i = data.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.uniform_index(i));
    std::swap(order[i - 1], order[j]);
  }
  const std::size_t n_train = data.size() / 2;
  Dataset train, test;
  train.dim = test.dim = data.dim;
  for (std::size_t k = 0; k < data.size(); ++k) {
    Dataset& dst = k < n_train ? train : test;
    dst.xs.push_back(data.xs[order[k]]);
    dst.ys.push_back(data.ys[order[k]]);
  }
  return {std::move(train), std::move(test)};
}

QuadraticProblem empirical_quadratic(const Dataset& data) {
  if (data.size() == 0) throw std::invalid_argument("empirical_quadratic: empty dataset");
  const auto n = static_cast<double>(data.size());
  Matrix sigma = Matrix::Zero(data.dim, data.dim);
  Vector q = Vector::Zero(data.dim);
  for (std::size_t i = 0; i < data.size(); ++i) {
    sigma.noalias() += data.xs[i] * data.xs[i].transpose();
    q.noalias() += data.ys[i] * data.xs[i];
  }
  sigma /= n;
  q /= n;
  QuadraticProblem p(SpdMatrix(std::move(sigma)), std::move(q));
  std::vector<Vector> atoms = data.xs;
  p.set_design_atoms(std::move(atoms));
  return p;
}

double max_stepsize(const Geometry& geom, const QuadraticProblem& problem) {
  switch (geom.kind()) {
    case GeometryKind::kEuclidean:
      return 1.0 / problem.sigma().max_eigenvalue();
    case GeometryKind::kNegativeEntropy:
      // f is max_ij|Sigma_ij|-smooth w.r.t. l1 and h is 1-strongly convex
      // w.r.t. l1 on the unit simplex.
      return 1.0 / problem.sigma().max_abs_entry();
    case GeometryKind::kSquaredLpNorm:
      return 1.0 / problem.design_moment_lq(geom.q());
  }
  throw std::logic_error("unreachable");
}

Vector default_start(const Geometry& geom, const Regularizer& g) {
  const Eigen::Index d = geom.dim();
  if (g.is_indicator()) return g.anchor(d);
  if (geom.kind() == GeometryKind::kNegativeEntropy) {
    return Vector::Constant(d, 1.0 / static_cast<double>(d));
  }
  return Vector::Zero(d);
}

}  // namespace sda
