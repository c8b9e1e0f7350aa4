#include "sda/problems.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace sda {
namespace {

class TempFile {
 public:
  explicit TempFile(const std::string& contents) {
    path_ = std::filesystem::temp_directory_path() /
            ("sda_test_" + std::to_string(counter_++) + ".txt");
    std::ofstream out(path_);
    out << contents;
  }
  ~TempFile() { std::filesystem::remove(path_); }
  std::string path() const { return path_.string(); }

 private:
  static inline int counter_ = 0;
  std::filesystem::path path_;
};

TEST(FullGradient, KnownValues) {
  {
    RngStream rng(4);
    const SpdMatrix sigma = testing::random_spd(rng, 5);
    const Vector theta_opt = testing::random_vector(rng, 5);
    const QuadraticProblem p = QuadraticProblem::from_optimum(sigma, theta_opt);
    EXPECT_LE(full_gradient(p, p.theta_sigma()).norm(), 1e-10);
  }
  {
    QuadraticProblem p(SpdMatrix::identity(2), Vector::Zero(2));
    EXPECT_EQ(full_gradient(p, (Vector(2) << 1, 2).finished()),
              (Vector(2) << 1, 2).finished());
  }
  {
    QuadraticProblem p(SpdMatrix::diagonal((Vector(2) << 2, 1).finished()),
                       (Vector(2) << 2, 1).finished());
    EXPECT_EQ(full_gradient(p, Vector::Zero(2)), (Vector(2) << -2, -1).finished());
  }
}

TEST(QuadraticProblem, ValueIsMahalanobisAroundOptimum) {
  RngStream rng(6);
  const SpdMatrix sigma = testing::random_spd(rng, 7);
  const QuadraticProblem p =
      QuadraticProblem::from_optimum(sigma, testing::random_vector(rng, 7));
  for (int i = 0; i < 20; ++i) {
    const Vector theta = testing::random_vector(rng, 7, 2.0);
    const double direct = p.value(theta) - p.f_min();
    const double quad = 0.5 * p.sigma().quad(theta - p.theta_sigma());
    ASSERT_NEAR(direct, quad, 1e-10 * (1.0 + std::abs(direct)));
  }
}

TEST(LeastSquaresStream, ZeroResidualAtOptimumWithoutNoise) {
  const auto inst = generate_synthetic(4, 11);
  auto stream = LeastSquaresStream::synthetic(inst.x_factor, inst.problem.theta_sigma(),
                                              0.0, 5);
  for (int i = 0; i < 100; ++i) {
    ASSERT_LE(stream.sample_grad(inst.problem.theta_sigma()).norm(), 1e-12);
  }
}

TEST(LeastSquaresStream, PointwiseGradientFormula) {
  auto xs = std::make_shared<const std::vector<Vector>>(
      std::vector<Vector>{(Vector(3) << 1, 0, 0).finished()});
  auto ys = std::make_shared<const std::vector<double>>(std::vector<double>{0.0});
  auto stream = LeastSquaresStream::finite(xs, ys, 3);
  const Vector g = stream.sample_grad((Vector(3) << 3, 5, -2).finished());
  EXPECT_EQ(g, (Vector(3) << 3, 0, 0).finished());
}

TEST(LeastSquaresStream, NoReplacementExhausts) {
  auto xs = std::make_shared<const std::vector<Vector>>(
      std::vector<Vector>{Vector::Ones(2), Vector::Ones(2)});
  auto ys = std::make_shared<const std::vector<double>>(std::vector<double>{1.0, 2.0});
  auto stream = LeastSquaresStream::finite(xs, ys, 3, /*with_replacement=*/false);
  stream.draw();
  stream.draw();
  EXPECT_THROW(stream.draw(), std::runtime_error);
}

TEST(LeastSquaresStream, MonteCarloMeanMatchesFullGradient) {
  const Eigen::Index d = 5;
  const auto inst = generate_synthetic(d, 21);
  RngStream probe_rng(77);
  for (int rep = 0; rep < 10; ++rep) {
    const Vector theta = testing::random_vector(probe_rng, d);
    const Vector expected = inst.problem.grad(theta);
    auto stream = inst.make_stream(1000 + static_cast<std::uint64_t>(rep));
    const int n = 100'000;
    Vector mean = Vector::Zero(d);
    Vector m2 = Vector::Zero(d);
    for (int i = 0; i < n; ++i) {
      const Vector g = stream.sample_grad(theta);
      mean += g;
      m2 += g.cwiseProduct(g);
    }
    mean /= n;
    for (Eigen::Index i = 0; i < d; ++i) {
      const double var = m2(i) / n - mean(i) * mean(i);
      const double se = std::sqrt(std::max(var, 1e-30) / n);
      ASSERT_NEAR(mean(i), expected(i), 4.0 * se) << "coordinate " << i;
    }
  }
}

TEST(AdditiveNoiseOracle, UnbiasedAndZeroFactorExact) {
  const Eigen::Index d = 4;
  const auto inst = generate_synthetic(d, 31);
  {
    AdditiveNoiseOracle oracle(inst.problem, Matrix::Zero(d, d), 7);
    const Vector theta = Vector::Ones(d);
    EXPECT_EQ(oracle.sample_grad(theta), inst.problem.grad(theta));
  }
  AdditiveNoiseOracle oracle(inst.problem, Matrix::Identity(d, d), 7);
  const Vector theta = Vector::Ones(d);
  const Vector expected = inst.problem.grad(theta);
  const int n = 200'000;
  Vector mean = Vector::Zero(d);
  for (int i = 0; i < n; ++i) mean += oracle.sample_grad(theta);
  mean /= n;
  const double se = 1.0 / std::sqrt(static_cast<double>(n));
  for (Eigen::Index i = 0; i < d; ++i) ASSERT_NEAR(mean(i), expected(i), 4.0 * se);
}

// Residual noise of a well-specified Gaussian design: the empirical second
// moment is dominated by kappa sigma^2 Sigma with kappa = 3.
TEST(LeastSquaresStream, ResidualCovarianceDominated) {
  const Eigen::Index d = 6;
  const auto inst = generate_synthetic(d, 41);
  auto stream = inst.make_stream(99);
  const Vector theta_star = inst.problem.theta_sigma();
  Matrix acc = Matrix::Zero(d, d);
  const int n = 200'000;
  for (int i = 0; i < n; ++i) {
    const Vector xi = stream.sample_grad(theta_star);  // residual vector at optimum
    acc.noalias() += xi * xi.transpose();
  }
  acc /= n;
  const Matrix slack = 3.0 * inst.sigma_noise * inst.sigma_noise *
                           inst.problem.sigma().dense() -
                       acc;
  Eigen::SelfAdjointEigenSolver<Matrix> s(slack);
  EXPECT_GE(s.eigenvalues().minCoeff(), -0.05);
}

TEST(GenerateSynthetic, SpectrumSeedAndTrace) {
  const Eigen::Index d = 12;
  const auto a = generate_synthetic(d, 7);
  const auto b = generate_synthetic(d, 7);
  EXPECT_EQ(a.problem.sigma().dense(), b.problem.sigma().dense());
  EXPECT_EQ(a.problem.theta_sigma(), b.problem.theta_sigma());

  const Vector evals = a.problem.sigma().eigenvalues();  // ascending
  for (Eigen::Index k = 0; k < d; ++k) {
    ASSERT_NEAR(evals(d - 1 - k), 1.0 / static_cast<double>(k + 1), 1e-10);
  }
  double harmonic = 0.0;
  for (Eigen::Index k = 1; k <= d; ++k) harmonic += 1.0 / static_cast<double>(k);
  EXPECT_NEAR(a.problem.sigma().trace(), harmonic, 1e-10);
  EXPECT_GE(a.problem.theta_sigma().minCoeff(), 0.0);

  const auto c = generate_synthetic(d, 8);
  EXPECT_NE(a.problem.theta_sigma(), c.problem.theta_sigma());
}

TEST(LoadLibsvm, ParsesSparseRows) {
  TempFile file("1 1:0.5 3:2\n-1\n");
  const Dataset data = load_libsvm(file.path());
  ASSERT_EQ(data.size(), 2u);
  EXPECT_EQ(data.dim, 3);
  EXPECT_DOUBLE_EQ(data.ys[0], 1.0);
  EXPECT_EQ(data.xs[0], (Vector(3) << 0.5, 0, 2).finished());
  EXPECT_DOUBLE_EQ(data.ys[1], -1.0);
  EXPECT_EQ(data.xs[1], Vector::Zero(3));
}

TEST(LoadLibsvm, ErrorsCarryLineNumbers) {
  TempFile bad("1 1:0.5\n-1 2:x\n");
  try {
    load_libsvm(bad.path());
    FAIL() << "expected parse error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  TempFile nonascending("1 3:1 2:1\n");
  EXPECT_THROW(load_libsvm(nonascending.path()), std::runtime_error);
  TempFile empty("");
  EXPECT_THROW(load_libsvm(empty.path()), std::runtime_error);
  EXPECT_THROW(load_libsvm("/nonexistent/file.svm"), std::runtime_error);
}

TEST(RemoveOutliers, FiltersLargeNormRows) {
  std::string contents;
  for (int i = 0; i < 99; ++i) contents += "1 1:1\n";
  contents += "1 1:10\n";  // mean norm 1.09, cutoff 5.45
  TempFile file(contents);
  const Dataset data = load_libsvm(file.path());
  const Dataset kept = remove_outliers(data);
  EXPECT_EQ(kept.size(), 99u);
  for (const Vector& x : kept.xs) ASSERT_LE(x.norm(), 5.45);
}

TEST(TrainTestSplit, DeterministicPartition) {
  std::string contents;
  for (int i = 1; i <= 9; ++i) {
    contents += std::to_string(i) + " 1:" + std::to_string(i) + "\n";
  }
  TempFile file(contents);
  const Dataset data = load_libsvm(file.path());
  const auto [train_a, test_a] = train_test_split(data, 5);
  const auto [train_b, test_b] = train_test_split(data, 5);
  EXPECT_EQ(train_a.ys, train_b.ys);
  EXPECT_EQ(test_a.ys, test_b.ys);
  EXPECT_EQ(train_a.size() + test_a.size(), data.size());
  EXPECT_EQ(train_a.size(), data.size() / 2);

  std::vector<double> all = train_a.ys;
  all.insert(all.end(), test_a.ys.begin(), test_a.ys.end());
  std::sort(all.begin(), all.end());
  EXPECT_EQ(all, data.ys);  // a permutation, nothing lost

  const auto [train_c, test_c] = train_test_split(data, 6);
  EXPECT_NE(train_c.ys, train_a.ys);
}

TEST(DesignMoment, TraceForQ2AndAtoms) {
  RngStream rng(3);
  const SpdMatrix sigma = testing::random_spd(rng, 4);
  QuadraticProblem p(sigma, Vector::Zero(4));
  EXPECT_DOUBLE_EQ(p.design_moment_lq(2.0), sigma.trace());
  p.set_design_atoms({(Vector(4) << 1, 1, 0, 0).finished(),
                      (Vector(4) << 0, 0, 2, 0).finished()});
  // l_3 norms squared: 2^(2/3) and 4
  const double expected = 0.5 * (std::pow(2.0, 2.0 / 3.0) + 4.0);
  EXPECT_NEAR(p.design_moment_lq(3.0), expected, 1e-12);
}

TEST(ComputeOptimum, ZeroRegularizerRecoversGlobalMinimizer) {
  const auto inst = generate_synthetic(6, 51);
  const auto cert = compute_optimum(inst.problem, Regularizer::zero(),
                                    Geometry::euclidean(6), 1e-10);
  const Vector direct = spd_solve(inst.problem.sigma(), inst.problem.q());
  EXPECT_LE((cert.theta_star - direct).norm(), 1e-7);
  EXPECT_LE(cert.residual, 1e-10);
  EXPECT_NEAR(cert.psi_min, inst.problem.f_min(), 1e-10);
}

TEST(ComputeOptimum, InactiveSimplexConstraintKeepsGlobalMinimizer) {
  RngStream rng(61);
  const SpdMatrix sigma = testing::random_spd(rng, 4, 0.3, 2.0);
  const Vector theta_opt = testing::random_positive(rng, 4, 0.1, 0.3);
  const QuadraticProblem p = QuadraticProblem::from_optimum(sigma, theta_opt);
  // the simplex carries an equality constraint, so pick its radius to pass
  // exactly through the unconstrained optimum
  const auto cert = compute_optimum(p, Regularizer::simplex(theta_opt.lpNorm<1>()),
                                    Geometry::euclidean(4), 1e-10);
  EXPECT_LE((cert.theta_star - theta_opt).norm(), 1e-6);
}

TEST(ComputeOptimum, ActiveSimplexCertificateIsConsistent) {
  const auto inst = generate_synthetic(5, 71);
  const double r = 0.5 * inst.problem.theta_sigma().lpNorm<1>();
  const Regularizer g = Regularizer::simplex(r);
  for (const Geometry& geom :
       {Geometry::euclidean(5), Geometry::negative_entropy(5)}) {
    const auto cert = compute_optimum(inst.problem, g, geom, 1e-10);
    EXPECT_LE(cert.residual, 1e-10) << to_string(geom.kind());
    EXPECT_LE(std::abs(cert.theta_star.sum() - r), 1e-8);
    EXPECT_TRUE(subgradient_witness(g, cert.theta_star, cert.witness, 1e-7));
    EXPECT_GE(cert.psi_min, inst.problem.f_min());
  }
}

// psi(theta) - psi(theta*) dominates the squared Sigma-distance to theta*.
TEST(ComputeOptimum, CertificateSatisfiesQuadraticLowerBound) {
  const auto inst = generate_synthetic(5, 81);
  const double r = 0.5 * inst.problem.theta_sigma().lpNorm<1>();
  const Regularizer g = Regularizer::simplex(r);
  const auto cert =
      compute_optimum(inst.problem, g, Geometry::euclidean(5), 1e-10);
  RngStream rng(9);
  for (int i = 0; i < 100; ++i) {
    const Vector probe = project_simplex(testing::random_vector(rng, 5), r);
    const double gap = inst.problem.value(probe) - inst.problem.value(cert.theta_star);
    const double dist = 0.5 * inst.problem.sigma().quad(probe - cert.theta_star);
    ASSERT_LE(dist, gap + 1e-8);
  }
}

TEST(EmpiricalQuadratic, MatchesHandComputation) {
  Dataset data;
  data.dim = 2;
  data.xs = {(Vector(2) << 1, 0).finished(), (Vector(2) << 0, 2).finished(),
             (Vector(2) << 1, 1).finished()};
  data.ys = {1.0, 2.0, 3.0};
  const QuadraticProblem p = empirical_quadratic(data);
  Matrix expected_sigma(2, 2);
  expected_sigma << (1.0 + 0.0 + 1.0) / 3, 1.0 / 3, 1.0 / 3, (0.0 + 4.0 + 1.0) / 3;
  EXPECT_LE((p.sigma().dense() - expected_sigma).norm(), 1e-12);
  const Vector expected_q = (Vector(2) << (1.0 + 3.0) / 3, (4.0 + 3.0) / 3).finished();
  EXPECT_LE((p.q() - expected_q).norm(), 1e-12);
}

}  // namespace
}  // namespace sda
