#include "sda/odeflow.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace sda {
namespace {

Vector vec1(double a) { return (Vector(1) << a).finished(); }

FlowSpec scalar_quadratic_spec(const QuadraticProblem& p, double dt, double tend) {
  FlowSpec spec;
  spec.geom = Geometry::euclidean(1);
  spec.f = &p;
  spec.g = Regularizer::zero();
  spec.dt = dt;
  spec.t_end = tend;
  spec.theta0 = vec1(1.0);
  return spec;
}

TEST(MdFlow, ScalarExponentialDecay) {
  const QuadraticProblem p(SpdMatrix::identity(1), Vector::Zero(1));
  const FlowSpec spec = scalar_quadratic_spec(p, 1e-2, 1.0);
  const FlowTrace trace = integrate_md_flow(spec);
  EXPECT_NEAR(trace.samples.back().t, 1.0, 1e-12);
  EXPECT_NEAR(trace.samples.back().theta(0), std::exp(-1.0), 1e-6);
}

TEST(MdFlow, EquilibriumIsStationary) {
  RngStream rng(5);
  const SpdMatrix sigma = testing::random_spd(rng, 3);
  const Vector opt = testing::random_vector(rng, 3);
  const QuadraticProblem p = QuadraticProblem::from_optimum(sigma, opt);
  FlowSpec spec;
  spec.geom = Geometry::euclidean(3);
  spec.f = &p;
  spec.dt = 1e-2;
  spec.t_end = 2.0;
  spec.theta0 = opt;
  const FlowTrace trace = integrate_md_flow(spec);
  for (const FlowSample& s : trace.samples) {
    ASSERT_LE((s.theta - opt).norm(), 1e-12);
    ASSERT_LE(s.lyapunov, 1e-12);
  }
}

// Euclidean quadratic flow solves theta(t) = opt + exp(-Sigma t)(theta0 - opt).
TEST(MdFlow, MatchesMatrixExponential) {
  RngStream rng(7);
  const Eigen::Index d = 4;
  const SpdMatrix sigma = testing::random_spd(rng, d, 0.3, 2.0);
  const Vector opt = testing::random_vector(rng, d);
  const QuadraticProblem p = QuadraticProblem::from_optimum(sigma, opt);
  FlowSpec spec;
  spec.geom = Geometry::euclidean(d);
  spec.f = &p;
  spec.dt = 5e-3;
  spec.t_end = 2.0;
  spec.theta0 = testing::random_vector(rng, d);

  const FlowTrace trace = integrate_md_flow(spec);
  for (std::size_t i = 0; i < trace.samples.size(); i += 37) {
    const FlowSample& s = trace.samples[i];
    Vector expected = opt;
    const Vector gap0 = spec.theta0 - opt;
    const Matrix u = sigma.eigenvectors();
    const Vector decay =
        (-s.t * sigma.eigenvalues().array()).exp() * (u.transpose() * gap0).array();
    expected += u * decay;
    ASSERT_LE((s.theta - expected).norm(), 1e-6) << "t = " << s.t;
  }
}

TEST(DaFlow, CoincidesWithMdFlowWithoutRegularizer) {
  RngStream rng(9);
  const SpdMatrix sigma = testing::random_spd(rng, 3);
  const QuadraticProblem p =
      QuadraticProblem::from_optimum(sigma, testing::random_vector(rng, 3));
  FlowSpec spec;
  spec.geom = Geometry::euclidean(3);
  spec.f = &p;
  spec.dt = 1e-2;
  spec.t_end = 1.5;
  spec.theta0 = testing::random_vector(rng, 3);
  const FlowTrace md = integrate_md_flow(spec);
  const FlowTrace da = integrate_da_flow(spec);
  ASSERT_EQ(md.samples.size(), da.samples.size());
  for (std::size_t i = 0; i < md.samples.size(); ++i) {
    ASSERT_LE((md.samples[i].theta - da.samples[i].theta).norm(), 1e-10);
  }
}

// f = 0, g = nu/2 ||t||^2: the DA flow is theta' = -nu theta / (1 + t nu)
// with solution theta(0) / (1 + nu t).
TEST(DaFlow, SeparableSolutionWithQuadraticRegularizer) {
  FlowSpec spec;
  spec.geom = Geometry::euclidean(1);
  spec.f = nullptr;
  spec.g = Regularizer::quadratic_l2(1.0, Vector::Zero(1));
  spec.dt = 1e-3;
  spec.t_end = 9.0;
  spec.theta0 = vec1(2.0);
  const FlowTrace trace = integrate_da_flow(spec);
  EXPECT_NEAR(trace.samples.back().theta(0), 2.0 / 10.0, 1e-6);
}

TEST(Flows, LyapunovNonincreasingWithinStepTolerance) {
  RngStream rng(13);
  const Eigen::Index d = 3;
  const SpdMatrix sigma = testing::random_spd(rng, d, 0.3, 2.0);
  const QuadraticProblem p =
      QuadraticProblem::from_optimum(sigma, testing::random_vector(rng, d));
  FlowSpec spec;
  spec.geom = Geometry::euclidean(d);
  spec.f = &p;
  spec.g = Regularizer::quadratic_l2(0.7, Vector::Zero(d));
  spec.dt = 2e-2;
  spec.t_end = 3.0;
  spec.theta0 = testing::random_vector(rng, d);

  const double tol_factor = 10.0 * std::pow(spec.dt, 4);
  for (const FlowTrace& trace : {integrate_md_flow(spec), integrate_da_flow(spec)}) {
    for (std::size_t i = 1; i < trace.samples.size(); ++i) {
      const double prev = trace.samples[i - 1].lyapunov;
      const double next = trace.samples[i].lyapunov;
      ASSERT_LE(next - prev, tol_factor * std::max(1.0, std::abs(prev)));
    }
  }
}

TEST(Flows, EntropyGeometryStaysInteriorWithDecreasingLyapunov) {
  const Eigen::Index d = 3;
  const auto inst = generate_synthetic(d, 19);
  FlowSpec spec;
  spec.geom = Geometry::negative_entropy(d);
  spec.f = &inst.problem;
  spec.dt = 1e-3;
  spec.t_end = 2.0;
  spec.theta0 = Vector::Constant(d, 0.4);
  // theta_sigma of the synthetic family is nonnegative; entropy flow keeps
  // the trajectory strictly positive
  const FlowTrace trace = integrate_md_flow(spec);
  for (const FlowSample& s : trace.samples) {
    ASSERT_GT(s.theta.minCoeff(), 0.0);
  }
  EXPECT_LT(trace.samples.back().lyapunov, trace.samples.front().lyapunov);
}

TEST(Flows, FourthOrderConvergenceUnderStepHalving) {
  const QuadraticProblem p(SpdMatrix::identity(1), Vector::Zero(1));
  auto endpoint_error = [&](double dt) {
    const FlowSpec spec = scalar_quadratic_spec(p, dt, 1.0);
    const FlowTrace trace = integrate_md_flow(spec);
    return std::abs(trace.samples.back().theta(0) - std::exp(-1.0));
  };
  const double coarse = endpoint_error(0.1);
  const double fine = endpoint_error(0.05);
  const double ratio = coarse / fine;
  EXPECT_GE(ratio, 16.0 / 1.3);
  EXPECT_LE(ratio, 16.0 * 1.3);
}

TEST(Flows, DaReachesLyapunovLevelLaterThanMd) {
  RngStream rng(17);
  const Eigen::Index d = 3;
  const SpdMatrix sigma = testing::random_spd(rng, d, 0.5, 1.5);
  const QuadraticProblem p =
      QuadraticProblem::from_optimum(sigma, testing::random_vector(rng, d));
  FlowSpec spec;
  spec.geom = Geometry::euclidean(d);
  spec.f = &p;
  spec.g = Regularizer::quadratic_l2(1.2, Vector::Zero(d));
  spec.dt = 1e-2;
  spec.t_end = 6.0;
  spec.theta0 = Vector::Ones(d);

  const FlowTrace md = integrate_md_flow(spec);
  const FlowTrace da = integrate_da_flow(spec);
  const double level = 0.1 * md.samples.front().lyapunov;
  auto first_time_below = [&](const FlowTrace& trace) {
    for (const FlowSample& s : trace.samples) {
      if (s.lyapunov <= level) return s.t;
    }
    return std::numeric_limits<double>::infinity();
  };
  const double t_md = first_time_below(md);
  const double t_da = first_time_below(da);
  ASSERT_TRUE(std::isfinite(t_md));
  EXPECT_GT(t_da, t_md);
}

TEST(FlowSpec, ValidationErrors) {
  const QuadraticProblem p(SpdMatrix::identity(2), Vector::Zero(2));
  FlowSpec spec;
  spec.geom = Geometry::euclidean(2);
  spec.f = &p;
  spec.theta0 = Vector::Ones(2);

  FlowSpec bad_dt = spec;
  bad_dt.dt = 0.0;
  EXPECT_THROW(integrate_md_flow(bad_dt), std::invalid_argument);

  FlowSpec indicator = spec;
  indicator.g = Regularizer::simplex(1.0);
  EXPECT_THROW(integrate_md_flow(indicator), std::invalid_argument);

  FlowSpec outside = spec;
  outside.geom = Geometry::negative_entropy(2);
  outside.theta0 = (Vector(2) << 1.0, -0.5).finished();
  EXPECT_THROW(integrate_md_flow(outside), std::invalid_argument);
}

TEST(FlowOptimum, ClosedFormComposite) {
  RngStream rng(21);
  const Eigen::Index d = 4;
  const SpdMatrix sigma = testing::random_spd(rng, d);
  const QuadraticProblem p =
      QuadraticProblem::from_optimum(sigma, testing::random_vector(rng, d));
  const Vector center = testing::random_vector(rng, d);
  FlowSpec spec;
  spec.geom = Geometry::euclidean(d);
  spec.f = &p;
  spec.g = Regularizer::quadratic_l2(0.9, center);
  spec.theta0 = Vector::Zero(d);
  const Vector opt = flow_optimum(spec);
  // stationarity: grad f + grad g = 0
  EXPECT_LE((p.grad(opt) + spec.g.smooth_grad(opt)).norm(), 1e-10);
}

}  // namespace
}  // namespace sda
