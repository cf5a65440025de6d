#include <gtest/gtest.h>

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "deeposg/error.hpp"
#include "deeposg/integrate.hpp"
#include "deeposg/rng.hpp"
#include "deeposg/systems.hpp"
#include "support.hpp"

using namespace deeposg;

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

/// Matrix-exponential solution of u' = A u + (3, 3) about its fixed point (1, 1).
Vector linear_expm_oracle(const Vector& u0, double t) {
  Matrix a(2, 2);
  a << 1, -4, 4, -7;
  const Matrix e = (a * t).exp();
  const Vector fixed = vec2(1, 1);
  return fixed + e * (u0 - fixed);
}

}  // namespace

TEST(Registry, AllNamedSystemsBuild) {
  for (const auto& name : system_names()) {
    const OdeSystem sys = make_system(name);
    EXPECT_EQ(sys.name, name);
    EXPECT_GT(sys.dim, 0);
    EXPECT_FALSE(sys.box.empty()) << name;
  }
  EXPECT_THROW(make_system("lorenz"), ConfigError);
}

TEST(Registry, LinearFixedPointHasZeroRhs) {
  const OdeSystem sys = make_system("linear");
  EXPECT_EQ(sys.rhs(vec2(1, 1)), Vector::Zero(2));
  EXPECT_EQ(linear_system_matrix(), (Matrix(2, 2) << 1, -4, 4, -7).finished());
}

TEST(Registry, RobertsonRatesSumToZero) {
  const OdeSystem sys = make_system("robertson");
  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    const Vector u = sys.sample_state(rng);
    EXPECT_NEAR(sys.rhs(u).sum(), 0.0, 1e-9 * (1.0 + sys.rhs(u).cwiseAbs().maxCoeff()));
  }
}

TEST(Registry, JacobiansMatchFiniteDifferences) {
  for (const auto& name : system_names()) {
    const OdeSystem sys = make_system(name);
    Rng rng(3);
    for (int trial = 0; trial < 5; ++trial) {
      const Vector u = sys.sample_state(rng);
      const Matrix jac = sys.jacobian(u);
      ASSERT_EQ(jac.rows(), sys.dim);
      ASSERT_EQ(jac.cols(), sys.dim);
      for (int k = 0; k < sys.dim; ++k) {
        const double h = 1e-6 * std::max(1.0, std::abs(u(k)));
        Vector up = u, um = u;
        up(k) += h;
        um(k) -= h;
        const Vector col = (sys.rhs(up) - sys.rhs(um)) / (2 * h);
        const double scale = std::max(1.0, jac.col(k).cwiseAbs().maxCoeff());
        EXPECT_LT((col - jac.col(k)).cwiseAbs().maxCoeff(), 1e-5 * scale)
            << name << " column " << k;
      }
    }
  }
}

TEST(Registry, SampledStatesLieInDomain) {
  for (const auto& name : system_names()) {
    const OdeSystem sys = make_system(name);
    Rng rng(4);
    for (int i = 0; i < 200; ++i) EXPECT_TRUE(sys.contains(sys.sample_state(rng))) << name;
  }
}

TEST(Registry, PendulumDomainIsNotTheWholeBox) {
  const OdeSystem sys = make_system("damped_pendulum");
  ASSERT_TRUE(static_cast<bool>(sys.inside));
  Rng rng(5);
  int outside = 0;
  for (int i = 0; i < 2000; ++i) {
    if (!sys.contains(sys.box.sample(rng))) ++outside;
  }
  EXPECT_GT(outside, 0);
}

TEST(Registry, RobertsonSamplesConserveMass) {
  const OdeSystem sys = make_system("robertson");
  Rng rng(6);
  for (int i = 0; i < 100; ++i) {
    const Vector u = sample_robertson_state(sys, rng);
    EXPECT_NEAR(u.sum(), 1.0, 1e-12);
    EXPECT_GE(u.minCoeff(), 0.0);
  }
}

TEST(Rk4, ZeroRhsKeepsState) {
  const RhsFn zero = [](const Vector& u) { return Vector(Vector::Zero(u.size())); };
  const Vector u0 = vec2(0.3, -2.0);
  EXPECT_EQ(rk4_integrate(zero, u0, 3.7, 0.1), u0);
}

TEST(Rk4, LinearFixedPointIsStationary) {
  const OdeSystem sys = make_system("linear");
  for (double t : {0.1, 1.0, 5.0}) EXPECT_EQ(rk4_integrate(sys, vec2(1, 1), t, 1e-2), vec2(1, 1));
}

TEST(Rk4, LinearMatchesMatrixExponential) {
  const OdeSystem sys = make_system("linear");
  const Vector u0 = vec2(2, 1);
  const Vector oracle = linear_expm_oracle(u0, 1.0);
  EXPECT_LT((rk4_integrate(sys, u0, 1.0, 1e-3) - oracle).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((linear_exact_flow(u0, 1.0) - oracle).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Rk4, FourthOrderConvergence) {
  const OdeSystem sys = make_system("linear");
  const Vector u0 = vec2(2, 0.5);
  const Vector oracle = linear_expm_oracle(u0, 1.0);
  const double e1 = (rk4_integrate(sys, u0, 1.0, 1e-2) - oracle).norm();
  const double e2 = (rk4_integrate(sys, u0, 1.0, 5e-3) - oracle).norm();
  EXPECT_GE(e1 / e2, 12.0);
}

TEST(Rk4, LastStepLandsOnHorizon) {
  const RhsFn one = [](const Vector& u) { return Vector(Vector::Ones(u.size())); };
  EXPECT_NEAR(rk4_integrate(one, Vector::Zero(1), 0.35, 0.1)(0), 0.35, 1e-15);
}

TEST(Rk4, DivergenceReportsTime) {
  const RhsFn blowup = [](const Vector& u) { return Vector(u.array().square()); };
  try {
    rk4_integrate(blowup, Vector::Ones(1), 5.0, 0.01);
    FAIL() << "expected divergence";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("t = "), std::string::npos) << e.what();
  }
}

TEST(Stiff, ZeroRhsKeepsState) {
  const RhsFn zero = [](const Vector& u) { return Vector(Vector::Zero(u.size())); };
  const JacobianFn jz = [](const Vector& u) { return Matrix(Matrix::Zero(u.size(), u.size())); };
  const Vector u0 = vec2(0.7, 4.0);
  EXPECT_EQ(stiff_integrate(zero, jz, u0, 2.0, 1e-8), u0);
}

TEST(Stiff, ScalarDecayMatchesExponential) {
  const RhsFn f = [](const Vector& u) { return Vector(-1e3 * u); };
  const JacobianFn j = [](const Vector&) { return Matrix(Matrix::Constant(1, 1, -1e3)); };
  StiffStats stats;
  const double tol = 1e-8;
  const double got = stiff_integrate(f, j, Vector::Ones(1), 0.01, tol, &stats)(0);
  EXPECT_NEAR(got, std::exp(-10.0), tol);
  EXPECT_GT(stats.accepted, 0);
}

TEST(Stiff, RobertsonConservesMassUpToTen) {
  const OdeSystem sys = make_system("robertson");
  Vector u0(3);
  u0 << 1, 0, 0;
  for (double t : {1e-3, 0.1, 1.0, 10.0}) {
    const Vector u = stiff_integrate(sys, u0, t, 1e-7);
    EXPECT_NEAR(u.sum(), 1.0, 1e-6) << "T=" << t;
    EXPECT_TRUE(u.allFinite());
  }
}

TEST(Stiff, AgreesWithRk4OnNonStiffLinear) {
  const OdeSystem sys = make_system("linear");
  const Vector u0 = vec2(0.2, 1.7);
  const Vector a = stiff_integrate(sys, u0, 0.5, 1e-9);
  EXPECT_LT((a - linear_expm_oracle(u0, 0.5)).norm(), 1e-5);
}

TEST(Flow, MakeFlowDispatchesIntegrator) {
  const OdeSystem sys = make_system("linear");
  IntegratorSpec spec;
  spec.tau = 1e-3;
  const FlowFn flow = make_flow(sys, spec);
  const Vector u0 = vec2(0.5, 1.5);
  EXPECT_LT((flow(u0, 0.3) - linear_expm_oracle(u0, 0.3)).norm(), 1e-11);
  EXPECT_EQ(flow(u0, 0.0), u0);
}

TEST(Flow, LinearSemigroupThroughIntegrator) {
  const OdeSystem sys = make_system("linear");
  const FlowFn flow = make_flow(sys, IntegratorSpec{});
  Rng rng(8);
  for (int i = 0; i < 10; ++i) {
    const Vector u0 = sys.sample_state(rng);
    const double d1 = rng.uniform(0.05, 0.15), d2 = rng.uniform(0.05, 0.15);
    EXPECT_LT((flow(flow(u0, d1), d2) - flow(u0, d1 + d2)).norm(), 1e-10);
  }
}
