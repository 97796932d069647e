#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "abode/error.hpp"
#include "abode/ode.hpp"

namespace {

using namespace abode;
using namespace abode::ode;

SolverConfig fixed(Method m, double t_end, std::size_t steps) {
  SolverConfig c;
  c.method = m;
  c.t_end = t_end;
  c.steps = steps;
  return c;
}

const Rhs kDecay = [](double, const Array& z) { return -1.0 * z; };

TEST(Integrate, HeunDecayMatchesStepFactor) {
  const Trajectory t = integrate(kDecay, Array::scalar(1.0), fixed(Method::HeunFixed, 1.0, 10));
  const double factor = 1.0 - 0.1 + 0.1 * 0.1 / 2.0;
  EXPECT_NEAR(t.final_state().item(), std::pow(factor, 10), 1e-14);
  EXPECT_NEAR(t.final_state().item(), 0.36854, 1e-5);
  EXPECT_EQ(t.z.size(), 11u);
  EXPECT_NEAR(t.t.back(), 1.0, 1e-15);
}

TEST(Integrate, ZeroDynamicsKeepsState) {
  const Rhs zero = [](double, const Array& z) { return Array(z.rows(), z.cols()); };
  const Array z0 = Array::row({1.5, -2.25, 3.0});
  for (Method m : {Method::HeunFixed, Method::Rk4Fixed, Method::EulerFixed, Method::HeunAdaptive}) {
    SolverConfig c = fixed(m, 200.0, 40);
    EXPECT_EQ(integrate(zero, z0, c).final_state(), z0) << method_name(m);
  }
}

TEST(Integrate, ConstantDynamicsIsExact) {
  const Rhs constant = [](double, const Array&) { return Array::row({0.5, -0.25}); };
  const Array z0 = Array::row({1.0, 2.0});
  for (Method m : {Method::HeunFixed, Method::Rk4Fixed, Method::EulerFixed, Method::HeunAdaptive}) {
    const Array end = integrate(constant, z0, fixed(m, 8.0, 16)).final_state();
    EXPECT_DOUBLE_EQ(end(0, 0), 1.0 + 0.5 * 8.0) << method_name(m);
    EXPECT_DOUBLE_EQ(end(0, 1), 2.0 - 0.25 * 8.0) << method_name(m);
  }
}

TEST(Integrate, Rk4IsAccurate) {
  const Array end = integrate(kDecay, Array::scalar(1.0), fixed(Method::Rk4Fixed, 1.0, 20)).final_state();
  EXPECT_NEAR(end.item(), std::exp(-1.0), 1e-7);
}

TEST(ConvergenceOrder, MatchesTheory) {
  const Array z0 = Array::scalar(1.0);
  const Array exact = Array::scalar(std::exp(-1.0));
  EXPECT_NEAR(convergence_order(kDecay, z0, exact, Method::HeunFixed, 1.0, 20), 2.0, 0.1);
  EXPECT_NEAR(convergence_order(kDecay, z0, exact, Method::Rk4Fixed, 1.0, 10), 4.0, 0.2);
  EXPECT_NEAR(convergence_order(kDecay, z0, exact, Method::EulerFixed, 1.0, 50), 1.0, 0.1);
}

TEST(Adaptive, AcceptedStepsMeetTolerance) {
  const Rhs stiffish = [](double t, const Array& z) { return Array::scalar(-3.0 * z.item() + std::cos(2.0 * t)); };
  SolverConfig c = fixed(Method::HeunAdaptive, 10.0, 2);
  c.rtol = 1e-5;
  c.atol = 1e-7;
  c.max_steps = 100000;
  const Trajectory t = integrate(stiffish, Array::scalar(2.0), c);
  ASSERT_FALSE(t.accepted.empty());
  for (std::size_t k = 0; k < t.accepted.size(); ++k) {
    EXPECT_LE(t.accepted[k].error, c.atol + c.rtol * t.z[k].max_abs());
    EXPECT_DOUBLE_EQ(t.accepted[k].tolerance, c.atol + c.rtol * t.z[k].max_abs());
  }
  EXPECT_NEAR(t.t.back(), 10.0, 1e-12);
  // closed form: z = (2 - 3/13) e^{-3t} + (3 cos 2t + 2 sin 2t) / 13
  const double exact = (2.0 - 3.0 / 13.0) * std::exp(-30.0) + (3.0 * std::cos(20.0) + 2.0 * std::sin(20.0)) / 13.0;
  EXPECT_NEAR(t.final_state().item(), exact, 1e-3);
}

TEST(Adaptive, MaxStepsExceeded) {
  SolverConfig c = fixed(Method::HeunAdaptive, 100.0, 1);
  c.rtol = 1e-12;
  c.atol = 1e-14;
  c.max_steps = 20;
  const Rhs osc = [](double t, const Array&) { return Array::scalar(std::sin(50.0 * t)); };
  EXPECT_THROW(integrate(osc, Array::scalar(0.0), c), SolverError);
}

TEST(Integrate, NonFiniteStateRaises) {
  const Rhs blow = [](double, const Array& z) { return Array::scalar(z.item() * z.item()); };
  EXPECT_THROW(integrate(blow, Array::scalar(1.0), fixed(Method::HeunFixed, 50.0, 10)), NonFiniteError);
}

TEST(Config, Validation) {
  SolverConfig c;
  c.steps = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SolverConfig{};
  c.t_end = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_EQ(parse_method("rk4_fixed"), Method::Rk4Fixed);
  EXPECT_THROW(parse_method("dopri"), ConfigError);
}

TEST(IntegrateWithGrad, ScalarGrowthMatchesFiniteDifferences) {
  // dz/dt = theta z, loss = z(T); oracle: central difference of the same discrete scheme
  const SolverConfig c = fixed(Method::HeunFixed, 1.0, 10);
  const RhsFactory factory = [](ad::Tape&, std::span<const Var> p) {
    return TapeRhs([theta = p[0]](double, Var z) { return ad::matmul(z, theta); });
  };
  const TapeLoss loss = [](ad::Tape&, Var z) { return ad::sum(z); };
  const double theta = 0.7;
  const std::vector<Array> params{Array::scalar(theta)};
  const GradResult r = integrate_with_grad(factory, Array::scalar(1.0), params, c, loss);
  auto end = [&](double th) {
    const Rhs f = [th](double, const Array& z) { return th * z; };
    return integrate(f, Array::scalar(1.0), c).final_state().item();
  };
  const double h = 1e-6;
  const double fd = (end(theta + h) - end(theta - h)) / (2.0 * h);
  EXPECT_NEAR(r.loss, end(theta), 1e-14);
  EXPECT_LT(std::abs(r.params[0].item() - fd) / std::abs(fd), 1e-6);
  // d z(T) / d z0 is the per-step factor to the 10th power
  const double step = 1.0 + 0.1 * theta + 0.5 * 0.01 * theta * theta;
  EXPECT_NEAR(r.z0.item(), std::pow(step, 10), 1e-12);
}

TEST(IntegrateWithGrad, IndependentLossGivesZero) {
  const RhsFactory factory = [](ad::Tape&, std::span<const Var>) {
    return TapeRhs([](double, Var z) { return -1.0 * z; });
  };
  const TapeLoss loss = [](ad::Tape&, Var z) { return ad::sum(z * z); };
  const std::vector<Array> params{Array(2, 2, 1.0)};
  const GradResult r = integrate_with_grad(factory, Array::row({1.0, 2.0}), params, fixed(Method::Rk4Fixed, 1.0, 4), loss);
  EXPECT_EQ(r.params[0], Array(2, 2));
}

TEST(IntegrateWithGrad, RejectsAdaptive) {
  const RhsFactory factory = [](ad::Tape&, std::span<const Var>) {
    return TapeRhs([](double, Var z) { return z; });
  };
  const TapeLoss loss = [](ad::Tape&, Var z) { return ad::sum(z); };
  EXPECT_THROW(integrate_with_grad(factory, Array::scalar(1.0), {}, fixed(Method::HeunAdaptive, 1.0, 4), loss),
               SolverError);
}

TEST(IntegrateOnTape, AgreesWithPlainSolver) {
  const Rhs plain = [](double t, const Array& z) { return -1.0 * z + Array::row({std::sin(t), std::cos(t)}); };
  for (Method m : {Method::HeunFixed, Method::Rk4Fixed, Method::EulerFixed}) {
    ad::Tape tape;
    const TapeRhs f = [](double t, Var z) {
      return -1.0 * z + z.tape()->constant(Array::row({std::sin(t), std::cos(t)}));
    };
    const Var end = integrate_on_tape(f, tape.leaf(Array::row({1.0, -1.0})), fixed(m, 2.0, 8));
    EXPECT_EQ(end.value(), integrate(plain, Array::row({1.0, -1.0}), fixed(m, 2.0, 8)).final_state()) << method_name(m);
  }
}

}  // namespace
