#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "abode/ad/grad_check.hpp"
#include "abode/ad/tape.hpp"
#include "abode/error.hpp"
#include "abode/rng.hpp"

namespace {

using namespace abode;
using namespace abode::ad;

Array random_array(Rng& rng, std::size_t r, std::size_t c, double lo = -1.0, double hi = 1.0) {
  Array a(r, c);
  for (double& v : a.values()) v = rng.uniform(lo, hi);
  return a;
}

TEST(Primitives, MatmulShape) {
  Tape tape;
  const Var a = tape.constant(Array::from_rows({{1, 2, 3}, {4, 5, 6}}));
  const Var b = tape.constant(Array::column({1, 0, -1}));
  const Var c = matmul(a, b);
  ASSERT_EQ(c.rows(), 2u);
  ASSERT_EQ(c.cols(), 1u);
  EXPECT_EQ(c.value()(0, 0), -2.0);
  EXPECT_EQ(c.value()(1, 0), -2.0);
}

TEST(Primitives, MatmulRejectsMismatch) {
  Tape tape;
  const Var a = tape.constant(Array(2, 3));
  const Var b = tape.constant(Array(2, 1));
  EXPECT_THROW(matmul(a, b), ShapeError);
}

TEST(Primitives, SoftmaxOfEqualEntries) {
  Tape tape;
  const Var s = softmax_rows(tape.constant(Array::row({0.0, 0.0})));
  EXPECT_DOUBLE_EQ(s.value()(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(s.value()(0, 1), 0.5);
}

TEST(Primitives, SoftmaxIsStableForLargeLogits) {
  Tape tape;
  const Var s = softmax_rows(tape.constant(Array::row({1000.0, 0.0})));
  EXPECT_TRUE(s.value().all_finite());
  EXPECT_NEAR(s.value()(0, 0), 1.0, 1e-15);
}

TEST(Primitives, CrossProductRightHanded) {
  Tape tape;
  const Var c = cross3(tape.constant(Array::row({1, 0, 0})), tape.constant(Array::row({0, 1, 0})));
  EXPECT_EQ(c.value(), Array::row({0, 0, 1}));
}

TEST(Primitives, SegmentSumAndGather) {
  Tape tape;
  const Var a = tape.constant(Array::from_rows({{1, 2}, {3, 4}, {5, 6}}));
  const Var g = gather_rows(a, make_index({2, 0, 2}));
  EXPECT_EQ(g.value(), Array::from_rows({{5, 6}, {1, 2}, {5, 6}}));
  const Var s = segment_sum(g, make_index({1, 0, 1}), 3);
  EXPECT_EQ(s.value(), Array::from_rows({{1, 2}, {10, 12}, {0, 0}}));
}

TEST(Primitives, NormOfZeroRowHasZeroAdjoint) {
  Tape tape;
  const Var x = tape.leaf(Array::from_rows({{0, 0, 0}, {3, 4, 0}}));
  const Gradients g = tape.backward(sum(norm_rows(x)));
  EXPECT_EQ(g[x](0, 0), 0.0);
  EXPECT_NEAR(g[x](1, 0), 0.6, 1e-15);
  EXPECT_NEAR(g[x](1, 1), 0.8, 1e-15);
}

TEST(Backward, QuadraticGradient) {
  Tape tape;
  const Var x = tape.leaf(Array::row({1.0, 2.0}));
  const Gradients g = tape.backward(sum(x * x));
  EXPECT_EQ(g[x], Array::row({2.0, 4.0}));
}

TEST(Backward, UnusedLeafGetsZero) {
  Tape tape;
  const Var x = tape.leaf(Array::row({1.0, 2.0}));
  const Var w = tape.leaf(Array(2, 2, 3.0));
  const Gradients g = tape.backward(sum(exp(x)));
  EXPECT_EQ(g[w], Array(2, 2));
}

TEST(Backward, RejectsNonScalarLoss) {
  Tape tape;
  const Var x = tape.leaf(Array::row({1.0, 2.0}));
  EXPECT_THROW(tape.backward(x), ShapeError);
}

TEST(Backward, RepeatedUseAccumulates) {
  Tape tape;
  const Var x = tape.leaf(Array::scalar(3.0));
  const Var y = x * x * x;  // 3 x^2 = 27
  EXPECT_DOUBLE_EQ(tape.backward(y)[x].item(), 27.0);
}

TEST(Backward, ReplayReproducesValues) {
  Rng rng(3);
  Tape tape;
  const Var a = tape.leaf(random_array(rng, 3, 4));
  const Var b = tape.leaf(random_array(rng, 4, 2));
  const Var y = sum(tanh(matmul(a, b)) * cos(matmul(a, b)));
  const std::vector<Array> values = tape.replay();
  EXPECT_EQ(values.back(), y.value());
}

// Each primitive is compared against central differences on its own.
struct UnaryCase {
  const char* name;
  Var (*fn)(Var);
  double lo, hi;
};

class UnaryGrad : public ::testing::TestWithParam<UnaryCase> {};

TEST_P(UnaryGrad, MatchesCentralDifferences) {
  const UnaryCase c = GetParam();
  Rng rng(11);
  const std::vector<Array> point{random_array(rng, 3, 4, c.lo, c.hi)};
  // uneven weights so that row-normalized outputs still have a non-trivial gradient
  const ScalarFunction f = [&](Tape& tape, std::span<const Var> v) {
    const Var y = c.fn(v[0]);
    Array w(y.rows(), y.cols());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = 0.3 + 0.17 * static_cast<double>(i % 7);
    return sum(y * tape.constant(w));
  };
  EXPECT_LT(grad_check(f, point).max_relative_error, 1e-7) << c.name;
}

Var sqrt_fn(Var a) { return sqrt(a); }
Var log_fn(Var a) { return log(a); }
Var exp_fn(Var a) { return exp(a); }
Var cos_fn(Var a) { return cos(a); }
Var sin_fn(Var a) { return sin(a); }
Var tanh_fn(Var a) { return tanh(a); }
Var acos_fn(Var a) { return acos_clamped(a); }
Var softmax_fn(Var a) { return softmax_rows(a); }
Var log_softmax_fn(Var a) { return log_softmax_rows(a); }
Var transpose_fn(Var a) { return transpose(a); }
Var row_sum_fn(Var a) { return row_sum(a) * row_sum(a); }
Var slice_fn(Var a) { return slice_cols(slice_rows(a, 1, 2), 1, 3); }
Var norm_fn(Var a) { return norm_rows(a); }

INSTANTIATE_TEST_SUITE_P(
    Ops, UnaryGrad,
    ::testing::Values(UnaryCase{"sqrt", sqrt_fn, 0.5, 2.0}, UnaryCase{"log", log_fn, 0.5, 2.0},
                      UnaryCase{"exp", exp_fn, -1, 1}, UnaryCase{"cos", cos_fn, -2, 2},
                      UnaryCase{"sin", sin_fn, -2, 2}, UnaryCase{"tanh", tanh_fn, -2, 2},
                      UnaryCase{"acos", acos_fn, -0.9, 0.9}, UnaryCase{"softmax", softmax_fn, -2, 2},
                      UnaryCase{"log_softmax", log_softmax_fn, -2, 2}, UnaryCase{"transpose", transpose_fn, -1, 1},
                      UnaryCase{"row_sum", row_sum_fn, -1, 1}, UnaryCase{"slice", slice_fn, -1, 1},
                      UnaryCase{"norm_rows", norm_fn, -1, 1}),
    [](const auto& info) { return std::string(info.param.name); });

TEST(BinaryGrad, MatmulDivAtan2Cross) {
  Rng rng(12);
  const std::vector<Array> point{random_array(rng, 4, 3), random_array(rng, 4, 3, 0.5, 1.5), random_array(rng, 3, 3)};
  const ScalarFunction f = [](Tape&, std::span<const Var> v) {
    const Var a = matmul(v[0], v[2]);
    const Var q = a / v[1];
    const Var t = atan2(v[0], v[1]);
    const Var c = cross3(v[0], v[1]);
    const Var g = gather_rows(concat_cols({q, t, c}), make_index({3, 0, 0, 2}));
    const Var s = segment_sum(g, make_index({1, 1, 0, 2}), 3);
    return sum(scale_rows(s, row_sum(s)) * 0.5) + sum(concat_rows({a, c}) * concat_rows({c, a}));
  };
  EXPECT_LT(grad_check(f, point).max_relative_error, 1e-7);
}

TEST(GradCheck, SumOfSinesAgainstCosine) {
  // oracle: d/dx sum(sin x) = cos x, compared by hand as well as through grad_check
  Rng rng(21);
  const std::vector<Array> point{random_array(rng, 1, 8)};
  const ScalarFunction f = [](Tape&, std::span<const Var> v) { return sum(sin(v[0])); };
  EXPECT_LT(grad_check(f, point).max_relative_error, 1e-7);
  std::vector<Array> grads;
  value_and_grad(f, point, &grads);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(grads[0][i], std::cos(point[0][i]), 1e-15);
}

TEST(GradCheck, ZeroGradientAtOrigin) {
  const std::vector<Array> point{Array(1, 3)};
  const ScalarFunction f = [](Tape&, std::span<const Var> v) { return sum(v[0] * v[0]); };
  EXPECT_LE(grad_check(f, point).max_relative_error, 1e-8);
}

TEST(GradCheck, DetectsWrongGradient) {
  // sqrt near zero with a huge step is badly approximated; the check must report it
  const std::vector<Array> point{Array::scalar(1e-4)};
  const ScalarFunction f = [](Tape&, std::span<const Var> v) { return sum(sqrt(v[0])); };
  GradCheckOptions opt;
  opt.step = 9e-5;
  EXPECT_GT(grad_check(f, point, opt).max_relative_error, 1e-3);
}

TEST(Determinism, RepeatedEvaluationIsBitIdentical) {
  Rng rng(5);
  const std::vector<Array> point{random_array(rng, 5, 5), random_array(rng, 5, 2)};
  const ScalarFunction f = [](Tape&, std::span<const Var> v) {
    return sum(log_softmax_rows(matmul(tanh(v[0]), v[1])));
  };
  std::vector<Array> g1, g2;
  const double a = value_and_grad(f, point, &g1);
  const double b = value_and_grad(f, point, &g2);
  EXPECT_EQ(a, b);
  EXPECT_EQ(g1, g2);
}

}  // namespace
