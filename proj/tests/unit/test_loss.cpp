#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "abode/ad/grad_check.hpp"
#include "abode/error.hpp"
#include "abode/loss.hpp"
#include "abode/rng.hpp"
#include "oracles.hpp"

namespace {

using namespace abode;
using namespace abode::loss;
using ad::Array;

TEST(Bessel, AgreesWithQuadrature) {
  for (double x : {0.0, 0.5, 1.0, 3.0, 10.0, 25.0, 50.0}) {
    const double q = oracle::bessel_i0_quadrature(x);
    EXPECT_LT(std::abs(bessel_i0(x) - q) / q, 1e-8) << x;
  }
  EXPECT_NEAR(bessel_i0(10.0), 2815.7166, 1e-4);
}

TEST(VonMises, ReferenceValue) {
  EXPECT_NEAR(von_mises_nll(1.2, 1.2, 10.0), -0.2192, 1e-3);
  const double oracle = -10.0 + std::log(2.0 * std::numbers::pi * oracle::bessel_i0_quadrature(10.0));
  EXPECT_NEAR(von_mises_nll(0.3, 0.3, 10.0), oracle, 1e-10);
}

TEST(VonMises, UniformLimit) {
  for (double theta : {-2.0, 0.0, 1.0, 3.0}) EXPECT_NEAR(von_mises_nll(theta, 0.4, 1e-9), std::log(2.0 * std::numbers::pi), 1e-8);
}

TEST(VonMises, PeriodicInAngle) {
  EXPECT_NEAR(von_mises_nll(0.1, 0.1 + 2.0 * std::numbers::pi, 10.0), von_mises_nll(0.1, 0.1, 10.0), 1e-12);
}

TEST(Radius, MinimumAndStandardizedResidual) {
  const double m = radius_nll(1.5, 1.5, 0.1);
  EXPECT_NEAR(m, 0.5 * std::log(0.2 * std::numbers::pi), 1e-15);
  EXPECT_NEAR(m, -0.2324, 5e-5);
  EXPECT_NEAR(radius_nll(1.5 + std::sqrt(0.1), 1.5, 0.1) - m, 0.5, 1e-15);
  EXPECT_NEAR(radius_nll(2.0, 2.0, 1.0 / (2.0 * std::numbers::pi)), 0.0, 1e-15);
}

TEST(SeqLoss, UniformLogits) {
  const std::vector<std::size_t> labels{0, 5, 19};
  EXPECT_NEAR(seq_loss(Array(3, 20), labels), std::log(20.0), 1e-15);
}

TEST(SeqLoss, SaturatedCorrectClass) {
  Array logits(1, 20);
  logits(0, 7) = 50.0;
  const std::vector<std::size_t> labels{7};
  EXPECT_NEAR(seq_loss(logits, labels), 0.0, 1e-20);
}

TEST(SeqLoss, MeanOverResidues) {
  Rng rng(2);
  Array logits(2, 20);
  for (double& v : logits.values()) v = rng.normal();
  auto single = [&](std::size_t row, std::size_t label) {
    double s = 0.0;
    for (std::size_t c = 0; c < 20; ++c) s += std::exp(logits(row, c));
    return std::log(s) - logits(row, label);
  };
  const std::vector<std::size_t> labels{4, 11};
  EXPECT_NEAR(seq_loss(logits, labels), 0.5 * (single(0, 4) + single(1, 11)), 1e-14);
}

TEST(SeqLoss, RejectsBadLabel) {
  const std::vector<std::size_t> labels{20};
  EXPECT_THROW(seq_loss(Array(1, 20), labels), ConfigError);
}

graph::Truth toy_truth(std::size_t m, Rng& rng) {
  graph::Truth t;
  t.placement = Array(m, 9);
  t.mask = Array(m, 9, 1.0);
  for (std::size_t i = 0; i < m; ++i) {
    t.labels.push_back(rng.below(20));
    for (std::size_t p = 0; p < 3; ++p) {
      t.placement(i, 3 * p) = rng.uniform(1.2, 1.6);
      t.placement(i, 3 * p + 1) = rng.uniform(0.5, 2.5);
      t.placement(i, 3 * p + 2) = rng.uniform(-3.0, 3.0);
    }
  }
  return t;
}

TEST(TotalLoss, PerfectPredictionHitsTermMinima) {
  Rng rng(4);
  const graph::Truth truth = toy_truth(5, rng);
  Array z(5, 29);
  for (std::size_t i = 0; i < 5; ++i) {
    z(i, truth.labels[i]) = 50.0;
    for (std::size_t c = 0; c < 9; ++c) z(i, 20 + c) = truth.placement(i, c);
  }
  const LossConfig cfg;
  const LossBreakdown b = total_loss(z, truth, cfg, LossMode::Codesign);
  const double vm_min = -10.0 + std::log(2.0 * std::numbers::pi * oracle::bessel_i0_quadrature(10.0));
  // six angles (alpha, gamma per track) and three radii per residue
  EXPECT_NEAR(b.seq, 0.0, 1e-15);
  EXPECT_NEAR(b.angle, 6.0 * vm_min, 1e-10);
  EXPECT_NEAR(b.radius, 3.0 * 0.5 * std::log(0.2 * std::numbers::pi), 1e-12);
  EXPECT_NEAR(b.total, b.seq + 0.8 * (b.angle + b.radius), 1e-12);
}

TEST(TotalLoss, LambdaZeroAndSequenceOnly) {
  Rng rng(5);
  const graph::Truth truth = toy_truth(4, rng);
  Array z(4, 29);
  for (double& v : z.values()) v = rng.normal();
  LossConfig cfg;
  cfg.lambda = 0.0;
  const LossBreakdown a = total_loss(z, truth, cfg, LossMode::Codesign);
  EXPECT_EQ(a.total, a.seq);
  const LossBreakdown b = total_loss(z, truth, LossConfig{}, LossMode::SequenceOnly);
  EXPECT_EQ(b.angle, 0.0);
  EXPECT_EQ(b.radius, 0.0);
  EXPECT_EQ(b.total, b.seq);
}

TEST(TotalLoss, MaskedEntriesDoNotCount) {
  Rng rng(6);
  graph::Truth truth = toy_truth(3, rng);
  Array z(3, 29);
  for (double& v : z.values()) v = rng.normal();
  const LossBreakdown full = total_loss(z, truth, LossConfig{}, LossMode::Codesign);
  truth.mask(2, 2) = 0.0;
  z(2, 22) += 1.0;
  truth.placement(2, 2) = 0.0;
  const LossBreakdown masked = total_loss(z, truth, LossConfig{}, LossMode::Codesign);
  EXPECT_NE(full.angle, masked.angle);
  z(2, 22) += 0.5;  // a masked entry has no influence at all
  EXPECT_EQ(total_loss(z, truth, LossConfig{}, LossMode::Codesign).angle, masked.angle);
}

TEST(TotalLoss, TapeGradientMatchesFiniteDifferences) {
  Rng rng(7);
  const graph::Truth truth = toy_truth(4, rng);
  Array z(4, 29);
  for (double& v : z.values()) v = rng.normal();
  const std::vector<Array> point{z};
  const ad::ScalarFunction f = [&](ad::Tape& tape, std::span<const ad::Var> v) {
    return total_loss(tape, v[0], truth, LossConfig{}, LossMode::Codesign).total;
  };
  EXPECT_LT(ad::grad_check(f, point).max_relative_error, 1e-6);
}

TEST(Config, Validation) {
  LossConfig c;
  c.sigma_r2 = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = LossConfig{};
  c.kappa = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

}  // namespace
