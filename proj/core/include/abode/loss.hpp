#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "abode/ad/tape.hpp"
#include "abode/graph.hpp"

namespace abode::loss {

using ad::Var;

struct LossConfig {
  double lambda = 0.8;
  double kappa = 10.0;
  double sigma_r2 = 0.1;

  void validate() const;
};

enum class LossMode { Codesign, SequenceOnly };

struct LossBreakdown {
  double total = 0.0;
  double seq = 0.0;
  double angle = 0.0;
  double radius = 0.0;
};

/// Modified Bessel function of the first kind, order 0, by power series.
double bessel_i0(double x);

/// -[kappa cos(theta - mu) - ln(2 pi I0(kappa))] for one angle.
double von_mises_nll(double theta, double mu, double kappa);
/// ln(2 pi sigma_r2) / 2 + (r - r_true)^2 / (2 sigma_r2) for one radius.
double radius_nll(double r, double r_true, double sigma_r2);

/// Mean over residues of -log softmax(logits)[label]; throws for labels >= 20.
double seq_loss(const ad::Array& logits, std::span<const std::size_t> labels);

/// Tape forms. `logits` is m x 20, `s` and `s_true` are m x 9.
Var seq_loss(Var logits, std::span<const std::size_t> labels);
/// Sum over the three tracks and both angle kinds, averaged over residues.
Var angle_loss(Var s, const ad::Array& s_true, const ad::Array& mask, double kappa);
/// Sum over the three tracks, averaged over residues.
Var radius_loss(Var s, const ad::Array& s_true, const ad::Array& mask, double sigma_r2);

struct LossVars {
  Var total;
  Var seq;
  Var angle;
  Var radius;
  LossBreakdown values() const;
};

/// seq + lambda (angle + radius) on z(T) (m x 29); sequence-only mode keeps seq.
LossVars total_loss(ad::Tape& tape, Var z_end, const graph::Truth& truth, const LossConfig& config, LossMode mode);
LossBreakdown total_loss(const ad::Array& z_end, const graph::Truth& truth, const LossConfig& config, LossMode mode);

}  // namespace abode::loss
