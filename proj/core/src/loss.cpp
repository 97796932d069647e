#include "abode/loss.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "abode/error.hpp"

namespace abode::loss {

using ad::Array;
using ad::Tape;

namespace {

void check_labels(std::span<const std::size_t> labels, std::size_t rows) {
  if (labels.size() != rows) {
    throw ShapeError("loss: " + std::to_string(labels.size()) + " labels for " + std::to_string(rows) + " residues");
  }
  for (std::size_t l : labels)
    if (l >= graph::kLabelDim) throw ConfigError("label index " + std::to_string(l) + " is outside the alphabet");
}

// Picks columns of one kind (0 r, 1 alpha, 2 gamma) from an m x 9 block as m x 3.
Array kind_selector(std::initializer_list<std::size_t> kinds) {
  Array sel(geometry::kFeatureDim, geometry::kTracks * kinds.size());
  std::size_t col = 0;
  for (std::size_t kind : kinds)
    for (std::size_t p = 0; p < geometry::kTracks; ++p) sel(p * 3 + kind, col++) = 1.0;
  return sel;
}

Array select(const Array& a, const Array& sel) {
  Array out(a.rows(), sel.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t k = 0; k < sel.rows(); ++k)
      if (a(r, k) != 0.0)
        for (std::size_t c = 0; c < sel.cols(); ++c) out(r, c) += a(r, k) * sel(k, c);
  return out;
}

void check_block(Var s, const Array& s_true, const Array& mask) {
  if (s.cols() != geometry::kFeatureDim || !s_true.same_shape(s.value()) || !mask.same_shape(s_true)) {
    throw ShapeError("structure loss: prediction " + ad::shape_string(s.value()) + ", truth " +
                     ad::shape_string(s_true) + ", mask " + ad::shape_string(mask));
  }
}

}  // namespace

void LossConfig::validate() const {
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
  if (!(kappa > 0.0)) throw ConfigError("kappa must be positive");
  if (!(sigma_r2 > 0.0)) throw ConfigError("sigma_r2 must be positive");
}

double bessel_i0(double x) {
  // sum_k ((x/2)^k / k!)^2
  const double q = 0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * static_cast<double>(k));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

double von_mises_nll(double theta, double mu, double kappa) {
  if (!(kappa > 0.0)) throw ConfigError("von_mises_nll: kappa must be positive");
  return -kappa * std::cos(theta - mu) + std::log(2.0 * std::numbers::pi * bessel_i0(kappa));
}

double radius_nll(double r, double r_true, double sigma_r2) {
  if (!(sigma_r2 > 0.0)) throw ConfigError("radius_nll: sigma_r2 must be positive");
  const double d = r - r_true;
  return 0.5 * std::log(2.0 * std::numbers::pi * sigma_r2) + d * d / (2.0 * sigma_r2);
}

double seq_loss(const Array& logits, std::span<const std::size_t> labels) {
  Tape tape;
  return seq_loss(tape.constant(logits), labels).value().item();
}

Var seq_loss(Var logits, std::span<const std::size_t> labels) {
  Tape& tape = *logits.tape();
  const std::size_t m = logits.rows();
  if (logits.cols() != graph::kLabelDim) throw ShapeError("seq_loss: logits must have 20 columns");
  check_labels(labels, m);
  if (m == 0) throw ShapeError("seq_loss: no residues");
  Array pick(m, graph::kLabelDim);
  for (std::size_t i = 0; i < m; ++i) pick(i, labels[i]) = -1.0 / static_cast<double>(m);
  return ad::sum(ad::log_softmax_rows(logits) * tape.constant(pick));
}

Var angle_loss(Var s, const Array& s_true, const Array& mask, double kappa) {
  if (!(kappa > 0.0)) throw ConfigError("angle_loss: kappa must be positive");
  check_block(s, s_true, mask);
  Tape& tape = *s.tape();
  const std::size_t m = s.rows();
  const Array sel = kind_selector({1, 2});
  const Array mu = select(s_true, sel);
  const Array w = select(mask, sel);
  const double norm = std::log(2.0 * std::numbers::pi * bessel_i0(kappa));
  double count = 0.0;
  for (double v : w.values()) count += v;
  const Var theta = ad::matmul(s, tape.constant(sel));
  const Var cosine = ad::cos(theta - tape.constant(mu));
  const Var fit = ad::scale(ad::sum(cosine * tape.constant(w)), -kappa / static_cast<double>(m));
  return fit + tape.constant(norm * count / static_cast<double>(m));
}

Var radius_loss(Var s, const Array& s_true, const Array& mask, double sigma_r2) {
  if (!(sigma_r2 > 0.0)) throw ConfigError("radius_loss: sigma_r2 must be positive");
  check_block(s, s_true, mask);
  Tape& tape = *s.tape();
  const std::size_t m = s.rows();
  const Array sel = kind_selector({0});
  const Array target = select(s_true, sel);
  const Array w = select(mask, sel);
  double count = 0.0;
  for (double v : w.values()) count += v;
  const Var diff = ad::matmul(s, tape.constant(sel)) - tape.constant(target);
  const Var fit = ad::scale(ad::sum(diff * diff * tape.constant(w)), 1.0 / (2.0 * sigma_r2 * static_cast<double>(m)));
  const double norm = 0.5 * std::log(2.0 * std::numbers::pi * sigma_r2);
  return fit + tape.constant(norm * count / static_cast<double>(m));
}

LossBreakdown LossVars::values() const {
  return {total.value().item(), seq.value().item(), angle.value().item(), radius.value().item()};
}

LossVars total_loss(Tape& tape, Var z_end, const graph::Truth& truth, const LossConfig& config, LossMode mode) {
  config.validate();
  if (z_end.cols() != graph::kStateDim || z_end.rows() != truth.labels.size()) {
    throw ShapeError("total_loss: state " + ad::shape_string(z_end.value()) + " for " +
                     std::to_string(truth.labels.size()) + " labels");
  }
  LossVars out;
  out.seq = seq_loss(ad::slice_cols(z_end, 0, graph::kLabelDim), truth.labels);
  if (mode == LossMode::SequenceOnly) {
    out.angle = tape.constant(0.0);
    out.radius = tape.constant(0.0);
    out.total = out.seq;
    return out;
  }
  const Var s = ad::slice_cols(z_end, graph::kLabelDim, geometry::kFeatureDim);
  out.angle = angle_loss(s, truth.placement, truth.mask, config.kappa);
  out.radius = radius_loss(s, truth.placement, truth.mask, config.sigma_r2);
  out.total = out.seq + ad::scale(out.angle + out.radius, config.lambda);
  return out;
}

LossBreakdown total_loss(const Array& z_end, const graph::Truth& truth, const LossConfig& config, LossMode mode) {
  Tape tape;
  return total_loss(tape, tape.constant(z_end), truth, config, mode).values();
}

}  // namespace abode::loss
