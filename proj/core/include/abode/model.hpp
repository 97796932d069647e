#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "abode/ad/tape.hpp"
#include "abode/graph.hpp"

namespace abode::model {

using ad::Array;
using ad::Var;

struct ModelConfig {
  std::array<std::size_t, 3> widths{128, 256, 64};
  std::size_t heads = 4;
  std::size_t cond_dim = 16;
  std::array<std::size_t, 2> encoder_widths{64, 16};
  bool framework_conditioning = false;

  /// z (29) + t/T (1) + h (cond_dim).
  std::size_t input_dim() const { return graph::kStateDim + 1 + cond_dim; }
  /// Throws ConfigError when a width is not divisible by the head count.
  void validate() const;
};

/// Per-matrix entry of the parameter layout.
struct TensorSpec {
  std::string name;
  std::size_t rows;
  std::size_t cols;
};

/// Weights of one attention layer, each stored in x out so that y = x W.
inline constexpr std::size_t kLayerTensors = 7;  // W1..W6 and the head mix

/// Ordered layout: 3 dynamics layers, the output projection, then (with
/// framework conditioning) 2 encoder layers.
std::vector<TensorSpec> param_layout(const ModelConfig& config);

struct ModelParams {
  ModelConfig config;
  std::vector<Array> tensors;

  std::size_t count() const { return tensors.size(); }
  std::size_t scalar_count() const;
  /// Throws ShapeError if the tensors do not match param_layout(config).
  void validate() const;
};

/// How the output projection starts out.
enum class OutputInit { Uniform, Zero };
const char* output_init_name(OutputInit init);
OutputInit parse_output_init(const std::string& name);

/// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per matrix, fan_in = rows.
/// With OutputInit::Zero the output projection is zero, so dz/dt = 0 at start.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed, OutputInit output = OutputInit::Uniform);
/// Every tensor zero.
ModelParams zero_params(const ModelConfig& config);

struct LayerVars {
  Var w1, w2, w3, w4, w5, w6, mix;
};

/// Parameter handles on one tape.
struct BoundParams {
  ModelConfig config;
  std::array<LayerVars, 3> layers;
  Var out;
  std::vector<LayerVars> encoder;
};
BoundParams bind_params(const ModelConfig& config, std::span<const Var> vars);

struct LayerOutput {
  Var out;
  Var alpha;     // E x H
  Var internal;  // N x D, messages over k = 1 edges
  Var external;  // N x D, messages over k = 2 edges
};

/// alpha_ij = softmax over incoming edges j of (W3 x_i)^T (W4 x_j + W6 e_ij) / sqrt(d), per head.
Var attention_coefficients(const LayerVars& w, std::size_t heads, Var x, Var edges, const graph::EdgeIndex& index);

/// out_i = W1 x_i + mix (sum_j alpha_ij (W2 x_j + W6 e_ij)), heads concatenated.
LayerOutput attention_layer(const LayerVars& w, std::size_t heads, Var x, Var edges, const graph::EdgeIndex& index);

/// dz/dt for the generated nodes (m x 29). `h` is 1 x cond_dim.
Var f_psi(const BoundParams& p, const graph::ComplexGraph& graph, double t, double t_end, Var z, Var h);

/// Mean-pooled encoding (1 x cond_dim) of the framework graph; zero when absent.
Var encode_framework(ad::Tape& tape, const BoundParams& p, const graph::FrameworkGraph* framework);

/// Conditioning vector used by f_psi: the framework encoding when enabled, zero otherwise.
Var conditioning(ad::Tape& tape, const BoundParams& p, const graph::ComplexGraph& graph);

/// Plain evaluations on a throwaway tape.
Array f_psi(const ModelParams& params, const graph::ComplexGraph& graph, double t, double t_end, const Array& z,
            const Array& h);
Array encode_framework(const ModelParams& params, const graph::FrameworkGraph* framework);
Array conditioning(const ModelParams& params, const graph::ComplexGraph& graph);

/// Leaves (or constants) for every tensor.
std::vector<Var> record(ad::Tape& tape, const ModelParams& params, bool as_leaves);

}  // namespace abode::model
