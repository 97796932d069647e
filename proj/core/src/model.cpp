#include "abode/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "abode/error.hpp"
#include "abode/rng.hpp"

namespace abode::model {

using ad::Tape;

namespace {

constexpr const char* kTensorNames[kLayerTensors] = {"W1", "W2", "W3", "W4", "W5", "W6", "mix"};

void push_layer(std::vector<TensorSpec>& out, const std::string& prefix, std::size_t in, std::size_t width) {
  for (std::size_t k = 0; k < kLayerTensors; ++k) {
    const std::string name = prefix + "." + kTensorNames[k];
    if (k == 5) {
      out.push_back({name, graph::kEdgeDim, width});
    } else if (k == 6) {
      out.push_back({name, width, width});
    } else {
      out.push_back({name, in, width});
    }
  }
}

LayerVars layer_at(std::span<const Var> vars, std::size_t first) {
  return {vars[first], vars[first + 1], vars[first + 2], vars[first + 3],
          vars[first + 4], vars[first + 5], vars[first + 6]};
}

// D x H block indicator: column h has ones on rows of head h.
Array head_indicator(std::size_t width, std::size_t heads) {
  Array ind(width, heads);
  const std::size_t d = width / heads;
  for (std::size_t r = 0; r < width; ++r) ind(r, r / d) = 1.0;
  return ind;
}

Array transpose(const Array& a) {
  Array t(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) t(c, r) = a(r, c);
  return t;
}

// Constant per-edge shift: the maximum logit among edges into the same node, per head.
Array segment_max(const Array& logits, const std::vector<std::size_t>& dst, std::size_t nodes) {
  const std::size_t heads = logits.cols();
  Array best(nodes, heads, -std::numeric_limits<double>::infinity());
  for (std::size_t e = 0; e < dst.size(); ++e)
    for (std::size_t h = 0; h < heads; ++h) best(dst[e], h) = std::max(best(dst[e], h), logits(e, h));
  Array shift(dst.size(), heads);
  for (std::size_t e = 0; e < dst.size(); ++e)
    for (std::size_t h = 0; h < heads; ++h) shift(e, h) = best(dst[e], h);
  return shift;
}

Var broadcast_row(Tape& tape, Var row, std::size_t rows) {
  return ad::matmul(tape.constant(Array(rows, 1, 1.0)), row);
}

}  // namespace

void ModelConfig::validate() const {
  if (heads == 0) throw ConfigError("head count must be positive");
  for (std::size_t w : widths) {
    if (w == 0 || w % heads != 0) {
      throw ConfigError("layer width " + std::to_string(w) + " is not divisible by " + std::to_string(heads) +
                        " heads");
    }
  }
  for (std::size_t w : encoder_widths) {
    if (w == 0 || w % heads != 0) {
      throw ConfigError("encoder width " + std::to_string(w) + " is not divisible by " + std::to_string(heads) +
                        " heads");
    }
  }
  if (encoder_widths[1] != cond_dim) throw ConfigError("encoder output width must equal the conditioning size");
}

std::vector<TensorSpec> param_layout(const ModelConfig& config) {
  config.validate();
  std::vector<TensorSpec> out;
  std::size_t in = config.input_dim();
  for (std::size_t l = 0; l < 3; ++l) {
    push_layer(out, "layer" + std::to_string(l), in, config.widths[l]);
    in = config.widths[l];
  }
  out.push_back({"out.W", config.widths[2], graph::kStateDim});
  if (config.framework_conditioning) {
    std::size_t enc_in = graph::kStateDim;
    for (std::size_t l = 0; l < 2; ++l) {
      push_layer(out, "encoder" + std::to_string(l), enc_in, config.encoder_widths[l]);
      enc_in = config.encoder_widths[l];
    }
  }
  return out;
}

std::size_t ModelParams::scalar_count() const {
  std::size_t n = 0;
  for (const Array& t : tensors) n += t.size();
  return n;
}

void ModelParams::validate() const {
  const auto layout = param_layout(config);
  if (layout.size() != tensors.size()) {
    throw ShapeError("model has " + std::to_string(tensors.size()) + " tensors, layout expects " +
                     std::to_string(layout.size()));
  }
  for (std::size_t k = 0; k < layout.size(); ++k) {
    if (tensors[k].rows() != layout[k].rows || tensors[k].cols() != layout[k].cols) {
      throw ShapeError("tensor " + layout[k].name + " is " + ad::shape_string(tensors[k]) + ", expected " +
                       std::to_string(layout[k].rows) + "x" + std::to_string(layout[k].cols));
    }
  }
}

const char* output_init_name(OutputInit init) { return init == OutputInit::Zero ? "zero" : "uniform"; }

OutputInit parse_output_init(const std::string& name) {
  if (name == "uniform") return OutputInit::Uniform;
  if (name == "zero") return OutputInit::Zero;
  throw ConfigError("unknown output init '" + name + "' (expected uniform or zero)");
}

ModelParams init_params(const ModelConfig& config, std::uint64_t seed, OutputInit output) {
  ModelParams p;
  p.config = config;
  Rng rng(seed);
  for (const TensorSpec& spec : param_layout(config)) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(spec.rows));
    Array t(spec.rows, spec.cols);
    for (double& v : t.values()) v = rng.uniform(-bound, bound);
    p.tensors.push_back(std::move(t));
  }
  if (output == OutputInit::Zero) p.tensors[3 * kLayerTensors] *= 0.0;
  return p;
}

ModelParams zero_params(const ModelConfig& config) {
  ModelParams p;
  p.config = config;
  for (const TensorSpec& spec : param_layout(config)) p.tensors.emplace_back(spec.rows, spec.cols);
  return p;
}

std::vector<Var> record(Tape& tape, const ModelParams& params, bool as_leaves) {
  std::vector<Var> vars;
  vars.reserve(params.tensors.size());
  for (const Array& t : params.tensors) vars.push_back(as_leaves ? tape.leaf(t) : tape.constant(t));
  return vars;
}

BoundParams bind_params(const ModelConfig& config, std::span<const Var> vars) {
  const std::size_t expected = param_layout(config).size();
  if (vars.size() != expected) {
    throw ShapeError("bind: got " + std::to_string(vars.size()) + " tensors, expected " + std::to_string(expected));
  }
  BoundParams p;
  p.config = config;
  for (std::size_t l = 0; l < 3; ++l) p.layers[l] = layer_at(vars, l * kLayerTensors);
  p.out = vars[3 * kLayerTensors];
  if (config.framework_conditioning) {
    const std::size_t base = 3 * kLayerTensors + 1;
    for (std::size_t l = 0; l < 2; ++l) p.encoder.push_back(layer_at(vars, base + l * kLayerTensors));
  }
  return p;
}

namespace {

Var coefficients(const LayerVars& w, std::size_t heads, Var x, Var projected_edges, const graph::EdgeIndex& index) {
  Tape& tape = *x.tape();
  const std::size_t width = w.w3.cols();
  const std::size_t d = width / heads;
  const Var q = ad::gather_rows(ad::matmul(x, w.w3), index.dst);
  const Var k = ad::gather_rows(ad::matmul(x, w.w4), index.src) + projected_edges;
  const Var logits =
      ad::scale(ad::matmul(q * k, tape.constant(head_indicator(width, heads))), 1.0 / std::sqrt(static_cast<double>(d)));
  const Var shifted = logits - tape.constant(segment_max(logits.value(), *index.dst, index.nodes));
  const Var ex = ad::exp(shifted);
  const Var denom = ad::segment_sum(ex, index.dst, index.nodes);
  return ex / ad::gather_rows(denom, index.dst);
}

}  // namespace

Var attention_coefficients(const LayerVars& w, std::size_t heads, Var x, Var edges, const graph::EdgeIndex& index) {
  return coefficients(w, heads, x, ad::matmul(edges, w.w6), index);
}

LayerOutput attention_layer(const LayerVars& w, std::size_t heads, Var x, Var edges, const graph::EdgeIndex& index) {
  Tape& tape = *x.tape();
  const std::size_t nodes = x.rows();
  const std::size_t width = w.w1.cols();
  if (x.cols() != w.w1.rows()) {
    throw ShapeError("attention_layer: input has " + std::to_string(x.cols()) + " columns, weights expect " +
                     std::to_string(w.w1.rows()));
  }
  if (index.nodes != nodes) throw ShapeError("attention_layer: edge index built for a different node count");
  LayerOutput out;
  const Var skip = ad::matmul(x, w.w1);
  if (index.size() == 0) {
    out.out = skip;
    out.alpha = tape.constant(Array(0, heads));
    out.internal = tape.constant(Array(nodes, width));
    out.external = tape.constant(Array(nodes, width));
    return out;
  }
  const Var projected = ad::matmul(edges, w.w6);
  out.alpha = coefficients(w, heads, x, projected, index);
  const Var spread = ad::matmul(out.alpha, tape.constant(transpose(head_indicator(width, heads))));
  const Var values = ad::gather_rows(ad::matmul(x, w.w2), index.src) + projected;
  const Var messages = spread * values;
  const auto part = [&](const ad::IndexList& ids, const ad::IndexList& dst) {
    if (ids->empty()) return tape.constant(Array(nodes, width));
    return ad::segment_sum(ad::gather_rows(messages, ids), dst, nodes);
  };
  out.internal = part(index.internal, index.internal_dst);
  out.external = part(index.external, index.external_dst);
  Var total = out.internal;
  if (!index.external->empty()) total = index.internal->empty() ? out.external : out.internal + out.external;
  out.out = skip + ad::matmul(total, w.mix);
  return out;
}

Var f_psi(const BoundParams& p, const graph::ComplexGraph& graph, double t, double t_end, Var z, Var h) {
  Tape& tape = *z.tape();
  const std::size_t nodes = graph.num_nodes();
  const graph::GraphGeometry geo = graph::graph_geometry(tape, graph, z);
  const Var edges = graph::edge_features(tape, graph, z, geo);
  const Var states = graph::node_states(tape, graph, z);
  Var x = ad::concat_cols({states, tape.constant(Array(nodes, 1, t / t_end)), broadcast_row(tape, h, nodes)});
  for (const LayerVars& layer : p.layers) x = ad::tanh(attention_layer(layer, p.config.heads, x, edges, graph.index).out);
  Var dz = ad::matmul(x, p.out);
  if (graph.num_antigen > 0) dz = ad::slice_rows(dz, 0, graph.num_antibody);
  if (graph.frozen) {
    Array keep(graph.num_antibody, graph::kStateDim);
    for (std::size_t i = 0; i < graph.num_antibody; ++i)
      for (std::size_t c = 0; c < graph::kLabelDim; ++c) keep(i, c) = 1.0;
    dz = dz * tape.constant(keep);
  }
  return dz;
}

Var encode_framework(Tape& tape, const BoundParams& p, const graph::FrameworkGraph* framework) {
  if (framework == nullptr || framework->size() == 0 || p.encoder.empty()) {
    return tape.constant(Array(1, p.config.cond_dim));
  }
  const std::size_t f = framework->size();
  const Var states = tape.constant(framework->states);
  const Var ca = tape.constant(framework->ca);
  const Var prev = ad::gather_rows(ca, ad::make_index(framework->frame_prev));
  const Var next = ad::gather_rows(ca, ad::make_index(framework->frame_next));
  Array valid;
  const auto frames = geometry::orientation_frames(prev, ca, next, &valid);
  const Var edges = graph::edge_feature_block(states, ca, frames, valid, framework->index);
  const Var hidden = ad::tanh(attention_layer(p.encoder[0], p.config.heads, states, edges, framework->index).out);
  const Var top = attention_layer(p.encoder[1], p.config.heads, hidden, edges, framework->index).out;
  return ad::matmul(tape.constant(Array(1, f, 1.0 / static_cast<double>(f))), top);
}

Var conditioning(Tape& tape, const BoundParams& p, const graph::ComplexGraph& graph) {
  if (!p.config.framework_conditioning || !graph.framework) return tape.constant(Array(1, p.config.cond_dim));
  return encode_framework(tape, p, &*graph.framework);
}

Array f_psi(const ModelParams& params, const graph::ComplexGraph& graph, double t, double t_end, const Array& z,
            const Array& h) {
  Tape tape;
  const auto vars = record(tape, params, false);
  const BoundParams p = bind_params(params.config, vars);
  return f_psi(p, graph, t, t_end, tape.constant(z), tape.constant(h)).value();
}

Array encode_framework(const ModelParams& params, const graph::FrameworkGraph* framework) {
  Tape tape;
  const auto vars = record(tape, params, false);
  return encode_framework(tape, bind_params(params.config, vars), framework).value();
}

Array conditioning(const ModelParams& params, const graph::ComplexGraph& graph) {
  Tape tape;
  const auto vars = record(tape, params, false);
  return conditioning(tape, bind_params(params.config, vars), graph).value();
}

}  // namespace abode::model
