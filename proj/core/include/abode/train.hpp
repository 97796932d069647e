#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "abode/complex.hpp"
#include "abode/graph.hpp"
#include "abode/loss.hpp"
#include "abode/model.hpp"
#include "abode/ode.hpp"

namespace abode::train {

using ad::Array;

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Global-norm clip applied before each step; <= 0 disables clipping.
  double clip_norm = 5.0;

  void validate() const;
};

struct AdamState {
  std::vector<Array> m;
  std::vector<Array> v;
  std::size_t step = 0;
};

/// Scales `grads` in place so their global norm is at most max_norm; returns the norm before clipping.
double clip_global_norm(std::span<Array> grads, double max_norm);
double global_norm(std::span<const Array> arrays);

/// One bias-corrected Adam update. Returns the pre-clip gradient norm.
double adam_step(std::span<Array> params, std::vector<Array> grads, AdamState& state, const AdamConfig& config);

struct TrainConfig {
  std::uint64_t seed = 0;
  AdamConfig adam;
  std::size_t batch_size = 8;
  std::size_t epochs = 1;
  ode::SolverConfig solver;
  loss::LossConfig loss;
  TaskMode mode = TaskMode::Conditional;
  model::ModelConfig model;
  /// Antigen fraction masked per sample and epoch; 0 disables masking.
  double mask_antigen = 0.0;
  std::optional<double> epitope_cutoff;
  /// Checkpoint callback period in epochs; 0 disables it.
  std::size_t checkpoint_every = 0;
  std::size_t threads = 1;
  model::OutputInit output_init = model::OutputInit::Uniform;

  void validate() const;
};

struct EpochRecord {
  loss::LossBreakdown mean;
  double grad_norm_mean = 0.0;
  double grad_norm_max = 0.0;
  std::size_t steps = 0;
  double wall_seconds = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
};

/// A sample prepared for training or generation.
struct PreparedSample {
  graph::ComplexGraph graph;
  graph::Truth truth;
  Array z0;
};

PreparedSample prepare(const FeaturizedComplex& sample, const TrainConfig& config);
graph::GraphOptions graph_options(const TrainConfig& config);
loss::LossMode loss_mode(TaskMode mode);

struct SampleResult {
  loss::LossBreakdown loss;
  std::vector<Array> grads;
};

/// Total loss of one sample after integration, recorded on `tape` with the given parameter vars.
ad::Var sample_loss(ad::Tape& tape, std::span<const ad::Var> params, const model::ModelConfig& model,
                    const PreparedSample& sample, const ode::SolverConfig& solver, const loss::LossConfig& loss,
                    loss::LossMode mode, loss::LossBreakdown* breakdown = nullptr);

/// Loss and exact parameter gradients of one sample.
SampleResult sample_gradient(const model::ModelParams& params, const PreparedSample& sample,
                             const ode::SolverConfig& solver, const loss::LossConfig& loss, loss::LossMode mode);

struct TrainCallbacks {
  std::function<void(std::size_t epoch, const model::ModelParams& params)> checkpoint;
  std::function<void(std::size_t epoch, const EpochRecord& record)> epoch_end;
  /// Asked after every epoch; returning true ends training early.
  std::function<bool(std::size_t epoch, const model::ModelParams& params)> stop;
};

struct TrainResult {
  model::ModelParams params;
  TrainHistory history;
  std::size_t steps = 0;
};

/// Adam over shuffled batches; each sample is integrated on its own tape and
/// the batch gradient is the mean over samples summed in a fixed order.
TrainResult train(const std::vector<FeaturizedComplex>& dataset, const TrainConfig& config,
                  const TrainCallbacks& callbacks = {});

/// Continues training from given parameters.
TrainResult train(const std::vector<FeaturizedComplex>& dataset, const TrainConfig& config,
                  model::ModelParams initial, const TrainCallbacks& callbacks);

/// Worker count from a flag value (0 = unset), the ABODE_THREADS variable, then 1.
std::size_t resolve_threads(std::size_t flag_value);

/// Runs fn(i) for i in [0, n) on up to `threads` workers; rethrows the first error.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace abode::train
