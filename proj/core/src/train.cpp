#include "abode/train.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>

#include "abode/error.hpp"
#include "abode/rng.hpp"

namespace abode::train {

using ad::Tape;
using ad::Var;

namespace {

constexpr std::uint64_t kShuffleStream = 0x5348554646ULL;
constexpr std::uint64_t kMaskStream = 0x4d41534bULL;

}  // namespace

void AdamConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("Adam betas must lie in [0, 1)");
  if (!(eps > 0.0)) throw ConfigError("Adam eps must be positive");
}

void TrainConfig::validate() const {
  adam.validate();
  solver.validate();
  loss.validate();
  model.validate();
  if (batch_size == 0) throw ConfigError("batch size must be at least 1");
  if (!(mask_antigen >= 0.0 && mask_antigen <= 1.0)) throw ConfigError("mask_antigen must lie in [0, 1]");
  if (solver.method == ode::Method::HeunAdaptive) throw ConfigError("training needs a fixed-step solver");
}

double global_norm(std::span<const Array> arrays) {
  double sq = 0.0;
  for (const Array& a : arrays)
    for (double v : a.values()) sq += v * v;
  return std::sqrt(sq);
}

double clip_global_norm(std::span<Array> grads, double max_norm) {
  const double norm = global_norm(grads);
  if (max_norm > 0.0 && norm > max_norm) {
    const double factor = max_norm / norm;
    for (Array& g : grads) g *= factor;
  }
  return norm;
}

double adam_step(std::span<Array> params, std::vector<Array> grads, AdamState& state, const AdamConfig& config) {
  if (grads.size() != params.size()) throw ShapeError("adam_step: gradient count differs from parameter count");
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (!grads[k].same_shape(params[k])) throw ShapeError("adam_step: gradient shape mismatch at tensor " + std::to_string(k));
    if (!grads[k].all_finite()) throw NonFiniteError("adam_step: non-finite gradient in tensor " + std::to_string(k));
  }
  if (state.m.empty()) {
    for (const Array& p : params) {
      state.m.emplace_back(p.rows(), p.cols());
      state.v.emplace_back(p.rows(), p.cols());
    }
  }
  const double norm = clip_global_norm(grads, config.clip_norm);
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    double* p = params[k].data();
    double* m = state.m[k].data();
    double* v = state.v[k].data();
    const double* g = grads[k].data();
    for (std::size_t i = 0; i < params[k].size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      p[i] -= config.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config.eps);
    }
  }
  return norm;
}

loss::LossMode loss_mode(TaskMode mode) {
  return mode == TaskMode::FixedBackbone ? loss::LossMode::SequenceOnly : loss::LossMode::Codesign;
}

graph::GraphOptions graph_options(const TrainConfig& config) {
  graph::GraphOptions opt;
  opt.mode = config.mode;
  opt.epitope_cutoff = config.epitope_cutoff;
  opt.framework = config.model.framework_conditioning;
  return opt;
}

PreparedSample prepare(const FeaturizedComplex& sample, const TrainConfig& config) {
  if ((config.mode == TaskMode::FixedBackbone) != (sample.mode == TaskMode::FixedBackbone)) {
    throw ConfigError("sample '" + sample.id + "' was featurized for " + mode_name(sample.mode) + ", not " +
                      mode_name(config.mode));
  }
  PreparedSample p;
  p.graph = graph::build_graph(sample, graph_options(config));
  p.truth = graph::truth_of(sample, p.graph);
  p.z0 = graph::init_state(p.graph);
  return p;
}

Var sample_loss(Tape& tape, std::span<const Var> params, const model::ModelConfig& model, const PreparedSample& sample,
                const ode::SolverConfig& solver, const loss::LossConfig& loss, loss::LossMode mode,
                loss::LossBreakdown* breakdown) {
  const model::BoundParams bound = model::bind_params(model, params);
  const Var h = model::conditioning(tape, bound, sample.graph);
  const double t_end = solver.t_end;
  const ode::TapeRhs f = [&](double t, Var z) { return model::f_psi(bound, sample.graph, t, t_end, z, h); };
  const Var z_end = ode::integrate_on_tape(f, tape.constant(sample.z0), solver);
  const loss::LossVars lv = loss::total_loss(tape, z_end, sample.truth, loss, mode);
  if (breakdown != nullptr) *breakdown = lv.values();
  return lv.total;
}

SampleResult sample_gradient(const model::ModelParams& params, const PreparedSample& sample,
                             const ode::SolverConfig& solver, const loss::LossConfig& loss, loss::LossMode mode) {
  Tape tape;
  const std::vector<Var> vars = model::record(tape, params, true);
  SampleResult out;
  const Var total = sample_loss(tape, vars, params.config, sample, solver, loss, mode, &out.loss);
  const ad::Gradients g = tape.backward(total);
  for (const Var& v : vars) out.grads.push_back(g[v]);
  return out;
}

std::size_t resolve_threads(std::size_t flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("ABODE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return 1;
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(std::max<std::size_t>(threads, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

TrainResult train(const std::vector<FeaturizedComplex>& dataset, const TrainConfig& config,
                  const TrainCallbacks& callbacks) {
  return train(dataset, config, model::init_params(config.model, config.seed, config.output_init), callbacks);
}

TrainResult train(const std::vector<FeaturizedComplex>& dataset, const TrainConfig& config, model::ModelParams initial,
                  const TrainCallbacks& callbacks) {
  config.validate();
  if (dataset.empty()) throw ConfigError("training dataset is empty");
  initial.validate();
  TrainResult result;
  result.params = std::move(initial);
  if (config.epochs == 0) return result;

  std::vector<PreparedSample> samples;
  samples.reserve(dataset.size());
  for (const auto& s : dataset) samples.push_back(prepare(s, config));
  const loss::LossMode mode = loss_mode(config.mode);
  const std::size_t n = samples.size();
  const std::size_t threads = resolve_threads(config.threads);
  AdamState adam;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(derive_seed(config.seed ^ kShuffleStream, epoch));
    shuffle_rng.shuffle(order);

    EpochRecord record;
    for (std::size_t first = 0; first < n; first += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, n - first);
      std::vector<SampleResult> results(count);
      parallel_for(count, threads, [&](std::size_t k) {
        const std::size_t idx = order[first + k];
        const PreparedSample* sample = &samples[idx];
        PreparedSample masked;
        if (config.mask_antigen > 0.0 && sample->graph.num_antigen > 0) {
          masked = *sample;
          masked.graph = graph::mask_antigen(sample->graph, config.mask_antigen,
                                             derive_seed(config.seed ^ kMaskStream, epoch * n + idx));
          sample = &masked;
        }
        results[k] = sample_gradient(result.params, *sample, config.solver, config.loss, mode);
      });
      std::vector<Array> grads = results[0].grads;
      for (std::size_t k = 1; k < count; ++k)
        for (std::size_t t = 0; t < grads.size(); ++t) grads[t] += results[k].grads[t];
      const double inv = 1.0 / static_cast<double>(count);
      for (Array& g : grads) g *= inv;
      for (const SampleResult& r : results) {
        record.mean.total += r.loss.total;
        record.mean.seq += r.loss.seq;
        record.mean.angle += r.loss.angle;
        record.mean.radius += r.loss.radius;
      }
      const double norm = adam_step(result.params.tensors, std::move(grads), adam, config.adam);
      record.grad_norm_mean += norm;
      record.grad_norm_max = std::max(record.grad_norm_max, norm);
      ++record.steps;
      ++result.steps;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    record.mean.total *= inv_n;
    record.mean.seq *= inv_n;
    record.mean.angle *= inv_n;
    record.mean.radius *= inv_n;
    record.grad_norm_mean /= static_cast<double>(record.steps);
    record.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.epochs.push_back(record);
    if (callbacks.epoch_end) callbacks.epoch_end(epoch + 1, record);
    if (callbacks.checkpoint && config.checkpoint_every > 0 && (epoch + 1) % config.checkpoint_every == 0) {
      callbacks.checkpoint(epoch + 1, result.params);
    }
    if (callbacks.stop && callbacks.stop(epoch + 1, result.params)) break;
  }
  return result;
}

}  // namespace abode::train
