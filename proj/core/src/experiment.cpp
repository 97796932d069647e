#include "abode/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "abode/alphabet.hpp"
#include "abode/error.hpp"
#include "abode/metrics.hpp"
#include "abode/synthetic.hpp"

namespace abode::experiment {

namespace {

constexpr double kDivergedLoss = 1e6;

}  // namespace

FitMetrics evaluate_fit(const std::vector<FeaturizedComplex>& samples, const model::ModelParams& params,
                        const train::TrainConfig& config) {
  FitMetrics out;
  if (samples.empty()) return out;
  for (const auto& sample : samples) {
    const train::PreparedSample p = train::prepare(sample, config);
    const metrics::DesignResult d = metrics::generate(p.graph, params, config.solver);
    const double rmsd = metrics::rmsd_eval(d.coords, p.truth.coords);
    out.aar += metrics::aar(d.sequence, sample.cdr.sequence);
    out.rmsd_mean += rmsd;
    out.rmsd_max = std::max(out.rmsd_max, rmsd);
  }
  const double n = static_cast<double>(samples.size());
  out.aar /= n;
  out.rmsd_mean /= n;
  return out;
}

std::vector<FeaturizedComplex> overfit_dataset(std::uint64_t seed) {
  synthetic::ComplexShape shape;
  shape.cdr = 8;
  shape.antigen = 6;
  return synthetic::random_complexes(seed, 5, shape);
}

train::TrainConfig overfit_config() {
  train::TrainConfig c;
  c.seed = 0;
  c.batch_size = 1;
  c.adam.lr = 2e-4;
  c.output_init = model::OutputInit::Zero;
  c.solver.method = ode::Method::HeunFixed;
  c.solver.steps = 40;
  c.solver.t_end = 200.0;
  c.loss.lambda = 0.8;
  c.loss.kappa = 10.0;
  c.loss.sigma_r2 = 0.1;
  c.mode = TaskMode::Conditional;
  return c;
}

OverfitReport overfit(const std::vector<FeaturizedComplex>& samples, const train::TrainConfig& base,
                      const OverfitOptions& options) {
  if (samples.empty()) throw ConfigError("overfit: no samples");
  if (options.eval_every == 0) throw ConfigError("overfit: eval_every must be positive");
  train::TrainConfig config = base;
  const std::size_t per_epoch = (samples.size() + config.batch_size - 1) / config.batch_size;
  config.epochs = std::max<std::size_t>(1, options.max_steps / per_epoch);

  OverfitReport report;
  const auto start = std::chrono::steady_clock::now();
  train::TrainCallbacks callbacks;
  callbacks.epoch_end = [&](std::size_t epoch, const train::EpochRecord& r) {
    if (epoch == 1) report.first_loss = r.mean.total;
    report.last_loss = r.mean.total;
    report.steps += r.steps;
  };
  callbacks.stop = [&](std::size_t epoch, const model::ModelParams& params) {
    if (!std::isfinite(report.last_loss) || report.last_loss > kDivergedLoss) {
      report.diverged = true;
      report.failure = "loss " + std::to_string(report.last_loss) + " after epoch " + std::to_string(epoch);
      return true;
    }
    if (epoch % options.eval_every != 0 && epoch != config.epochs) return false;
    report.metrics = evaluate_fit(samples, params, config);
    const bool hit = report.metrics.aar >= options.target_aar && report.metrics.rmsd_max < options.target_rmsd;
    if (hit && !report.reached) {
      report.reached = true;
      report.steps_to_target = report.steps;
    }
    return hit && options.stop_at_target;
  };
  try {
    train::TrainResult result = train::train(samples, config, callbacks);
    report.params = std::move(result.params);
    report.history = std::move(result.history);
    if (!report.reached && !report.diverged) report.metrics = evaluate_fit(samples, report.params, config);
  } catch (const NonFiniteError& e) {
    report.diverged = true;
    report.failure = e.what();
  } catch (const SolverError& e) {
    report.diverged = true;
    report.failure = e.what();
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::vector<HorizonRow> horizon_sweep(const std::vector<FeaturizedComplex>& samples, train::TrainConfig config,
                                      const std::vector<double>& horizons, const OverfitOptions& options) {
  std::vector<HorizonRow> rows;
  for (double t : horizons) {
    config.solver.t_end = t;
    rows.push_back({t, overfit(samples, config, options)});
  }
  return rows;
}

std::string horizon_table(const std::vector<HorizonRow>& rows) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%8s %8s %10s %10s %8s %10s %10s %9s\n", "T", "steps", "first", "last", "AAR%",
                "RMSD", "RMSDmax", "status");
  out += line;
  for (const auto& row : rows) {
    const auto& r = row.report;
    const char* status = r.diverged ? "diverged" : (r.reached ? "reached" : "budget");
    std::snprintf(line, sizeof line, "%8.1f %8zu %10.4f %10.4f %8.2f %10.4f %10.4f %9s\n", row.t_end, r.steps,
                  r.first_loss, r.last_loss, r.metrics.aar, r.metrics.rmsd_mean, r.metrics.rmsd_max, status);
    out += line;
  }
  return out;
}

}  // namespace abode::experiment
