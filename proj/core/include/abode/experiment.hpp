#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "abode/complex.hpp"
#include "abode/model.hpp"
#include "abode/train.hpp"

namespace abode::experiment {

/// Decoding quality on the samples a model was trained on.
struct FitMetrics {
  double aar = 0.0;        // mean over samples, %
  double rmsd_mean = 0.0;  // CA RMSD of the generated span, Å
  double rmsd_max = 0.0;
};

FitMetrics evaluate_fit(const std::vector<FeaturizedComplex>& samples, const model::ModelParams& params,
                        const train::TrainConfig& config);

struct OverfitOptions {
  std::size_t max_steps = 2000;
  /// Epochs between evaluations of the stopping rule.
  std::size_t eval_every = 5;
  double target_aar = 100.0;
  double target_rmsd = 0.5;
  bool stop_at_target = true;
};

struct OverfitReport {
  FitMetrics metrics;
  bool reached = false;
  bool diverged = false;
  std::string failure;
  std::size_t steps = 0;
  /// Step count at the first evaluation that met both targets, 0 if none did.
  std::size_t steps_to_target = 0;
  double first_loss = 0.0;
  double last_loss = 0.0;
  double seconds = 0.0;
  model::ModelParams params;
  train::TrainHistory history;
};

/// Five random complexes with 8-residue CDRs and 6-residue antigens.
std::vector<FeaturizedComplex> overfit_dataset(std::uint64_t seed = 11);

/// Batch 1, lr 2e-4, zero output projection, Heun 40 steps to T = 200.
train::TrainConfig overfit_config();

/// Trains until both targets hold (max CA RMSD below target_rmsd and mean AAR
/// at target_aar) or the step budget is spent. Non-finite states count as divergence.
OverfitReport overfit(const std::vector<FeaturizedComplex>& samples, const train::TrainConfig& config,
                      const OverfitOptions& options = {});

struct HorizonRow {
  double t_end = 0.0;
  OverfitReport report;
};

/// One overfit run per horizon with otherwise identical settings.
std::vector<HorizonRow> horizon_sweep(const std::vector<FeaturizedComplex>& samples, train::TrainConfig config,
                                      const std::vector<double>& horizons, const OverfitOptions& options);

/// Fixed-width comparison table of a sweep.
std::string horizon_table(const std::vector<HorizonRow>& rows);

}  // namespace abode::experiment
