#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace abode::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitPartial = 2;

struct FeaturizeArgs {
  std::string pdb;
  std::string task;
  std::string out;
};

struct TrainArgs {
  std::string data;
  std::string config;
  std::string out;
  std::optional<std::string> mode;
  std::optional<double> mask_antigen;
  std::optional<std::string> framework_conditioning;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::size_t threads = 0;
};

struct GenerateArgs {
  std::string model;
  std::string data;
  std::string out;
};

struct EvaluateArgs {
  std::string pred;
  std::string truth;
  std::string out;
};

struct SweepArgs {
  std::vector<double> horizons{10.0, 50.0, 200.0};
  std::size_t max_steps = 2000;
  std::uint64_t data_seed = 11;
  std::string out;
};

struct SynthArgs {
  std::string out_dir;
  std::size_t count = 5;
  std::uint64_t seed = 1;
};

int featurize(const FeaturizeArgs& args);
int train(const TrainArgs& args);
int generate(const GenerateArgs& args);
int evaluate(const EvaluateArgs& args);
int sweep_horizon(const SweepArgs& args);
int synth(const SynthArgs& args);

}  // namespace abode::cli
