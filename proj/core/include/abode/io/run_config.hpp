#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "abode/train.hpp"

namespace abode::io {

/// Training, solver and loss settings plus optional paths, as one JSON document.
struct RunConfig {
  train::TrainConfig train;
  std::string data;
  std::string out;
};

/// Starts from the module defaults and applies the keys present in `j`.
/// Unknown keys and wrong types raise ConfigError before anything runs.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);
nlohmann::json to_json(const train::TrainConfig& config);
nlohmann::json to_json(const ode::SolverConfig& config);
ode::SolverConfig solver_config_from_json(const nlohmann::json& j);

}  // namespace abode::io
