#include "abode/io/run_config.hpp"

#include <fstream>
#include <set>

#include "abode/error.hpp"

namespace abode::io {

using nlohmann::json;

namespace {

void only_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& target, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    target = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

void read_solver(const json& j, ode::SolverConfig& s) {
  only_keys(j, "solver", {"method", "t_end", "steps", "rtol", "atol", "max_steps"});
  std::string method = ode::method_name(s.method);
  read(j, "method", method, "solver");
  s.method = ode::parse_method(method);
  read(j, "t_end", s.t_end, "solver");
  read(j, "steps", s.steps, "solver");
  read(j, "rtol", s.rtol, "solver");
  read(j, "atol", s.atol, "solver");
  read(j, "max_steps", s.max_steps, "solver");
}

}  // namespace

ode::SolverConfig solver_config_from_json(const json& j) {
  ode::SolverConfig s;
  read_solver(j, s);
  s.validate();
  return s;
}

RunConfig run_config_from_json(const json& j) {
  only_keys(j, "config", {"seed", "epochs", "batch_size", "mode", "mask_antigen", "epitope_cutoff",
                          "framework_conditioning", "checkpoint_every", "threads", "output_init", "adam", "solver",
                          "loss", "data", "out"});
  RunConfig rc;
  train::TrainConfig& t = rc.train;
  read(j, "seed", t.seed, "config");
  read(j, "epochs", t.epochs, "config");
  read(j, "batch_size", t.batch_size, "config");
  read(j, "mask_antigen", t.mask_antigen, "config");
  read(j, "framework_conditioning", t.model.framework_conditioning, "config");
  read(j, "checkpoint_every", t.checkpoint_every, "config");
  read(j, "threads", t.threads, "config");
  read(j, "data", rc.data, "config");
  read(j, "out", rc.out, "config");
  if (j.contains("mode")) {
    std::string mode;
    read(j, "mode", mode, "config");
    t.mode = parse_mode(mode);
  }
  if (j.contains("output_init")) {
    std::string init;
    read(j, "output_init", init, "config");
    t.output_init = model::parse_output_init(init);
  }
  if (j.contains("epitope_cutoff") && !j.at("epitope_cutoff").is_null()) {
    double cutoff = 0.0;
    read(j, "epitope_cutoff", cutoff, "config");
    t.epitope_cutoff = cutoff;
  }
  if (j.contains("adam")) {
    const json& a = j.at("adam");
    only_keys(a, "adam", {"lr", "beta1", "beta2", "eps", "clip_norm"});
    read(a, "lr", t.adam.lr, "adam");
    read(a, "beta1", t.adam.beta1, "adam");
    read(a, "beta2", t.adam.beta2, "adam");
    read(a, "eps", t.adam.eps, "adam");
    read(a, "clip_norm", t.adam.clip_norm, "adam");
  }
  if (j.contains("solver")) read_solver(j.at("solver"), t.solver);
  if (j.contains("loss")) {
    const json& l = j.at("loss");
    only_keys(l, "loss", {"lambda", "kappa", "sigma_r2"});
    read(l, "lambda", t.loss.lambda, "loss");
    read(l, "kappa", t.loss.kappa, "loss");
    read(l, "sigma_r2", t.loss.sigma_r2, "loss");
  }
  if (t.epitope_cutoff && !(*t.epitope_cutoff >= 0.0)) throw ConfigError("config.epitope_cutoff must be >= 0");
  t.validate();
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

json to_json(const ode::SolverConfig& s) {
  return {{"method", ode::method_name(s.method)}, {"t_end", s.t_end}, {"steps", s.steps},
          {"rtol", s.rtol},                        {"atol", s.atol},   {"max_steps", s.max_steps}};
}

json to_json(const train::TrainConfig& t) {
  json j;
  j["seed"] = t.seed;
  j["epochs"] = t.epochs;
  j["batch_size"] = t.batch_size;
  j["mode"] = mode_name(t.mode);
  j["mask_antigen"] = t.mask_antigen;
  j["epitope_cutoff"] = t.epitope_cutoff ? json(*t.epitope_cutoff) : json(nullptr);
  j["framework_conditioning"] = t.model.framework_conditioning;
  j["checkpoint_every"] = t.checkpoint_every;
  j["threads"] = t.threads;
  j["output_init"] = model::output_init_name(t.output_init);
  j["adam"] = {{"lr", t.adam.lr},
               {"beta1", t.adam.beta1},
               {"beta2", t.adam.beta2},
               {"eps", t.adam.eps},
               {"clip_norm", t.adam.clip_norm}};
  j["solver"] = to_json(t.solver);
  j["loss"] = {{"lambda", t.loss.lambda}, {"kappa", t.loss.kappa}, {"sigma_r2", t.loss.sigma_r2}};
  return j;
}

json to_json(const RunConfig& rc) {
  json j = to_json(rc.train);
  if (!rc.data.empty()) j["data"] = rc.data;
  if (!rc.out.empty()) j["out"] = rc.out;
  return j;
}

}  // namespace abode::io
