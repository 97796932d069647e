#include "commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "abode/error.hpp"
#include "abode/experiment.hpp"
#include "abode/io/dataset.hpp"
#include "abode/io/model_file.hpp"
#include "abode/io/pdb.hpp"
#include "abode/io/results.hpp"
#include "abode/io/run_config.hpp"
#include "abode/io/task.hpp"
#include "abode/metrics.hpp"
#include "abode/synthetic.hpp"
#include "abode/train.hpp"

namespace abode::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path history_path(const fs::path& model) {
  fs::path p = model;
  return p.replace_extension(".history.json");
}

fs::path checkpoint_path(const fs::path& model, std::size_t epoch) {
  fs::path p = model;
  return p.replace_extension(".epoch" + std::to_string(epoch) + model.extension().string());
}

train::TrainConfig config_from_model(const io::ModelFile& file) {
  if (!file.extra.contains("train")) return {};
  train::TrainConfig c = io::run_config_from_json(file.extra.at("train")).train;
  c.model = file.params.config;
  return c;
}

}  // namespace

int featurize(const FeaturizeArgs& args) {
  std::vector<io::TaskSpec> tasks = io::load_tasks(args.task);
  if (tasks.empty()) throw ConfigError("task file " + args.task + " holds no tasks");
  std::map<fs::path, io::Structure> cache;
  std::vector<FeaturizedComplex> samples;
  std::size_t failed = 0;
  for (io::TaskSpec& task : tasks) {
    if (!args.pdb.empty()) task.structure = args.pdb;
    try {
      auto it = cache.find(task.structure);
      if (it == cache.end()) {
        it = cache.emplace(task.structure, io::parse_structure(task.structure)).first;
        for (const auto& w : it->second.warnings) std::cerr << "warning: " << w << '\n';
      }
      FeaturizedComplex sample = io::extract_complex(it->second, task);
      std::string antigen_chains;
      for (const auto& c : sample.provenance.antigen_chains) antigen_chains += antigen_chains.empty() ? c : "," + c;
      std::printf("%-24s mode=%-14s chain=%s antigen=%s cdr_len=%zu antigen_len=%zu\n", sample.id.c_str(),
                  mode_name(sample.mode), sample.provenance.antibody_chain.c_str(),
                  antigen_chains.empty() ? "-" : antigen_chains.c_str(), sample.cdr.size(), sample.antigen.size());
      samples.push_back(std::move(sample));
    } catch (const Error& e) {
      std::cerr << "error: task '" << task.id << "': " << e.what() << '\n';
      ++failed;
    }
  }
  if (samples.empty()) return kExitFatal;
  io::append_dataset(args.out, samples);
  return failed == 0 ? kExitOk : kExitPartial;
}

int train(const TrainArgs& args) {
  io::RunConfig rc;
  if (!args.config.empty()) rc = io::load_run_config(args.config);
  train::TrainConfig& cfg = rc.train;
  if (args.mode) cfg.mode = parse_mode(*args.mode);
  if (args.mask_antigen) cfg.mask_antigen = *args.mask_antigen;
  if (args.framework_conditioning) cfg.model.framework_conditioning = *args.framework_conditioning == "on";
  if (args.seed) cfg.seed = *args.seed;
  if (args.epochs) cfg.epochs = *args.epochs;
  if (args.threads > 0) cfg.threads = args.threads;
  cfg.threads = train::resolve_threads(cfg.threads);
  cfg.validate();

  const std::vector<FeaturizedComplex> data = io::read_dataset(args.data);
  if (data.empty()) throw ConfigError("dataset " + args.data + " is empty");

  const fs::path out = args.out;
  json saved = io::to_json(cfg);
  saved.erase("threads");
  auto model_file = [&](const model::ModelParams& params) {
    io::ModelFile f;
    f.params = params;
    f.seed = cfg.seed;
    f.extra = {{"train", saved}};
    return f;
  };
  train::TrainCallbacks callbacks;
  callbacks.epoch_end = [&](std::size_t epoch, const train::EpochRecord& r) {
    std::fprintf(stderr, "epoch %zu loss %.6f seq %.6f angle %.6f radius %.6f grad_norm %.4f (%.1fs)\n", epoch,
                 r.mean.total, r.mean.seq, r.mean.angle, r.mean.radius, r.grad_norm_mean, r.wall_seconds);
  };
  callbacks.checkpoint = [&](std::size_t epoch, const model::ModelParams& params) {
    io::save_model(checkpoint_path(out, epoch), model_file(params));
  };
  const train::TrainResult result = train::train(data, cfg, callbacks);
  io::save_model(out, model_file(result.params));
  json history = io::to_json(result.history);
  history["config"] = saved;
  io::write_json(history_path(out), history);
  std::cerr << "wrote " << out.string() << " and " << history_path(out).string() << '\n';
  return kExitOk;
}

int generate(const GenerateArgs& args) {
  const io::ModelFile file = io::load_model(args.model);
  const train::TrainConfig cfg = config_from_model(file);
  const std::vector<FeaturizedComplex> data = io::read_dataset(args.data);
  std::vector<io::NamedDesign> designs;
  for (const auto& sample : data) {
    const train::PreparedSample p = train::prepare(sample, cfg);
    designs.push_back({sample.id, metrics::generate(p.graph, file.params, cfg.solver)});
  }
  io::write_designs(args.out, designs);
  std::cerr << "wrote " << designs.size() << " designs to " << args.out << '\n';
  return kExitOk;
}

int evaluate(const EvaluateArgs& args) {
  const std::vector<io::NamedDesign> designs = io::read_designs(args.pred);
  const std::vector<FeaturizedComplex> truth = io::read_dataset(args.truth);
  std::map<std::string, const FeaturizedComplex*> by_id;
  for (const auto& t : truth) by_id[t.id] = &t;
  std::vector<metrics::EvalReport> reports;
  json samples = json::array();
  std::printf("%-24s %10s %8s %8s %8s %12s %12s\n", "id", "ppl", "aar", "rmsd", "gravy", "instability",
              "aromaticity");
  for (const auto& d : designs) {
    const auto it = by_id.find(d.id);
    if (it == by_id.end()) throw ConfigError("sample '" + d.id + "' is not in " + args.truth);
    const metrics::EvalReport r = metrics::evaluate(d.design, *it->second);
    reports.push_back(r);
    json row = io::to_json(r);
    row["id"] = d.id;
    samples.push_back(std::move(row));
    std::printf("%-24s %10.4f %8.2f %8.4f %8.4f %12.4f %12.4f\n", d.id.c_str(), r.ppl, r.aar, r.rmsd, r.gravy,
                r.instability, r.aromaticity);
  }
  if (reports.empty()) throw ConfigError("no predictions in " + args.pred);
  const metrics::EvalReport mean = metrics::mean_report(reports);
  std::printf("%-24s %10.4f %8.2f %8.4f %8.4f %12.4f %12.4f\n", "mean", mean.ppl, mean.aar, mean.rmsd, mean.gravy,
              mean.instability, mean.aromaticity);
  json report = io::to_json(mean);
  report["samples"] = std::move(samples);
  io::write_json(args.out, report);
  return kExitOk;
}

int sweep_horizon(const SweepArgs& args) {
  const auto data = experiment::overfit_dataset(args.data_seed);
  experiment::OverfitOptions options;
  options.max_steps = args.max_steps;
  const auto rows = experiment::horizon_sweep(data, experiment::overfit_config(), args.horizons, options);
  std::cout << experiment::horizon_table(rows);
  if (!args.out.empty()) {
    json out = json::array();
    for (const auto& row : rows) {
      const auto& r = row.report;
      out.push_back({{"t_end", row.t_end},
                     {"steps", r.steps},
                     {"first_loss", r.first_loss},
                     {"last_loss", r.last_loss},
                     {"aar", r.metrics.aar},
                     {"rmsd", r.metrics.rmsd_mean},
                     {"rmsd_max", r.metrics.rmsd_max},
                     {"reached", r.reached},
                     {"diverged", r.diverged}});
    }
    io::write_json(args.out, out);
  }
  for (const auto& row : rows)
    if (row.report.diverged) return kExitPartial;
  return kExitOk;
}

int synth(const SynthArgs& args) {
  const fs::path dir = args.out_dir;
  fs::create_directories(dir);
  const auto complexes = synthetic::random_complexes(args.seed, args.count);
  json tasks = json::array();
  for (std::size_t k = 0; k < complexes.size(); ++k) {
    const FeaturizedComplex& c = complexes[k];
    Segment heavy;
    int number = 1;
    for (const Segment* part : {&c.prefix, &c.cdr, &c.suffix}) {
      for (std::size_t i = 0; i < part->size(); ++i) {
        const auto& at = part->coords.atoms[i];
        heavy.push_back(part->sequence[i], at[0], at[1], at[2], number++);
      }
    }
    Segment antigen;
    for (std::size_t i = 0; i < c.antigen.size(); ++i) {
      const auto& at = c.antigen.coords.atoms[i];
      antigen.push_back(c.antigen.sequence[i], at[0], at[1], at[2], static_cast<int>(i) + 1);
    }
    char name[32];
    std::snprintf(name, sizeof name, "toy%02zu.pdb", k + 1);
    io::write_pdb(dir / name, {{"H", heavy}, {"A", antigen}});
    const int first = static_cast<int>(c.prefix.size()) + 1;
    const int last = first + static_cast<int>(c.cdr.size()) - 1;
    tasks.push_back({{"id", fs::path(name).stem().string()},
                     {"structure", name},
                     {"antibody_chain", "H"},
                     {"cdr", {first, last}},
                     {"antigen_chains", {"A"}},
                     {"mode", "conditional"}});
  }
  io::write_json(dir / "tasks.json", json{{"tasks", tasks}});
  std::cerr << "wrote " << complexes.size() << " structures and tasks.json to " << dir.string() << '\n';
  return kExitOk;
}

}  // namespace abode::cli
