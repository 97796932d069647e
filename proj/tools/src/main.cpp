#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

int run(CLI::App& app, int argc, char** argv) {
  using namespace abode::cli;
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Print help for every subcommand");

  FeaturizeArgs fa;
  auto* featurize_cmd = app.add_subcommand("featurize", "Parse structures and append design samples to a dataset");
  featurize_cmd->add_option("--task", fa.task, "Task spec JSON (object, array or {\"tasks\": [...]})")->required();
  featurize_cmd->add_option("--pdb", fa.pdb, "Structure file; overrides the path in every task");
  featurize_cmd->add_option("--out", fa.out, "JSON-Lines dataset to append to")->required();

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "Train a model on a featurized dataset");
  train_cmd->add_option("--data", ta.data, "JSON-Lines dataset")->required();
  train_cmd->add_option("--config", ta.config, "RunConfig JSON; unknown keys are rejected");
  train_cmd->add_option("--out", ta.out, "Model container path; history goes to <stem>.history.json")->required();
  train_cmd->add_option("--mode", ta.mode, "unconditional, conditional or fixed_backbone")
      ->check(CLI::IsMember({"unconditional", "conditional", "fixed_backbone"}));
  train_cmd->add_option("--mask-antigen", ta.mask_antigen, "Fraction of antigen residues masked per epoch")
      ->check(CLI::Range(0.0, 1.0));
  train_cmd->add_option("--framework-conditioning", ta.framework_conditioning, "on or off")
      ->check(CLI::IsMember({"on", "off"}));
  train_cmd->add_option("--seed", ta.seed, "Seed for initialization, shuffling and masking");
  train_cmd->add_option("--epochs", ta.epochs, "Number of epochs");
  train_cmd->add_option("--threads", ta.threads, "Worker cap (falls back to ABODE_THREADS, then 1)");

  GenerateArgs ga;
  auto* generate_cmd = app.add_subcommand("generate", "Decode sequences and structures for a dataset");
  generate_cmd->add_option("--model", ga.model, "Model container")->required();
  generate_cmd->add_option("--data", ga.data, "JSON-Lines dataset")->required();
  generate_cmd->add_option("--out", ga.out, "JSON-Lines designs, one per sample")->required();

  EvaluateArgs ea;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score designs against ground truth");
  evaluate_cmd->add_option("--pred", ea.pred, "Designs written by generate")->required();
  evaluate_cmd->add_option("--truth", ea.truth, "JSON-Lines dataset with the true samples")->required();
  evaluate_cmd->add_option("--out", ea.out, "EvalReport JSON")->required();

  SweepArgs sa;
  auto* sweep_cmd = app.add_subcommand("sweep-horizon", "Overfit five synthetic complexes at several horizons T");
  sweep_cmd->add_option("--horizons", sa.horizons, "Integration horizons")->expected(1, -1);
  sweep_cmd->add_option("--max-steps", sa.max_steps, "Optimizer step budget per horizon");
  sweep_cmd->add_option("--data-seed", sa.data_seed, "Seed of the synthetic complexes");
  sweep_cmd->add_option("--out", sa.out, "Optional JSON report");

  SynthArgs ya;
  auto* synth_cmd = app.add_subcommand("synth", "Write synthetic antibody-antigen structures and task specs");
  synth_cmd->add_option("--out", ya.out_dir, "Output directory")->required();
  synth_cmd->add_option("--count", ya.count, "Number of complexes");
  synth_cmd->add_option("--seed", ya.seed, "Generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitFatal;
  }
  try {
    if (*featurize_cmd) return featurize(fa);
    if (*train_cmd) return train(ta);
    if (*generate_cmd) return generate(ga);
    if (*evaluate_cmd) return evaluate(ea);
    if (*sweep_cmd) return sweep_horizon(sa);
    if (*synth_cmd) return synth(ya);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFatal;
  }
  return kExitFatal;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Antibody CDR co-design with graph ODE dynamics"};
  return run(app, argc, argv);
}
