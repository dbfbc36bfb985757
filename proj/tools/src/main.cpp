#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"

namespace {

using maskguard::cli::CommandOptions;

CLI::App* add_command(CLI::App& app, const char* name, const char* help, CommandOptions& o) {
  auto* sub = app.add_subcommand(name, help);
  sub->add_option("--config", o.config, "JSON config file or a run manifest")->required();
  sub->add_option("--seed", o.seed, "root seed (overrides the config)");
  sub->add_option("--out", o.out, "output directory")->required();
  sub->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
  return sub;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_st("maskguard"));
  spdlog::set_pattern("%^%l%$: %v");

  CLI::App app{"Fault-masking attack detection for line current differential relays"};
  app.set_version_flag("--version", maskguard::cli::kToolVersion);
  app.require_subcommand(1);
  CommandOptions o;
  auto* simulate = add_command(app, "simulate", "run one scenario through the detector", o);
  simulate->add_option("--model", o.model, "trained ZCC model");
  auto* dataset = add_command(app, "dataset", "generate the sweep and its feature table", o);
  auto* train = add_command(app, "train", "train the zone-confirmation classifier", o);
  train->add_option("--dataset", o.dataset, "dataset directory");
  auto* eval = add_command(app, "eval", "evaluate the detector on the held-out suite", o);
  eval->add_option("--model", o.model, "trained ZCC model");
  auto* roc = add_command(app, "roc", "sweep the MI margin and emit ROC points", o);
  roc->add_option("--model", o.model, "trained ZCC model");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*simulate) maskguard::cli::cmd_simulate(o);
    else if (*dataset) maskguard::cli::cmd_dataset(o);
    else if (*train) maskguard::cli::cmd_train(o);
    else if (*eval) maskguard::cli::cmd_eval(o);
    else if (*roc) maskguard::cli::cmd_roc(o);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return maskguard::cli::exit_code_for(e);
  }
  return 0;
}
