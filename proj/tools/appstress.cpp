// appstress: stress prediction from app-usage logs, one subcommand per stage.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "appstress/error.hpp"
#include "appstress/pipeline.hpp"

namespace {

struct ValueFlag {
  const char* flag;
  const char* key;
};

// Flags that take a value; each maps onto a config-file key.
constexpr ValueFlag kValueFlags[] = {
    {"--out,-o", "out_dir"},
    {"--events", "events"},
    {"--screen", "screen"},
    {"--ema", "ema"},
    {"--taxonomy", "taxonomy"},
    {"--grid", "grid"},
    {"--features", "features"},
    {"--labels", "labels"},
    {"--timezone", "timezone"},
    {"--work-start", "work_start"},
    {"--work-end", "work_end"},
    {"--label-reducer", "label_reducer"},
    {"--train-fraction", "train_fraction"},
    {"--split-mode", "split_mode"},
    {"--k", "k"},
    {"--stratified", "stratified"},
    {"--seed", "seed"},
    {"--min-days", "min_days"},
    {"--pooled", "pooled"},
    {"--threads", "threads"},
    {"--users", "synth.users"},
    {"--days", "synth.days"},
    {"--signal", "synth.signal"},
    {"--heterogeneity", "synth.heterogeneity"},
    {"--missing-rate", "synth.missing_rate"},
    {"--apps-mean", "synth.apps_mean"},
    {"--apps-sd", "synth.apps_sd"},
};

// Switches that set a boolean key to true.
constexpr ValueFlag kSwitches[] = {
    {"--plot", "plot"},
    {"--work-hours", "work_hours"},
};

}  // namespace

int main(int argc, char** argv) {
  using appstress::Command;

  CLI::App app{"Predict daily perceived stress from smartphone app-usage logs."};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config,-c", config_path, "key = value config file; flags override its entries");

  std::map<std::string, std::string> help;
  for (const auto& [key, text] : appstress::config_keys()) help[key] = text;

  std::map<std::string, std::string> values;
  for (const auto& f : kValueFlags) {
    app.add_option(f.flag, values[f.key], help.at(f.key) + " [config: " + f.key + "]");
  }
  std::map<std::string, bool> switches;
  for (const auto& f : kSwitches) {
    app.add_flag(f.flag, switches[f.key], help.at(f.key) + " [config: " + f.key + "]");
  }

  const std::pair<Command, const char*> commands[] = {
      {Command::Ingest, "validate, normalize, and clip events, screen intervals, and EMA responses"},
      {Command::Featurize, "write features.csv and labels.csv"},
      {Command::Train, "per-user grid search; print the table and save models/<user>.json"},
      {Command::Evaluate, "per-user and pooled evaluation; write report.csv and report.txt"},
      {Command::Report, "category usage summary; --plot adds category_usage.svg"},
      {Command::Synth, "generate a synthetic cohort with a planted stress signal"},
  };
  std::map<const CLI::App*, Command> by_sub;
  for (const auto& [command, description] : commands) {
    by_sub[app.add_subcommand(std::string(appstress::to_string(command)), description)] = command;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  appstress::PipelineConfig config;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) {
        appstress::raise(appstress::ErrorKind::Config, "cli", "config file not found: " + config_path);
      }
      config = appstress::load_config(in, config);
    }
    for (const auto& f : kValueFlags) {
      const std::string name = std::string(f.flag).substr(0, std::string(f.flag).find(','));
      if (app.get_option(name)->count() > 0) appstress::apply_config_entry(config, f.key, values[f.key]);
    }
    for (const auto& f : kSwitches) {
      if (switches[f.key]) appstress::apply_config_entry(config, f.key, "true");
    }
  } catch (const appstress::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == appstress::ErrorKind::Config ? 2 : 1;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  return appstress::run_pipeline(config, by_sub.at(chosen), std::cout, std::cerr);
}
