#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "appstress/evaluation.hpp"
#include "appstress/features.hpp"
#include "appstress/ingest.hpp"
#include "appstress/model_selection.hpp"
#include "appstress/synth.hpp"

namespace appstress {

enum class Command { Ingest, Featurize, Train, Evaluate, Report, Synth };

std::string_view to_string(Command command);
std::optional<Command> parse_command(std::string_view name);

/// Everything a subcommand needs. Unset input paths default to files in
/// `out_dir` with the names `synth` writes.
struct PipelineConfig {
  std::filesystem::path out_dir = "out";
  std::optional<std::filesystem::path> events;
  std::optional<std::filesystem::path> screen;  // "none" disables clipping
  std::optional<std::filesystem::path> ema;
  std::optional<std::filesystem::path> taxonomy;  // bundled default when unset
  std::optional<std::filesystem::path> grid;      // Grid::defaults() when unset
  std::optional<std::filesystem::path> features;
  std::optional<std::filesystem::path> labels;
  std::string timezone = "UTC";
  WorkHoursFilter work;
  LabelReducer reducer = LabelReducer::Mean;
  SplitSpec split;
  FoldSpec folds;
  std::uint64_t seed = 42;  // drives folds, random splits, and synth
  CohortSpec synth;
  std::size_t min_days = 10;
  bool pooled = true;
  bool plot = false;
  unsigned threads = 0;  // 0 = hardware concurrency

  std::filesystem::path events_path() const;
  std::optional<std::filesystem::path> screen_path() const;  // nullopt when disabled
  std::filesystem::path ema_path() const;
  std::filesystem::path features_path() const;
  std::filesystem::path labels_path() const;
};

/// Known keys, one per line, for --help and config-file documentation.
std::vector<std::pair<std::string, std::string>> config_keys();

/// Sets one `key = value` entry. Raises a config error for unknown keys or
/// unparsable values.
void apply_config_entry(PipelineConfig& config, std::string_view key, std::string_view value);

/// Reads `key = value` lines; `#` starts a comment.
PipelineConfig load_config(std::istream& in, PipelineConfig base = {});

/// Runs one subcommand. Returns 0 on success, 2 on a configuration error,
/// 1 on any other fatal error; the error text goes to `err`.
int run_pipeline(const PipelineConfig& config, Command command, std::ostream& out, std::ostream& err);

}  // namespace appstress
