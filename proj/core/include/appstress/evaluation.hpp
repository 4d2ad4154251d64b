#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "appstress/features.hpp"
#include "appstress/ingest.hpp"
#include "appstress/model_selection.hpp"
#include "appstress/svm.hpp"
#include "appstress/taxonomy.hpp"

namespace appstress {

enum class SplitMode { Chronological, RandomStratified };

std::string_view to_string(SplitMode mode);
std::optional<SplitMode> parse_split_mode(std::string_view name);

struct SplitSpec {
  double train_fraction = 0.7;
  SplitMode mode = SplitMode::Chronological;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainTestSplit {
  std::vector<std::size_t> train;  // ascending, i.e. date order
  std::vector<std::size_t> test;
};

/// `labels` are in date order. Chronological mode trains on the first
/// ceil(fraction * n) days; random_stratified draws ceil(fraction * count)
/// days of every class. Raises insufficient-data for fewer than 4 days, or
/// for a single class in random_stratified mode.
TrainTestSplit split_train_test(std::span<const int> labels, const SplitSpec& spec);

struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;  // macro over classes present in truth
  double recall = 0.0;     // macro over classes present in truth
};

Metrics compute_metrics(std::span<const int> truth, std::span<const int> pred);

struct UserResult {
  std::string user_id;
  double cv_accuracy = 0.0;
  double test_accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  GridPoint selected;
  bool fallback = false;   // single-class training split, majority model used
  bool converged = true;   // every pairwise SMO run converged
};

struct UserEvaluation {
  UserResult result;
  SelectionResult selection;
  MulticlassModel model;
};

/// Grid search on the training split only, refit on the whole training
/// split, score on the held-out days.
UserEvaluation evaluate_user(const std::string& user_id, const Dataset& days, const Grid& grid,
                             const FoldSpec& folds, const SplitSpec& split, const SvmParams& base = {},
                             unsigned threads = 1);

struct PooledEvaluation {
  SelectionResult selection;  // selection.cv_accuracy is the pooled accuracy
  Metrics out_of_fold;        // metrics of the chosen point's held-out predictions
};

/// k-fold grid search over every user's days combined.
PooledEvaluation evaluate_pooled(const Dataset& all, const Grid& grid, const FoldSpec& folds,
                                 const SvmParams& base = {}, unsigned threads = 1);

struct CategoryUsage {
  AppCategory category = AppCategory::Unknown;
  double uses_per_day = 0.0;     // mean over (user, day) pairs with any event
  double seconds_per_use = 0.0;  // total seconds / total uses
};

/// One entry per feature category, in feature order.
std::vector<CategoryUsage> category_usage_summary(std::span<const AppEvent> events, const Taxonomy& taxonomy,
                                                  const Zone& zone = Zone());
std::vector<CategoryUsage> category_usage_from_features(std::span<const DailyFeatureVector> features);

struct SkippedUser {
  std::string user_id;
  std::size_t labeled_days = 0;
  std::string reason;
};

struct EvaluationReport {
  struct Averages {
    double cv_accuracy = 0.0;
    double test_accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
  };

  std::vector<UserResult> rows;  // sorted by user_id
  std::vector<SkippedUser> skipped;
  Averages averages;
  std::optional<UserResult> pooled;
  std::vector<CategoryUsage> category_usage;
};

struct EvaluationOptions {
  Grid grid = Grid::defaults();
  FoldSpec folds;
  SplitSpec split;
  SvmParams svm;
  std::size_t min_days = 10;
  bool pooled = true;
  unsigned threads = 1;
};

struct CohortEvaluation {
  EvaluationReport report;
  std::map<std::string, MulticlassModel> models;
};

/// Per-user evaluation for every user with at least `min_days` labeled
/// days, plus the pooled model when two or more users are present.
/// `pairs` must be sorted by (user, date), as join_features_labels returns.
CohortEvaluation evaluate_cohort(std::span<const LabeledDay> pairs, const EvaluationOptions& options);

/// Feature rows and labels of `pairs`, in order.
Dataset to_dataset(std::span<const LabeledDay> pairs);

// Report output.
void write_report_csv(std::ostream& out, const EvaluationReport& report);
/// Fixed-width table: one row per user, then the average and pooled rows.
void write_report_table(std::ostream& out, const EvaluationReport& report);
void write_category_usage_csv(std::ostream& out, std::span<const CategoryUsage> usage);
/// Scatter of mean uses per day against mean seconds per use.
void write_category_svg(std::ostream& out, std::span<const CategoryUsage> usage);

}  // namespace appstress
