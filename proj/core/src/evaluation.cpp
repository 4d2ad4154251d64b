#include "appstress/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "appstress/error.hpp"
#include "appstress/parallel.hpp"
#include "appstress/rng.hpp"

namespace appstress {

namespace {

constexpr std::string_view kModule = "evaluation";

std::size_t train_count(double fraction, std::size_t n) {
  // The small offset keeps products such as 0.7 * 10 from rounding up.
  const auto raw = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  return std::clamp<std::size_t>(raw, 1, n - 1);
}

}  // namespace

std::string_view to_string(SplitMode mode) {
  return mode == SplitMode::Chronological ? "chronological" : "random_stratified";
}

std::optional<SplitMode> parse_split_mode(std::string_view name) {
  if (name == "chronological") return SplitMode::Chronological;
  if (name == "random_stratified") return SplitMode::RandomStratified;
  return std::nullopt;
}

void SplitSpec::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    raise(ErrorKind::Config, kModule, "train_fraction must lie strictly between 0 and 1");
  }
}

TrainTestSplit split_train_test(std::span<const int> labels, const SplitSpec& spec) {
  spec.validate();
  const std::size_t n = labels.size();
  if (n < 4) {
    raise(ErrorKind::InsufficientData, kModule, "need at least 4 labeled days, have " + std::to_string(n));
  }
  TrainTestSplit split;
  if (spec.mode == SplitMode::Chronological) {
    const std::size_t cut = train_count(spec.train_fraction, n);
    for (std::size_t i = 0; i < n; ++i) (i < cut ? split.train : split.test).push_back(i);
    return split;
  }

  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < n; ++i) by_class[labels[i]].push_back(i);
  if (by_class.size() < 2) raise(ErrorKind::InsufficientData, kModule, "stratified split needs two classes");
  Rng rng(spec.seed);
  for (auto& [label, members] : by_class) {
    rng.shuffle(std::span(members));
    const auto take = static_cast<std::size_t>(
        std::ceil(spec.train_fraction * static_cast<double>(members.size()) - 1e-9));
    for (std::size_t i = 0; i < members.size(); ++i) (i < take ? split.train : split.test).push_back(members[i]);
  }
  if (split.test.empty()) raise(ErrorKind::InsufficientData, kModule, "stratified split left no test days");
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

Metrics compute_metrics(std::span<const int> truth, std::span<const int> pred) {
  if (truth.size() != pred.size()) raise(ErrorKind::InvalidArgument, kModule, "truth and prediction lengths differ");
  if (truth.empty()) raise(ErrorKind::InvalidArgument, kModule, "metrics need at least one prediction");

  std::map<int, std::size_t> true_count, pred_count, hits;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++true_count[truth[i]];
    ++pred_count[pred[i]];
    if (truth[i] == pred[i]) {
      ++correct;
      ++hits[truth[i]];
    }
  }
  Metrics m;
  m.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
  for (const auto& [label, count] : true_count) {
    const std::size_t tp = hits[label];
    const std::size_t predicted = pred_count.contains(label) ? pred_count[label] : 0;
    m.precision += predicted == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(predicted);
    m.recall += static_cast<double>(tp) / static_cast<double>(count);
  }
  const auto classes = static_cast<double>(true_count.size());
  m.precision /= classes;
  m.recall /= classes;
  return m;
}

UserEvaluation evaluate_user(const std::string& user_id, const Dataset& days, const Grid& grid,
                             const FoldSpec& folds, const SplitSpec& split, const SvmParams& base,
                             unsigned threads) {
  const TrainTestSplit parts = split_train_test(days.y, split);
  const Dataset train = days.subset(parts.train);
  const Dataset test = days.subset(parts.test);

  UserEvaluation eval;
  eval.selection = grid_search(train, grid, folds, base, threads);
  eval.model = fit_classifier(train, eval.selection.best.kernel, eval.selection.best_params);

  std::vector<int> pred;
  pred.reserve(test.size());
  for (const auto& x : test.x) pred.push_back(predict_multiclass(eval.model, x));
  const Metrics m = compute_metrics(test.y, pred);

  UserResult& r = eval.result;
  r.user_id = user_id;
  r.cv_accuracy = eval.selection.cv_accuracy;
  r.test_accuracy = m.accuracy;
  r.precision = m.precision;
  r.recall = m.recall;
  r.n_train = train.size();
  r.n_test = test.size();
  r.selected = eval.selection.best;
  r.fallback = eval.model.is_constant();
  r.converged = eval.model.converged();
  return eval;
}

PooledEvaluation evaluate_pooled(const Dataset& all, const Grid& grid, const FoldSpec& folds,
                                 const SvmParams& base, unsigned threads) {
  PooledEvaluation out;
  out.selection = grid_search(all, grid, folds, base, threads);

  out.out_of_fold = compute_metrics(all.y, out.selection.held_out);
  return out;
}

std::vector<CategoryUsage> category_usage_from_features(std::span<const DailyFeatureVector> features) {
  std::vector<CategoryUsage> out;
  for (const auto c : kFeatureCategories) {
    double uses = 0.0, seconds = 0.0;
    for (const auto& f : features) {
      uses += static_cast<double>(f.freq(c));
      seconds += static_cast<double>(f.time(c));
    }
    CategoryUsage u;
    u.category = c;
    u.uses_per_day = features.empty() ? 0.0 : uses / static_cast<double>(features.size());
    u.seconds_per_use = uses == 0.0 ? 0.0 : seconds / uses;
    out.push_back(u);
  }
  return out;
}

std::vector<CategoryUsage> category_usage_summary(std::span<const AppEvent> events, const Taxonomy& taxonomy,
                                                  const Zone& zone) {
  const auto features = extract_daily_features(events, taxonomy, zone);
  return category_usage_from_features(features);
}

Dataset to_dataset(std::span<const LabeledDay> pairs) {
  Dataset d;
  for (const auto& p : pairs) d.add(p.features.as_doubles(), p.level);
  return d;
}

CohortEvaluation evaluate_cohort(std::span<const LabeledDay> pairs, const EvaluationOptions& options) {
  options.grid.validate();
  options.split.validate();

  // Group consecutive runs of one user; input is sorted by (user, date).
  struct UserSlice {
    std::string user_id;
    std::size_t begin = 0;
    std::size_t end = 0;
  };
  std::vector<UserSlice> users;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (i > 0 && pairs[i].features.user_id < pairs[i - 1].features.user_id) {
      raise(ErrorKind::InvalidArgument, kModule, "labeled days must be sorted by user");
    }
    if (users.empty() || users.back().user_id != pairs[i].features.user_id) {
      users.push_back({pairs[i].features.user_id, i, i});
    }
    users.back().end = i + 1;
  }

  CohortEvaluation out;
  std::vector<const UserSlice*> eligible;
  for (const auto& u : users) {
    const std::size_t n = u.end - u.begin;
    if (n < options.min_days) {
      out.report.skipped.push_back(
          {u.user_id, n, "fewer than " + std::to_string(options.min_days) + " labeled days"});
    } else {
      eligible.push_back(&u);
    }
  }

  std::vector<std::optional<UserEvaluation>> results(eligible.size());
  std::vector<std::string> failures(eligible.size());
  parallel_for(eligible.size(), options.threads, [&](std::size_t i) {
    const UserSlice& u = *eligible[i];
    const Dataset days = to_dataset(pairs.subspan(u.begin, u.end - u.begin));
    try {
      results[i] = evaluate_user(u.user_id, days, options.grid, options.folds, options.split, options.svm, 1);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::InsufficientData) throw;
      failures[i] = e.what();
    }
  });

  for (std::size_t i = 0; i < eligible.size(); ++i) {
    if (!results[i]) {
      out.report.skipped.push_back({eligible[i]->user_id, eligible[i]->end - eligible[i]->begin, failures[i]});
      continue;
    }
    out.report.rows.push_back(results[i]->result);
    out.models.emplace(eligible[i]->user_id, std::move(results[i]->model));
  }
  std::sort(out.report.skipped.begin(), out.report.skipped.end(),
            [](const SkippedUser& a, const SkippedUser& b) { return a.user_id < b.user_id; });

  auto& avg = out.report.averages;
  if (!out.report.rows.empty()) {
    for (const auto& r : out.report.rows) {
      avg.cv_accuracy += r.cv_accuracy;
      avg.test_accuracy += r.test_accuracy;
      avg.precision += r.precision;
      avg.recall += r.recall;
    }
    const auto n = static_cast<double>(out.report.rows.size());
    avg.cv_accuracy /= n;
    avg.test_accuracy /= n;
    avg.precision /= n;
    avg.recall /= n;
  }

  if (options.pooled && users.size() >= 2) {
    const Dataset all = to_dataset(pairs);
    const PooledEvaluation pooled = evaluate_pooled(all, options.grid, options.folds, options.svm, options.threads);
    UserResult row;
    row.user_id = "pooled";
    row.cv_accuracy = pooled.selection.cv_accuracy;
    row.test_accuracy = pooled.selection.cv_accuracy;
    row.precision = pooled.out_of_fold.precision;
    row.recall = pooled.out_of_fold.recall;
    row.n_train = all.size();
    row.n_test = all.size();
    row.selected = pooled.selection.best;
    out.report.pooled = row;
  }

  std::vector<DailyFeatureVector> features;
  features.reserve(pairs.size());
  for (const auto& p : pairs) features.push_back(p.features);
  out.report.category_usage = category_usage_from_features(features);
  return out;
}

}  // namespace appstress
