#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "appstress/evaluation.hpp"
#include "appstress/rng.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace appstress;
using appstress::testing::error_kind;
using appstress::testing::ts;

namespace {

// Days whose first feature carries the label, with noise.
Dataset planted_days(Rng& rng, std::size_t n) {
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = 1 + static_cast<int>(rng.uniform_index(2));
    d.add({label * 4.0 + rng.normal(0.0, 0.5), rng.normal(), rng.normal()}, label);
  }
  return d;
}

const Grid kSmallGrid{{KernelSpec::linear(), KernelSpec::rbf(0.1)}, {0.1, 1.0, 10.0}};

}  // namespace

TEST_CASE("chronological split examples") {
  const std::vector<int> ten(10, 1);
  const auto s = split_train_test(ten, {});
  CHECK(s.train == std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6});
  CHECK(s.test == std::vector<std::size_t>{7, 8, 9});

  const std::vector<int> four = {1, 2, 1, 2};
  const auto small = split_train_test(four, {});
  CHECK(small.train.size() == 3);
  CHECK(small.test.size() == 1);

  const std::vector<int> three = {1, 2, 1};
  CHECK(error_kind([&] { split_train_test(three, {}); }) == ErrorKind::InsufficientData);
}

TEST_CASE("random stratified split is seeded") {
  std::vector<int> labels(30);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = 1 + static_cast<int>(i % 3);
  const SplitSpec a{0.7, SplitMode::RandomStratified, 1};
  const SplitSpec b{0.7, SplitMode::RandomStratified, 2};
  const auto first = split_train_test(labels, a);
  CHECK(split_train_test(labels, a).train == first.train);
  CHECK(split_train_test(labels, b).train != first.train);
  for (const int c : {1, 2, 3}) {
    CHECK(std::count_if(first.train.begin(), first.train.end(), [&](std::size_t i) { return labels[i] == c; }) == 7);
  }

  const std::vector<int> constant(10, 2);
  CHECK(error_kind([&] { split_train_test(constant, a); }) == ErrorKind::InsufficientData);
}

TEST_CASE("splits partition the days") {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 4 + rng.uniform_index(40);
    std::vector<int> labels(n);
    for (auto& l : labels) l = 1 + static_cast<int>(rng.uniform_index(3));
    labels[0] = 1;
    labels[1] = 2;
    const SplitSpec spec{rng.uniform(0.2, 0.9), trial % 2 ? SplitMode::RandomStratified : SplitMode::Chronological,
                         rng.next_u64()};
    // Small classes can round every day into training; that is reported.
    if (error_kind([&] { split_train_test(labels, spec); }) == ErrorKind::InsufficientData) {
      CHECK(spec.mode == SplitMode::RandomStratified);
      continue;
    }
    const auto s = split_train_test(labels, spec);
    std::vector<std::size_t> all = s.train;
    all.insert(all.end(), s.test.begin(), s.test.end());
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expected(n);
    std::iota(expected.begin(), expected.end(), 0);
    CHECK(all == expected);
    CHECK(std::is_sorted(s.train.begin(), s.train.end()));
    CHECK(std::is_sorted(s.test.begin(), s.test.end()));
  }
}

TEST_CASE("metric examples") {
  const std::vector<int> same = {1, 2, 3, 3};
  const auto perfect = compute_metrics(same, same);
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);

  const std::vector<int> truth = {1, 1, 2, 2};
  const std::vector<int> pred = {1, 2, 2, 2};
  const auto m = compute_metrics(truth, pred);
  CHECK(m.accuracy == doctest::Approx(0.75));
  CHECK(m.precision == doctest::Approx(5.0 / 6.0));
  CHECK(m.recall == doctest::Approx(0.75));

  const std::vector<int> t2 = {1, 2};
  const std::vector<int> p2 = {2, 1};
  const auto miss = compute_metrics(t2, p2);
  CHECK(miss.accuracy == 0.0);
  CHECK(miss.precision == 0.0);
  CHECK(miss.recall == 0.0);

  const std::vector<int> shorter = {1};
  CHECK(error_kind([&] { compute_metrics(truth, shorter); }) == ErrorKind::InvalidArgument);
  const std::vector<int> empty;
  CHECK(error_kind([&] { compute_metrics(empty, empty); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("metrics agree with a confusion-matrix oracle") {
  Rng rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(30);
    std::vector<int> truth(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = 1 + static_cast<int>(rng.uniform_index(5));
      pred[i] = 1 + static_cast<int>(rng.uniform_index(5));
    }
    const auto m = compute_metrics(truth, pred);
    const auto o = appstress::testing::confusion_matrix_metrics(truth, pred);
    CHECK(m.accuracy == o.accuracy);
    CHECK(m.precision == o.precision);
    CHECK(m.recall == o.recall);
  }
}

TEST_CASE("planted user scores well on held-out days") {
  Rng rng(23);
  const Dataset d = planted_days(rng, 30);
  const auto e = evaluate_user("u1", d, kSmallGrid, {10, 1, true}, {});
  CHECK(e.result.n_train == 21);
  CHECK(e.result.n_test == 9);
  CHECK(e.result.test_accuracy >= 0.7);
  CHECK_FALSE(e.result.fallback);
  CHECK(e.result.selected == e.selection.best);
}

TEST_CASE("constant labels fall back to the majority class") {
  Rng rng(24);
  Dataset d = planted_days(rng, 12);
  std::fill(d.y.begin(), d.y.end(), 4);
  const auto e = evaluate_user("u1", d, kSmallGrid, {10, 1, true}, {});
  CHECK(e.result.fallback);
  CHECK(e.result.test_accuracy == 1.0);

  // Training split all 3s, test split holds one 3 and two 5s.
  Dataset mixed = planted_days(rng, 10);
  std::fill(mixed.y.begin(), mixed.y.end(), 3);
  mixed.y[8] = 5;
  mixed.y[9] = 5;
  const auto m = evaluate_user("u2", mixed, kSmallGrid, {10, 1, true}, {});
  CHECK(m.result.fallback);
  CHECK(m.result.test_accuracy == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("test labels never influence model selection") {
  Rng rng(25);
  for (int trial = 0; trial < 5; ++trial) {
    const Dataset d = planted_days(rng, 20);
    const auto split = split_train_test(d.y, {});
    Dataset permuted = d;
    std::vector<int> test_labels;
    for (const auto i : split.test) test_labels.push_back(d.y[i]);
    std::reverse(test_labels.begin(), test_labels.end());
    for (std::size_t j = 0; j < split.test.size(); ++j) permuted.y[split.test[j]] = 1 + (test_labels[j] % 2);
    const auto a = evaluate_user("u", d, kSmallGrid, {5, 2, true}, {});
    const auto b = evaluate_user("u", permuted, kSmallGrid, {5, 2, true}, {});
    CHECK(a.result.selected == b.result.selected);
    CHECK(a.result.cv_accuracy == b.result.cv_accuracy);
  }
}

TEST_CASE("pooling one user's days reproduces that user's cross-validation") {
  Rng rng(26);
  const Dataset d = planted_days(rng, 25);
  const Grid one{{KernelSpec::rbf(0.1)}, {1.0}};
  const FoldSpec folds{10, 4, true};
  const auto pooled = evaluate_pooled(d, one, folds);
  CHECK(pooled.selection.cv_accuracy == cross_validate(d, KernelSpec::rbf(0.1), {1.0}, folds));
}

TEST_CASE("cohort averages are the means of the rows") {
  Rng rng(27);
  std::vector<LabeledDay> pairs;
  for (const std::string user : {"a", "b", "c"}) {
    const Dataset d = planted_days(rng, 14);
    for (std::size_t i = 0; i < d.size(); ++i) {
      LabeledDay day;
      day.features.user_id = user;
      day.features.date = Date(2013, 11, 4) + static_cast<int>(i);
      for (std::size_t j = 0; j < d.dim(); ++j) {
        day.features.values[j] = static_cast<std::int64_t>(std::llround(d.x[i][j] * 10.0));
      }
      day.level = d.y[i];
      pairs.push_back(day);
    }
  }
  // A short user is skipped.
  for (int i = 0; i < 5; ++i) {
    LabeledDay day;
    day.features.user_id = "d";
    day.features.date = Date(2013, 11, 4) + i;
    day.level = 1 + i % 2;
    pairs.push_back(day);
  }
  EvaluationOptions options;
  options.grid = kSmallGrid;
  options.folds = {5, 3, true};
  const auto cohort = evaluate_cohort(pairs, options);
  const auto& report = cohort.report;
  REQUIRE(report.rows.size() == 3);
  REQUIRE(report.skipped.size() == 1);
  CHECK(report.skipped[0].user_id == "d");
  CHECK(report.skipped[0].labeled_days == 5);
  double cv = 0.0, test = 0.0, precision = 0.0, recall = 0.0;
  for (const auto& r : report.rows) {
    cv += r.cv_accuracy;
    test += r.test_accuracy;
    precision += r.precision;
    recall += r.recall;
  }
  CHECK(std::abs(report.averages.cv_accuracy - cv / 3) <= 1e-9);
  CHECK(std::abs(report.averages.test_accuracy - test / 3) <= 1e-9);
  CHECK(std::abs(report.averages.precision - precision / 3) <= 1e-9);
  CHECK(std::abs(report.averages.recall - recall / 3) <= 1e-9);
  CHECK(report.pooled.has_value());
  CHECK(cohort.models.size() == 3);

  std::ostringstream csv, table;
  write_report_csv(csv, report);
  write_report_table(table, report);
  CHECK(csv.str().find("average") != std::string::npos);
  CHECK(csv.str().find("pooled") != std::string::npos);
  CHECK(table.str().find("Average") != std::string::npos);
}

TEST_CASE("category usage examples") {
  const Taxonomy& tax = default_taxonomy();
  const std::vector<AppEvent> none;
  for (const auto& u : category_usage_summary(none, tax)) {
    CHECK(u.uses_per_day == 0.0);
    CHECK(u.seconds_per_use == 0.0);
  }

  const std::vector<AppEvent> one = {{"u1", "com.android.chrome", ts("2013-11-04T10:00:00Z"), ts("2013-11-04T10:05:00Z")}};
  const auto usage = category_usage_summary(one, tax);
  CHECK(usage.size() == 5);
  for (const auto& u : usage) {
    if (u.category == AppCategory::Browser) {
      CHECK(u.uses_per_day == 1.0);
      CHECK(u.seconds_per_use == 300.0);
    } else {
      CHECK(u.uses_per_day == 0.0);
    }
  }

  std::ostringstream csv, svg;
  write_category_usage_csv(csv, usage);
  write_category_svg(svg, usage);
  CHECK(csv.str().find("browser") != std::string::npos);
  CHECK(svg.str().find("<svg") != std::string::npos);
}
