// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "appstress/csv.hpp"
#include "appstress/evaluation.hpp"
#include "appstress/features.hpp"
#include "appstress/ingest.hpp"
#include "appstress/parallel.hpp"
#include "appstress/pipeline.hpp"
#include "appstress/synth.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace appstress;

namespace {

constexpr double kKktTol = 1e-3;
constexpr double kEqualityTol = 1e-6;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int sign(double v) { return v >= 0.0 ? 1 : -1; }

// Models from criteria 1 and 2 with their raw training sets, for criterion 3.
struct TrainedBinary {
  BinarySvmModel model;
  std::vector<std::vector<double>> x;
  std::vector<int> y;
};
std::vector<TrainedBinary> g_small_models;

Outcome oracle_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  const KernelSpec kernels[] = {KernelSpec::linear(), KernelSpec::polynomial(2, 1.0), KernelSpec::rbf(0.5)};
  const double cs[] = {0.1, 1.0, 10.0};
  Rng rng(20131104);
  std::size_t problems = 0, mismatches = 0, points = 0;
  double worst_gap = 0.0;
  for (int rep = 0; rep < 4; ++rep) {
    for (const auto& kernel : kernels) {
      for (const double c : cs) {
        const std::size_t n = 2 + rng.uniform_index(5);
        const std::size_t dim = 1 + rng.uniform_index(3);
        const auto p = testing::random_binary_problem(rng, n, dim);
        SvmParams params;
        params.c = c;
        const BinarySvmModel model = solve_smo(p.x, p.y, kernel, params);

        std::vector<std::vector<double>> scaled;
        for (const auto& row : p.x) scaled.push_back(model.scaler.apply(row));
        const OracleSolution oracle = brute_force_svm_oracle(scaled, p.y, kernel, c);
        const double gap = std::abs(dual_objective(model) - oracle.objective) /
                           std::max(std::abs(oracle.objective), 1e-12);
        worst_gap = std::max(worst_gap, gap);
        for (std::size_t i = 0; i < n; ++i) {
          const double f_oracle = testing::dual_decision(scaled, p.y, oracle.alphas, oracle.bias, kernel, scaled[i]);
          if (sign(decision_value(model, p.x[i])) != sign(f_oracle)) ++mismatches;
          ++points;
        }
        ++problems;
        g_small_models.push_back({model, p.x, p.y});
      }
    }
  }
  const double elapsed = seconds_since(t0);
  return {problems >= 20 && worst_gap <= 1e-4 && mismatches == 0 && elapsed < 10.0,
          fmt("%zu problems, max relative objective gap %.2e (<= 1e-4), %zu/%zu prediction mismatches, %.2f s "
              "(< 10 s)",
              problems, worst_gap, mismatches, points, elapsed)};
}

Outcome analytic_fixture() {
  const std::vector<std::vector<double>> x = {{1.0}, {-1.0}};
  const std::vector<int> y = {1, -1};
  SvmParams params;
  params.c = 10.0;
  const BinarySvmModel m = solve_smo(x, y, KernelSpec::linear(), params);
  g_small_models.push_back({m, x, y});

  double alpha_err = m.support_alphas.size() == 2 ? 0.0 : 1.0;
  for (const double a : m.support_alphas) alpha_err = std::max(alpha_err, std::abs(a - 0.5));
  double f_err = 0.0;
  for (double v = -3.0; v <= 3.0; v += 0.25) {
    const std::vector<double> at = {v};
    f_err = std::max(f_err, std::abs(decision_value(m, at) - v));
  }
  return {alpha_err <= 1e-6 && std::abs(m.bias) <= 1e-6 && f_err <= 1e-6,
          fmt("max |alpha - 0.5| %.2e, |b| %.2e, max |f(x) - x| %.2e on [-3, 3] (all <= 1e-6)", alpha_err,
              std::abs(m.bias), f_err)};
}

// End-to-end artifacts shared by criteria 3, 5 and 9.
struct EndToEnd {
  fs::path dir;
  int status = -1;
  double seconds = 0.0;
  std::string log;
};

EndToEnd run_end_to_end(const std::string& name, unsigned threads) {
  EndToEnd run;
  run.dir = testing::scratch_dir(name);
  PipelineConfig config;
  config.out_dir = run.dir;
  config.threads = threads;
  std::ostringstream out, err;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto command : {Command::Synth, Command::Featurize, Command::Evaluate}) {
    run.status = run_pipeline(config, command, out, err);
    if (run.status != 0) break;
  }
  run.seconds = seconds_since(t0);
  run.log = err.str();
  return run;
}

// report.csv rows keyed by user_id.
std::map<std::string, std::vector<std::string>> read_report(const fs::path& path) {
  std::ifstream in(path);
  CsvReader reader(in, "acceptance");
  std::map<std::string, std::vector<std::string>> rows;
  CsvRecord record;
  std::string error;
  while (reader.next(record, error)) {
    if (error.empty()) rows[record.fields[0]] = record.fields;
  }
  return rows;
}

Outcome kkt_suite(const EndToEnd& run) {
  KktReport small;
  std::size_t small_models = 0;
  for (const auto& t : g_small_models) {
    if (!t.model.converged) continue;
    small.merge(check_kkt(t.model, t.x, t.y));
    ++small_models;
  }

  // Rebuild each user's training split from the written artifacts.
  KktReport e2e;
  std::size_t e2e_models = 0, skipped = 0;
  std::ifstream fin(run.dir / "features.csv"), lin(run.dir / "labels.csv");
  const JoinResult joined = join_features_labels(read_features_csv(fin), read_labels_csv(lin));
  std::map<std::string, std::vector<LabeledDay>> by_user;
  for (const auto& p : joined.pairs) by_user[p.features.user_id].push_back(p);
  for (const auto& entry : fs::directory_iterator(run.dir / "models")) {
    const std::string user = entry.path().stem().string();
    const MulticlassModel model = deserialize_multiclass_model(testing::read_file(entry.path()));
    const Dataset days = to_dataset(by_user.at(user));
    SplitSpec split;
    split.seed = 42;
    const Dataset train = days.subset(split_train_test(days.y, split).train);
    for (const auto& [pair, binary] : model.pairwise) {
      if (!binary.converged) {
        ++skipped;
        continue;
      }
      Dataset sub;
      for (std::size_t i = 0; i < train.size(); ++i) {
        if (train.y[i] == pair.first || train.y[i] == pair.second) sub.add(train.x[i], train.y[i] == pair.first ? 1 : -1);
      }
      e2e.merge(check_kkt(binary, sub.x, sub.y));
      ++e2e_models;
    }
  }
  const bool pass = small_models > 0 && e2e_models > 0 && small.satisfied(kKktTol, kEqualityTol) &&
                    e2e.satisfied(kKktTol, kEqualityTol);
  return {pass, fmt("%zu small + %zu end-to-end binary models (%zu unconverged skipped): box %.1e, "
                    "equality %.2e (<= 1e-6), KKT %.2e (<= 1e-3)",
                    small_models, e2e_models, skipped, std::max(small.box_violation, e2e.box_violation),
                    std::max(small.equality_residual, e2e.equality_residual),
                    std::max(small.kkt_violation, e2e.kkt_violation))};
}

Outcome feature_oracle() {
  const fs::path dir = fs::path(APPSTRESS_FIXTURE_DIR) / "feature_oracle";
  std::ifstream ev(dir / "events.csv"), sc(dir / "screen.csv");
  const auto events = parse_app_events(ev, InputFormat::Csv);
  const auto screen = normalize_screen_intervals(parse_screen_intervals(sc, InputFormat::Csv).rows);
  const auto clipped = clip_to_screen_on(events.rows, screen);
  const auto got = extract_daily_features(clipped, default_taxonomy(), Zone());

  std::ifstream ex(dir / "expected.csv");
  std::stringstream filtered;
  for (std::string line; std::getline(ex, line);) {
    if (!line.starts_with('#')) filtered << line << '\n';
  }
  const auto expected = read_features_csv(filtered);
  const bool pass = events.rows.size() == 10 && events.diagnostics.empty() && got == expected;
  return {pass, fmt("%zu events -> %zu day vectors, %s", events.rows.size(), got.size(),
                    got == expected ? "all 22 components match" : "MISMATCH")};
}

Outcome planted_contrast(const EndToEnd& run) {
  const auto rows = read_report(run.dir / "report.csv");
  if (run.status != 0 || !rows.contains("average") || !rows.contains("pooled")) {
    return {false, "end-to-end run failed: " + run.log};
  }
  const double per_user = std::stod(rows.at("average")[2]);
  const double pooled = std::stod(rows.at("pooled")[1]);
  const std::size_t users = rows.size() - 2;
  const bool pass = users == 22 && per_user >= 0.70 && per_user - pooled >= 0.10 && run.seconds < 120.0;
  return {pass, fmt("%zu users, mean per-user test accuracy %.4f (>= 0.70), pooled 10-fold CV %.4f, "
                    "gap %.4f (>= 0.10), full run %.1f s (< 120 s, %u threads)",
                    users, per_user, pooled, per_user - pooled, run.seconds, default_thread_count())};
}

Outcome null_control() {
  double model_sum = 0.0, baseline_sum = 0.0;
  const int seeds = 10;
  for (int s = 0; s < seeds; ++s) {
    CohortSpec spec;
    spec.signal_strength = 0.0;
    spec.seed = 1000 + static_cast<std::uint64_t>(s);
    const Cohort cohort = generate_cohort(spec);
    const auto screen = normalize_screen_intervals(cohort.screen);
    const auto features = extract_daily_features(clip_to_screen_on(cohort.events, screen), default_taxonomy(), Zone());
    const auto labels = aggregate_daily_labels(cohort.ema, Zone());
    const JoinResult joined = join_features_labels(features, labels);

    EvaluationOptions options;
    options.pooled = false;
    options.folds.seed = spec.seed;
    options.split.seed = spec.seed;
    options.threads = default_thread_count();
    const CohortEvaluation eval = evaluate_cohort(joined.pairs, options);

    // Majority class of each user's training split, scored on the test split.
    std::map<std::string, std::vector<int>> levels;
    for (const auto& p : joined.pairs) levels[p.features.user_id].push_back(p.level);
    double baseline = 0.0;
    for (const auto& r : eval.report.rows) {
      const auto& y = levels.at(r.user_id);
      const TrainTestSplit split = split_train_test(y, options.split);
      std::vector<int> train;
      for (const auto i : split.train) train.push_back(y[i]);
      const int majority = majority_label(train);
      std::size_t hits = 0;
      for (const auto i : split.test) hits += y[i] == majority ? 1 : 0;
      baseline += static_cast<double>(hits) / static_cast<double>(split.test.size());
    }
    model_sum += eval.report.averages.test_accuracy;
    baseline_sum += baseline / static_cast<double>(eval.report.rows.size());
  }
  const double model = model_sum / seeds, baseline = baseline_sum / seeds;
  return {std::abs(model - baseline) <= 0.15,
          fmt("signal 0 over %d seeds: mean per-user test accuracy %.4f vs majority baseline %.4f, "
              "|diff| %.4f (<= 0.15)",
              seeds, model, baseline, std::abs(model - baseline))};
}

Outcome metrics_oracle() {
  Rng rng(7);
  std::size_t mismatches = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng.uniform_index(200);
    const int classes = 2 + static_cast<int>(rng.uniform_index(4));
    std::vector<int> truth(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = 1 + static_cast<int>(rng.uniform_index(classes));
      pred[i] = rng.bernoulli(0.5) ? truth[i] : 1 + static_cast<int>(rng.uniform_index(classes));
    }
    const Metrics a = compute_metrics(truth, pred);
    const Metrics b = testing::confusion_matrix_metrics(truth, pred);
    if (a.accuracy != b.accuracy || a.precision != b.precision || a.recall != b.recall) ++mismatches;
  }
  return {mismatches == 0, fmt("100 random sets (n 1-200, 2-5 classes), %zu inexact", mismatches)};
}

Outcome fold_properties() {
  Rng rng(8);
  std::size_t failures = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng.uniform_index(150);
    FoldSpec spec;
    spec.k = 2 + static_cast<int>(rng.uniform_index(14));
    spec.seed = rng.next_u64();
    spec.stratified = t % 4 != 0;
    const int classes = 1 + static_cast<int>(rng.uniform_index(5));
    std::vector<double> weights(classes);
    for (auto& w : weights) w = 0.05 + rng.uniform();
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<int> labels(n);
    for (auto& l : labels) {
      double u = rng.uniform() * total;
      l = 1;
      while (l < classes && u > weights[l - 1]) u -= weights[l++ - 1];
    }
    const Folds folds = make_folds(n, labels, spec);

    std::vector<int> seen(n, 0);
    std::size_t lo = n, hi = 0;
    for (const auto& f : folds.sets) {
      for (const auto i : f) ++seen[i];
      lo = std::min(lo, f.size());
      hi = std::max(hi, f.size());
    }
    bool ok = std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }) && hi - lo <= 1 &&
              folds.k() == std::min<std::size_t>(static_cast<std::size_t>(spec.k), n);
    if (spec.stratified) {
      for (int c = 1; c <= classes; ++c) {
        std::size_t clo = n, chi = 0;
        for (const auto& f : folds.sets) {
          const auto cnt = static_cast<std::size_t>(
              std::count_if(f.begin(), f.end(), [&](std::size_t i) { return labels[i] == c; }));
          clo = std::min(clo, cnt);
          chi = std::max(chi, cnt);
        }
        ok = ok && chi - clo <= 1;
      }
    }
    failures += ok ? 0 : 1;
  }
  return {failures == 0, fmt("200 random configurations, %zu violate partition/size/stratification", failures)};
}

Outcome determinism(const EndToEnd& first) {
  const unsigned other = default_thread_count() == 3 ? 2 : 3;
  const EndToEnd second = run_end_to_end("acceptance_rerun", other);
  if (first.status != 0 || second.status != 0) return {false, "end-to-end run failed: " + second.log};

  std::vector<fs::path> files = {"features.csv", "report.csv"};
  for (const auto& entry : fs::directory_iterator(first.dir / "models")) {
    files.push_back(fs::path("models") / entry.path().filename());
  }
  std::size_t differing = 0;
  for (const auto& f : files) {
    if (!fs::exists(second.dir / f) ||
        testing::read_file(first.dir / f) != testing::read_file(second.dir / f)) {
      ++differing;
    }
  }
  std::size_t second_models = 0;
  for ([[maybe_unused]] const auto& entry : fs::directory_iterator(second.dir / "models")) ++second_models;
  const bool pass = differing == 0 && second_models + 2 == files.size();
  return {pass, fmt("%zu artifacts compared across %u and %u threads, %zu differ", files.size(),
                    default_thread_count(), other, differing)};
}

Outcome category_shape() {
  const Cohort cohort = generate_cohort(CohortSpec{});
  const auto screen = normalize_screen_intervals(cohort.screen);
  const auto usage = category_usage_summary(clip_to_screen_on(cohort.events, screen), default_taxonomy());
  const CategoryUsage* game = nullptr;
  bool longest = true, rarest = true;
  std::ostringstream detail;
  for (const auto& u : usage) {
    if (u.category == AppCategory::Game) game = &u;
    detail << to_string(u.category) << fmt(" %.2f/day %.0f s; ", u.uses_per_day, u.seconds_per_use);
  }
  if (!game || game->uses_per_day == 0.0) return {false, "no game usage"};
  for (const auto& u : usage) {
    if (u.category == AppCategory::Game || u.uses_per_day == 0.0) continue;
    longest = longest && game->seconds_per_use > u.seconds_per_use;
    rarest = rarest && game->uses_per_day < u.uses_per_day;
  }
  return {longest && rarest, detail.str() + (longest && rarest ? "game longest and rarest" : "shape violated")};
}

}  // namespace

// With no arguments every criterion runs; otherwise only the listed ids.
int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  const auto wanted = [&](int id) { return only.empty() || only.count(id) > 0; };

  int failed = 0, ran = 0;
  const auto report = [&](int id, const char* name, const std::function<Outcome()>& body) {
    if (!wanted(id)) return;
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = Outcome{false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %2d %-28s %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
    ++ran;
    failed += o.pass ? 0 : 1;
  };

  report(1, "svm oracle equivalence", oracle_equivalence);
  // Criterion 3 also checks the models criterion 1 trains.
  if (wanted(3) && !wanted(1)) oracle_equivalence();
  report(2, "analytic two-point fixture", analytic_fixture);
  std::optional<EndToEnd> run;
  if (wanted(3) || wanted(5) || wanted(9)) run = run_end_to_end("acceptance_run", default_thread_count());
  report(3, "kkt suite", [&] { return kkt_suite(*run); });
  report(4, "feature extraction oracle", feature_oracle);
  report(5, "planted cohort contrast", [&] { return planted_contrast(*run); });
  report(6, "null control", null_control);
  report(7, "metrics oracle", metrics_oracle);
  report(8, "fold properties", fold_properties);
  report(9, "determinism", [&] { return determinism(*run); });
  report(10, "category usage shape", category_shape);
  std::printf("%d of %d criteria failed\n", failed, ran);
  return failed == 0 ? 0 : 1;
}
