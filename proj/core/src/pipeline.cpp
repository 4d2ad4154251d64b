#include "appstress/pipeline.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "appstress/csv.hpp"
#include "appstress/error.hpp"
#include "appstress/parallel.hpp"

namespace appstress {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kModule = "cli";

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  raise(ErrorKind::Config, kModule, "invalid value '" + std::string(value) + "' for " + std::string(key));
}

template <typename T>
T parse_integer(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) bad_value(key, value);
  return out;
}

double parse_real(std::string_view key, std::string_view value) {
  try {
    std::size_t used = 0;
    const std::string text(value);
    const double v = std::stod(text, &used);
    if (used != text.size()) bad_value(key, value);
    return v;
  } catch (const std::logic_error&) {
    bad_value(key, value);
  }
}

bool parse_bool(std::string_view key, std::string_view value) {
  const std::string v = to_lower(value);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, value);
}

int parse_clock(std::string_view key, std::string_view value) {
  const auto t = parse_time_of_day(value);
  if (!t) bad_value(key, value);
  return *t;
}

struct KeyHandler {
  std::string help;
  std::function<void(PipelineConfig&, std::string_view key, std::string_view value)> apply;
};

const std::map<std::string, KeyHandler, std::less<>>& handlers() {
  using C = PipelineConfig;
  using V = std::string_view;
  static const std::map<std::string, KeyHandler, std::less<>> table = {
      {"out_dir", {"output directory (default: out)", [](C& c, V, V v) { c.out_dir = fs::path(v); }}},
      {"events", {"app events file, .csv or .jsonl (default: <out_dir>/events.csv)",
                  [](C& c, V, V v) { c.events = fs::path(v); }}},
      {"screen", {"screen-on intervals file, or 'none' (default: <out_dir>/screen.csv if present)",
                  [](C& c, V, V v) { c.screen = fs::path(v); }}},
      {"ema", {"EMA responses file (default: <out_dir>/ema.csv)", [](C& c, V, V v) { c.ema = fs::path(v); }}},
      {"taxonomy", {"taxonomy CSV overriding the bundled default", [](C& c, V, V v) { c.taxonomy = fs::path(v); }}},
      {"grid", {"model-selection grid file", [](C& c, V, V v) { c.grid = fs::path(v); }}},
      {"features", {"features.csv path (default: <out_dir>/features.csv)",
                    [](C& c, V, V v) { c.features = fs::path(v); }}},
      {"labels", {"labels.csv path (default: <out_dir>/labels.csv)", [](C& c, V, V v) { c.labels = fs::path(v); }}},
      {"timezone", {"IANA zone for day boundaries and work hours (default: UTC)",
                    [](C& c, V, V v) {
                      Zone zone{v};  // raises on unknown zones
                      c.timezone = zone.name();
                    }}},
      {"work_hours", {"restrict usage to weekday work hours (default: false)",
                      [](C& c, V k, V v) { c.work.enabled = parse_bool(k, v); }}},
      {"work_start", {"work-day start, hh:mm (default: 09:00)",
                      [](C& c, V k, V v) { c.work.weekday_start = parse_clock(k, v); }}},
      {"work_end", {"work-day end, hh:mm (default: 18:00)",
                    [](C& c, V k, V v) { c.work.weekday_end = parse_clock(k, v); }}},
      {"label_reducer", {"daily label rule: mean, max, last (default: mean)",
                         [](C& c, V k, V v) {
                           const auto r = parse_label_reducer(to_lower(v));
                           if (!r) bad_value(k, v);
                           c.reducer = *r;
                         }}},
      {"train_fraction", {"per-user training share (default: 0.7)",
                          [](C& c, V k, V v) { c.split.train_fraction = parse_real(k, v); }}},
      {"split_mode", {"chronological or random_stratified (default: chronological)",
                      [](C& c, V k, V v) {
                        const auto m = parse_split_mode(to_lower(v));
                        if (!m) bad_value(k, v);
                        c.split.mode = *m;
                      }}},
      {"k", {"cross-validation folds (default: 10)", [](C& c, V k, V v) { c.folds.k = parse_integer<int>(k, v); }}},
      {"stratified", {"stratify folds by label (default: true)",
                      [](C& c, V k, V v) { c.folds.stratified = parse_bool(k, v); }}},
      {"seed", {"seed for folds, random splits and synth (default: 42)",
                [](C& c, V k, V v) { c.seed = parse_integer<std::uint64_t>(k, v); }}},
      {"min_days", {"minimum labeled days per evaluated user (default: 10)",
                    [](C& c, V k, V v) { c.min_days = parse_integer<std::size_t>(k, v); }}},
      {"pooled", {"also evaluate the pooled model (default: true)",
                  [](C& c, V k, V v) { c.pooled = parse_bool(k, v); }}},
      {"plot", {"report: also write category_usage.svg (default: false)",
                [](C& c, V k, V v) { c.plot = parse_bool(k, v); }}},
      {"threads", {"worker threads, 0 = all cores (default: 0)",
                   [](C& c, V k, V v) { c.threads = parse_integer<unsigned>(k, v); }}},
      {"synth.users", {"synthetic users (default: 22)",
                       [](C& c, V k, V v) { c.synth.n_users = parse_integer<int>(k, v); }}},
      {"synth.days", {"synthetic working days per user (default: 30)",
                      [](C& c, V k, V v) { c.synth.n_days = parse_integer<int>(k, v); }}},
      {"synth.signal", {"planted signal strength in [0,1] (default: 0.9)",
                        [](C& c, V k, V v) { c.synth.signal_strength = parse_real(k, v); }}},
      {"synth.heterogeneity", {"homogeneous or per_user_rules (default: per_user_rules)",
                               [](C& c, V k, V v) {
                                 const auto h = parse_heterogeneity(to_lower(v));
                                 if (!h) bad_value(k, v);
                                 c.synth.heterogeneity = *h;
                               }}},
      {"synth.missing_rate", {"probability an EMA prompt goes unanswered (default: 0.05)",
                              [](C& c, V k, V v) { c.synth.ema_missing_rate = parse_real(k, v); }}},
      {"synth.apps_mean", {"mean apps per user (default: 12)",
                           [](C& c, V k, V v) { c.synth.apps_per_user_mean = parse_real(k, v); }}},
      {"synth.apps_sd", {"sd of apps per user (default: 6.45)",
                         [](C& c, V k, V v) { c.synth.apps_per_user_sd = parse_real(k, v); }}},
  };
  return table;
}

void require_file(const fs::path& path, std::string_view what) {
  if (!fs::is_regular_file(path)) {
    raise(ErrorKind::Config, kModule, std::string(what) + " file not found: " + path.string());
  }
}

std::ifstream open_input(const fs::path& path, std::string_view what) {
  require_file(path, what);
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::Io, kModule, "cannot open " + path.string());
  return in;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorKind::Io, kModule, "cannot write " + path.string());
  return out;
}

Taxonomy resolve_taxonomy(const PipelineConfig& c) {
  if (!c.taxonomy) return default_taxonomy();
  auto in = open_input(*c.taxonomy, "taxonomy");
  return load_taxonomy(in);
}

Grid resolve_grid(const PipelineConfig& c) {
  if (!c.grid) return Grid::defaults();
  auto in = open_input(*c.grid, "grid");
  return parse_grid(in);
}

unsigned resolve_threads(const PipelineConfig& c) { return c.threads == 0 ? default_thread_count() : c.threads; }

struct CleanInputs {
  std::vector<AppEvent> events;
  std::vector<ScreenInterval> screen;
  std::vector<EmaResponse> ema;
  std::size_t raw_events = 0;
};

template <typename Row, typename Parser>
std::vector<Row> parse_file(const fs::path& path, std::string_view what, Parser parser, std::ostream& err) {
  auto in = open_input(path, what);
  Parsed<Row> parsed = parser(in, format_from_path(path));
  write_diagnostics(err, parsed.diagnostics, path.filename().string());
  return std::move(parsed.rows);
}

CleanInputs ingest_inputs(const PipelineConfig& c, std::ostream& out, std::ostream& err) {
  CleanInputs inputs;
  auto events = parse_file<AppEvent>(c.events_path(), "events", parse_app_events, err);
  inputs.raw_events = events.size();
  if (const auto screen_path = c.screen_path()) {
    inputs.screen = normalize_screen_intervals(
        parse_file<ScreenInterval>(*screen_path, "screen", parse_screen_intervals, err));
    events = clip_to_screen_on(events, inputs.screen);
  } else {
    out << "no screen file; app events are not clipped to screen-on time\n";
  }
  WorkHoursFilter work = c.work;
  work.timezone = c.timezone;
  inputs.events = apply_work_filter(events, work);
  inputs.ema = parse_file<EmaResponse>(c.ema_path(), "ema", parse_ema, err);
  return inputs;
}

std::vector<LabeledDay> load_labeled_days(const PipelineConfig& c, std::vector<DailyFeatureVector>* all_features,
                                          std::ostream& out) {
  auto fin = open_input(c.features_path(), "features");
  auto features = read_features_csv(fin);
  auto lin = open_input(c.labels_path(), "labels");
  const auto labels = read_labels_csv(lin);
  JoinResult joined = join_features_labels(features, labels);
  out << "joined " << joined.report.matched << " labeled days (" << joined.report.unmatched_features
      << " feature days without labels, " << joined.report.unmatched_labels << " labels without features)\n";
  if (all_features) *all_features = std::move(features);
  return std::move(joined.pairs);
}

EvaluationOptions evaluation_options(const PipelineConfig& c) {
  EvaluationOptions o;
  o.grid = resolve_grid(c);
  o.folds = c.folds;
  o.folds.seed = c.seed;
  o.split = c.split;
  o.split.seed = c.seed;
  o.min_days = c.min_days;
  o.pooled = c.pooled;
  o.threads = resolve_threads(c);
  return o;
}

void write_models(const fs::path& dir, const std::map<std::string, MulticlassModel>& models) {
  for (const auto& [user, model] : models) {
    auto f = open_output(dir / (user + ".json"));
    f << serialize_model(model);
  }
}

void run_ingest(const PipelineConfig& c, std::ostream& out, std::ostream& err) {
  const CleanInputs inputs = ingest_inputs(c, out, err);
  {
    auto f = open_output(c.out_dir / "events.clean.csv");
    write_app_events_csv(f, inputs.events);
  }
  if (c.screen_path()) {
    auto f = open_output(c.out_dir / "screen.clean.csv");
    write_screen_csv(f, inputs.screen);
  }
  {
    auto f = open_output(c.out_dir / "ema.clean.csv");
    write_ema_csv(f, inputs.ema);
  }
  out << "ingested " << inputs.raw_events << " app events -> " << inputs.events.size() << " clipped events, "
      << inputs.screen.size() << " screen intervals, " << inputs.ema.size() << " EMA responses\n";
}

void run_featurize(const PipelineConfig& c, std::ostream& out, std::ostream& err) {
  const CleanInputs inputs = ingest_inputs(c, out, err);
  const Taxonomy taxonomy = resolve_taxonomy(c);
  const Zone zone(c.timezone);
  const auto features = extract_daily_features(inputs.events, taxonomy, zone);
  const auto labels = aggregate_daily_labels(inputs.ema, zone, c.reducer);
  {
    auto f = open_output(c.features_path());
    write_features_csv(f, features);
  }
  {
    auto f = open_output(c.labels_path());
    write_labels_csv(f, labels);
  }
  const JoinReport join = join_features_labels(features, labels).report;
  out << "wrote " << features.size() << " feature days and " << labels.size() << " labeled days; "
      << join.matched << " days have both\n";
}

void run_train(const PipelineConfig& c, std::ostream& out) {
  const auto pairs = load_labeled_days(c, nullptr, out);
  const EvaluationOptions o = evaluation_options(c);

  std::vector<std::pair<std::size_t, std::size_t>> slices;  // [begin, end) per user
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (slices.empty() || pairs[i].features.user_id != pairs[slices.back().first].features.user_id) {
      slices.push_back({i, i});
    }
    slices.back().second = i + 1;
  }

  struct Trained {
    std::string user;
    std::optional<SelectionResult> selection;
    MulticlassModel model;
    std::string note;
  };
  std::vector<Trained> trained(slices.size());
  parallel_for(slices.size(), o.threads, [&](std::size_t u) {
    const auto [begin, end] = slices[u];
    Trained& t = trained[u];
    t.user = pairs[begin].features.user_id;
    if (end - begin < o.min_days) {
      t.note = "skipped: fewer than " + std::to_string(o.min_days) + " labeled days";
      return;
    }
    const Dataset days = to_dataset(std::span(pairs).subspan(begin, end - begin));
    try {
      const TrainTestSplit split = split_train_test(days.y, o.split);
      const Dataset train = days.subset(split.train);
      t.selection = grid_search(train, o.grid, o.folds, o.svm, 1);
      t.model = fit_classifier(train, t.selection->best.kernel, t.selection->best_params);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::InsufficientData) throw;
      t.note = std::string("skipped: ") + e.what();
    }
  });

  std::map<std::string, MulticlassModel> models;
  for (auto& t : trained) {
    out << "== user " << t.user << '\n';
    if (!t.selection) {
      out << t.note << "\n\n";
      continue;
    }
    write_selection_table(out, *t.selection);
    out << "selected " << t.selection->best.kernel.describe() << " C=" << t.selection->best.c
        << " cv_accuracy=" << t.selection->cv_accuracy << (t.model.is_constant() ? " (majority-class fallback)" : "")
        << "\n\n";
    models.emplace(t.user, std::move(t.model));
  }
  write_models(c.out_dir / "models", models);
}

void run_evaluate(const PipelineConfig& c, std::ostream& out) {
  std::vector<DailyFeatureVector> features;
  const auto pairs = load_labeled_days(c, &features, out);
  CohortEvaluation eval = evaluate_cohort(pairs, evaluation_options(c));
  eval.report.category_usage = category_usage_from_features(features);
  {
    auto f = open_output(c.out_dir / "report.csv");
    write_report_csv(f, eval.report);
  }
  std::ostringstream table;
  write_report_table(table, eval.report);
  {
    auto f = open_output(c.out_dir / "report.txt");
    f << table.str();
  }
  write_models(c.out_dir / "models", eval.models);
  out << table.str();
}

void run_report(const PipelineConfig& c, std::ostream& out) {
  auto fin = open_input(c.features_path(), "features");
  const auto usage = category_usage_from_features(read_features_csv(fin));
  {
    auto f = open_output(c.out_dir / "category_usage.csv");
    write_category_usage_csv(f, usage);
  }
  write_category_usage_csv(out, usage);
  if (c.plot) {
    auto f = open_output(c.out_dir / "category_usage.svg");
    write_category_svg(f, usage);
    out << "wrote " << (c.out_dir / "category_usage.svg").string() << '\n';
  }
}

void run_synth(const PipelineConfig& c, std::ostream& out) {
  CohortSpec spec = c.synth;
  spec.seed = c.seed;
  const Cohort cohort = generate_cohort(spec);
  const auto write = [&](const fs::path& name, auto writer, const auto& rows) {
    auto f = open_output(c.out_dir / name);
    writer(f, std::span(rows));
  };
  write("events.csv", [](std::ostream& o, auto rows) { write_app_events_csv(o, rows); }, cohort.events);
  write("screen.csv", [](std::ostream& o, auto rows) { write_screen_csv(o, rows); }, cohort.screen);
  write("ema.csv", [](std::ostream& o, auto rows) { write_ema_csv(o, rows); }, cohort.ema);
  write("truth.csv", [](std::ostream& o, auto rows) { write_truth_csv(o, rows); }, cohort.truth);
  out << "synthesized " << cohort.users.size() << " users, " << cohort.events.size() << " app events, "
      << cohort.ema.size() << " EMA responses into " << c.out_dir.string() << '\n';
}

}  // namespace

std::string_view to_string(Command command) {
  switch (command) {
    case Command::Ingest: return "ingest";
    case Command::Featurize: return "featurize";
    case Command::Train: return "train";
    case Command::Evaluate: return "evaluate";
    case Command::Report: return "report";
    case Command::Synth: return "synth";
  }
  return "ingest";
}

std::optional<Command> parse_command(std::string_view name) {
  for (const auto c : {Command::Ingest, Command::Featurize, Command::Train, Command::Evaluate, Command::Report,
                       Command::Synth}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

fs::path PipelineConfig::events_path() const { return events.value_or(out_dir / "events.csv"); }

std::optional<fs::path> PipelineConfig::screen_path() const {
  if (screen) {
    if (screen->string() == "none") return std::nullopt;
    return *screen;
  }
  const fs::path fallback = out_dir / "screen.csv";
  if (fs::is_regular_file(fallback)) return fallback;
  return std::nullopt;
}

fs::path PipelineConfig::ema_path() const { return ema.value_or(out_dir / "ema.csv"); }
fs::path PipelineConfig::features_path() const { return features.value_or(out_dir / "features.csv"); }
fs::path PipelineConfig::labels_path() const { return labels.value_or(out_dir / "labels.csv"); }

std::vector<std::pair<std::string, std::string>> config_keys() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [key, handler] : handlers()) out.emplace_back(key, handler.help);
  return out;
}

void apply_config_entry(PipelineConfig& config, std::string_view key, std::string_view value) {
  const auto it = handlers().find(trim(key));
  if (it == handlers().end()) raise(ErrorKind::Config, kModule, "unknown config key '" + std::string(key) + "'");
  it->second.apply(config, it->first, trim(value));
}

PipelineConfig load_config(std::istream& in, PipelineConfig base) {
  if (!in.good()) raise(ErrorKind::Config, kModule, "config file is not readable");
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string_view text = trim(std::string_view(line).substr(0, line.find('#')));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      raise(ErrorKind::Config, kModule, "config line " + std::to_string(line_number) + ": expected key = value");
    }
    apply_config_entry(base, text.substr(0, eq), text.substr(eq + 1));
  }
  return base;
}

int run_pipeline(const PipelineConfig& config, Command command, std::ostream& out, std::ostream& err) {
  try {
    config.split.validate();
    config.work.validate();
    if (config.folds.k < 2) raise(ErrorKind::Config, kModule, "k must be at least 2");
    switch (command) {
      case Command::Ingest: run_ingest(config, out, err); break;
      case Command::Featurize: run_featurize(config, out, err); break;
      case Command::Train: run_train(config, out); break;
      case Command::Evaluate: run_evaluate(config, out); break;
      case Command::Report: run_report(config, out); break;
      case Command::Synth: run_synth(config, out); break;
    }
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::Config ? 2 : 1;
  } catch (const fs::filesystem_error& e) {
    err << "error: io: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << kModule << ": " << e.what() << '\n';
    return 1;
  }
}

}  // namespace appstress
