#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "appstress/ingest.hpp"
#include "appstress/svm.hpp"
#include "appstress/taxonomy.hpp"
#include "appstress/timeutil.hpp"

namespace appstress {

enum class Heterogeneity { Homogeneous, PerUserRules };

std::string_view to_string(Heterogeneity h);
std::optional<Heterogeneity> parse_heterogeneity(std::string_view name);

struct CohortSpec {
  int n_users = 22;
  int n_days = 30;  // working days, Monday to Friday
  std::uint64_t seed = 42;
  double signal_strength = 0.9;
  Heterogeneity heterogeneity = Heterogeneity::PerUserRules;
  double ema_missing_rate = 0.05;  // per prompt
  double apps_per_user_mean = 12.0;
  double apps_per_user_sd = 6.45;
  Date first_day{2013, 11, 4};

  /// Raises a config error for out-of-range fields.
  void validate() const;
};

/// How a user's stress level moves their usage. Each entry is the sign of
/// the effect of higher stress on one channel (0 = unaffected).
struct UsageRule {
  int id = 0;
  int browser_uses = 0;
  int utility_uses = 0;
  int social_uses = 0;
  int entertainment_duration = 0;
};

/// The rule table. Rule 0 is "stress means more browser and utility use and
/// shorter entertainment sessions"; rule 1 reverses it; rules 2 and 3 pair
/// social and browser use in opposite directions.
std::span<const UsageRule> usage_rules();

struct TruthRow {
  std::string user_id;
  Date date;
  int latent_stress = 0;
  int rule_id = 0;
  int n_responses = 0;
};

struct Cohort {
  std::vector<AppEvent> events;
  std::vector<ScreenInterval> screen;
  std::vector<EmaResponse> ema;
  std::vector<TruthRow> truth;
  std::vector<std::string> users;
};

/// Fully determined by `spec.seed`; users are drawn from independent
/// streams and emitted in user order.
Cohort generate_cohort(const CohortSpec& spec);

/// App ids the generator draws from, with their intended category. Every
/// entry categorizes as listed under default_taxonomy().
struct VocabularyEntry {
  std::string_view app_id;
  AppCategory category;
};
std::span<const VocabularyEntry> synth_vocabulary();

void write_truth_csv(std::ostream& out, std::span<const TruthRow> truth);

/// Exhaustive solution of the soft-margin dual for tiny problems.
struct OracleSolution {
  double objective = 0.0;
  std::vector<double> alphas;
  double bias = 0.0;
  std::size_t candidates = 0;  // feasible candidates examined
};

/// Enumerates every assignment of each alpha to {0, C, free}, solves the
/// stationarity system for the free alphas and the bias, keeps feasible
/// candidates, and returns the best objective. Data is used as given (no
/// scaling). Raises invalid-argument for n > 6 and degenerate-labels for a
/// single class.
OracleSolution brute_force_svm_oracle(std::span<const std::vector<double>> points, std::span<const int> labels,
                                      const KernelSpec& kernel, double c);

}  // namespace appstress
