#include <doctest.h>

#include <algorithm>
#include <map>
#include <sstream>

#include "appstress/evaluation.hpp"
#include "appstress/features.hpp"
#include "appstress/synth.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace appstress;
using appstress::testing::error_kind;

namespace {

std::string serialize(const Cohort& c) {
  std::ostringstream out;
  write_app_events_csv(out, c.events);
  write_screen_csv(out, c.screen);
  write_ema_csv(out, c.ema);
  write_truth_csv(out, c.truth);
  return out.str();
}

}  // namespace

TEST_CASE("same seed gives identical output") {
  CohortSpec spec;
  spec.n_users = 3;
  spec.n_days = 8;
  spec.seed = 5;
  const std::string first = serialize(generate_cohort(spec));
  CHECK(first == serialize(generate_cohort(spec)));
  spec.seed = 6;
  CHECK(first != serialize(generate_cohort(spec)));
}

TEST_CASE("cohort shape") {
  CohortSpec spec;
  spec.n_users = 4;
  spec.n_days = 10;
  const Cohort c = generate_cohort(spec);
  CHECK(c.users == std::vector<std::string>{"u1", "u2", "u3", "u4"});
  CHECK(c.truth.size() == 40);
  for (const auto& t : c.truth) {
    CHECK(t.latent_stress >= 1);
    CHECK(t.latent_stress <= 5);
    CHECK(t.n_responses <= 3);
    const auto wd = absl::GetWeekday(t.date);
    CHECK(wd != absl::Weekday::saturday);
    CHECK(wd != absl::Weekday::sunday);
  }
  for (const auto& r : c.ema) {
    CHECK(r.level >= 1);
    CHECK(r.level <= 5);
  }
}

TEST_CASE("every event lies inside a screen-on interval") {
  CohortSpec spec;
  spec.n_users = 3;
  spec.n_days = 12;
  const Cohort c = generate_cohort(spec);
  const auto screen = normalize_screen_intervals(c.screen);
  for (const auto& e : c.events) {
    const bool inside = std::any_of(screen.begin(), screen.end(), [&](const ScreenInterval& s) {
      return s.user_id == e.user_id && s.start <= e.start && e.end <= s.end;
    });
    CHECK(inside);
  }
  CHECK(clip_to_screen_on(c.events, screen) == c.events);
}

TEST_CASE("every synthetic app has its intended category") {
  for (const auto& entry : synth_vocabulary()) {
    CHECK(categorize_app(default_taxonomy(), entry.app_id) == entry.category);
  }
}

TEST_CASE("missing rate zero answers every prompt") {
  CohortSpec spec;
  spec.n_users = 2;
  spec.n_days = 6;
  spec.ema_missing_rate = 0.0;
  const Cohort c = generate_cohort(spec);
  CHECK(c.ema.size() == 2 * 6 * 3);
}

TEST_CASE("browser use rises with stress under the browser rule") {
  CohortSpec spec;
  spec.n_users = 8;
  spec.n_days = 40;
  spec.seed = 77;
  spec.signal_strength = 0.8;
  const Cohort c = generate_cohort(spec);
  const auto features = extract_daily_features(c.events, default_taxonomy(), Zone());
  std::map<std::pair<std::string, Date>, double> browser;
  for (const auto& f : features) browser[{f.user_id, f.date}] = static_cast<double>(f.freq(AppCategory::Browser));

  int checked = 0;
  for (const auto& user : c.users) {
    std::vector<double> stress, uses;
    int rule = -1;
    for (const auto& t : c.truth) {
      if (t.user_id != user) continue;
      rule = t.rule_id;
      stress.push_back(t.latent_stress);
      uses.push_back(browser.count({user, t.date}) ? browser[{user, t.date}] : 0.0);
    }
    if (usage_rules()[static_cast<std::size_t>(rule)].browser_uses <= 0) continue;
    ++checked;
    CHECK(appstress::testing::spearman(stress, uses) > 0.0);
  }
  CHECK(checked >= 2);
}

TEST_CASE("games are rare but long") {
  CohortSpec spec;
  spec.n_users = 10;
  spec.n_days = 20;
  const Cohort c = generate_cohort(spec);
  const auto usage = category_usage_summary(c.events, default_taxonomy());
  const auto game = std::find_if(usage.begin(), usage.end(), [](const auto& u) { return u.category == AppCategory::Game; });
  REQUIRE(game != usage.end());
  REQUIRE(game->uses_per_day > 0.0);
  for (const auto& u : usage) {
    if (u.category == AppCategory::Game || u.uses_per_day == 0.0) continue;
    CHECK(game->seconds_per_use > u.seconds_per_use);
    CHECK(game->uses_per_day < u.uses_per_day);
  }
}

TEST_CASE("cohort spec validation") {
  CohortSpec spec;
  spec.n_users = 0;
  CHECK(error_kind([&] { spec.validate(); }) == ErrorKind::Config);
  spec = {};
  spec.signal_strength = -0.1;
  CHECK(error_kind([&] { spec.validate(); }) == ErrorKind::Config);
  spec = {};
  spec.ema_missing_rate = 1.5;
  CHECK(error_kind([&] { generate_cohort(spec); }) == ErrorKind::Config);
  CHECK(parse_heterogeneity("homogeneous") == Heterogeneity::Homogeneous);
  CHECK_FALSE(parse_heterogeneity("mixed").has_value());
}
