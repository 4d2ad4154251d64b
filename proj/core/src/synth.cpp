#include "appstress/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "appstress/csv.hpp"
#include "appstress/error.hpp"
#include "appstress/rng.hpp"

namespace appstress {

namespace {

constexpr std::string_view kModule = "synth";

constexpr VocabularyEntry kVocabulary[] = {
    {"com.facebook.katana", AppCategory::SocialNetworking},
    {"com.twitter.android", AppCategory::SocialNetworking},
    {"com.google.android.apps.plus", AppCategory::SocialNetworking},
    {"com.whatsapp", AppCategory::SocialNetworking},
    {"com.viber.voip", AppCategory::SocialNetworking},
    {"com.skype.raider", AppCategory::SocialNetworking},
    {"com.dropbox.android", AppCategory::SocialNetworking},
    {"com.pinterest", AppCategory::SocialNetworking},
    {"flipboard.app", AppCategory::SocialNetworking},
    {"com.localphone.dialer", AppCategory::SocialNetworking},
    {"com.google.android.gtalk", AppCategory::SocialNetworking},
    {"com.google.android.youtube", AppCategory::Entertainment},
    {"com.android.music", AppCategory::Entertainment},
    {"com.spotify.music", AppCategory::Entertainment},
    {"com.fm.radio", AppCategory::Entertainment},
    {"com.tvguide.mobile", AppCategory::Entertainment},
    {"com.amazon.kindle.ebook", AppCategory::Entertainment},
    {"com.bbc.news", AppCategory::Entertainment},
    {"com.mxtech.videoplayer", AppCategory::Entertainment},
    {"com.instrument.tuner", AppCategory::Entertainment},
    {"com.google.android.calendar", AppCategory::Utility},
    {"com.google.android.apps.maps", AppCategory::Utility},
    {"com.sygic.navigator", AppCategory::Utility},
    {"com.android.deskclock", AppCategory::Utility},
    {"com.weather.weather", AppCategory::Utility},
    {"com.keep.notes", AppCategory::Utility},
    {"com.tripadvisor.tripadvisor", AppCategory::Utility},
    {"com.qrcode.reader", AppCategory::Utility},
    {"com.android.calculator2", AppCategory::Utility},
    {"com.camscanner.scanner", AppCategory::Utility},
    {"com.flashlight.torch", AppCategory::Utility},
    {"com.voice.recorder", AppCategory::Utility},
    {"com.allrecipes.recipe", AppCategory::Utility},
    {"com.android.camera", AppCategory::Utility},
    {"com.amazon.shopping", AppCategory::Utility},
    {"com.android.chrome", AppCategory::Browser},
    {"org.mozilla.firefox", AppCategory::Browser},
    {"com.android.email", AppCategory::Browser},
    {"com.google.android.gmail", AppCategory::Browser},
    {"com.google.android.googlequicksearchbox", AppCategory::Browser},
    {"com.halfbrick.fruitninja", AppCategory::Game},
    {"com.king.candycrushsaga", AppCategory::Game},
    {"com.rovio.angrybirds", AppCategory::Game},
    {"com.mobilityware.solitaire", AppCategory::Game},
    {"com.puzzle.jigsaw", AppCategory::Game},
    {"com.sudoku.classic", AppCategory::Game},
};

constexpr UsageRule kRules[] = {
    {0, +1, +1, 0, -1},
    {1, -1, -1, 0, +1},
    {2, -1, +1, +1, 0},
    {3, +1, -1, -1, 0},
};

// Baseline usage per category: mean uses per day and mean seconds per use.
// Games are rare but long, browser apps frequent and short.
struct CategoryProfile {
  AppCategory category;
  double uses_per_day;
  double seconds_per_use;
};
constexpr CategoryProfile kProfiles[] = {
    {AppCategory::Entertainment, 4.0, 240.0}, {AppCategory::SocialNetworking, 8.0, 90.0},
    {AppCategory::Game, 0.6, 600.0},          {AppCategory::Utility, 12.0, 120.0},
    {AppCategory::Browser, 24.0, 45.0},
};

// Per-level log-multiplier at full signal strength.
const double kUseEffect = std::log(2.0);
const double kDurationEffect = std::log(1.6);
constexpr double kStressPersistence = 0.5;
// Standard normal quintile boundaries.
constexpr std::array<double, 4> kStressCuts = {-0.8416212335729143, -0.2533471031357997, 0.2533471031357997,
                                               0.8416212335729143};

std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

int quantize_stress(double z) {
  int level = 1;
  for (const double cut : kStressCuts) {
    if (z > cut) ++level;
  }
  return level;
}

std::string user_name(int index, int n_users) {
  const std::size_t width = std::to_string(n_users).size();
  std::string digits = std::to_string(index + 1);
  return "u" + std::string(width > digits.size() ? width - digits.size() : 0, '0') + digits;
}

struct Use {
  AppCategory category;
  std::int64_t seconds;
};

void generate_user(const CohortSpec& spec, int index, Cohort& out) {
  Rng rng(mix(spec.seed, static_cast<std::uint64_t>(index)));
  const std::string user = user_name(index, spec.n_users);
  const UsageRule& rule =
      spec.heterogeneity == Heterogeneity::Homogeneous ? kRules[0] : kRules[index % std::size(kRules)];
  const double s = spec.signal_strength;

  // App vocabulary: one app per category, then random extras.
  const auto vocab_size = static_cast<long>(std::size(kVocabulary));
  const long wanted = std::clamp(std::lround(rng.normal(spec.apps_per_user_mean, spec.apps_per_user_sd)), 5L, vocab_size);
  std::vector<std::size_t> order(std::size(kVocabulary));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(std::span(order));
  std::vector<std::size_t> chosen;
  for (const auto& profile : kProfiles) {
    for (const auto i : order) {
      if (kVocabulary[i].category == profile.category) {
        chosen.push_back(i);
        break;
      }
    }
  }
  for (const auto i : order) {
    if (static_cast<long>(chosen.size()) >= wanted) break;
    if (std::find(chosen.begin(), chosen.end(), i) == chosen.end()) chosen.push_back(i);
  }
  std::array<std::vector<std::string_view>, 6> apps_by_category;
  for (const auto i : chosen) {
    apps_by_category[static_cast<std::size_t>(kVocabulary[i].category)].push_back(kVocabulary[i].app_id);
  }

  // Individual baseline habits.
  std::array<double, std::size(kProfiles)> use_scale{}, duration_scale{};
  for (std::size_t c = 0; c < std::size(kProfiles); ++c) {
    use_scale[c] = std::exp(rng.normal(0.0, 0.25));
    duration_scale[c] = std::exp(rng.normal(0.0, 0.2));
  }

  double z = rng.normal();
  Date day = spec.first_day;
  for (int d = 0; d < spec.n_days; ++d) {
    while (absl::GetWeekday(day) == absl::Weekday::saturday || absl::GetWeekday(day) == absl::Weekday::sunday) ++day;
    if (d > 0) z = kStressPersistence * z + std::sqrt(1.0 - kStressPersistence * kStressPersistence) * rng.normal();
    const int stress = quantize_stress(z);
    const double centered = stress - 3;

    std::vector<Use> uses;
    for (std::size_t c = 0; c < std::size(kProfiles); ++c) {
      const auto& profile = kProfiles[c];
      int use_dir = 0, duration_dir = 0;
      switch (profile.category) {
        case AppCategory::Browser: use_dir = rule.browser_uses; break;
        case AppCategory::Utility: use_dir = rule.utility_uses; break;
        case AppCategory::SocialNetworking: use_dir = rule.social_uses; break;
        case AppCategory::Entertainment: duration_dir = rule.entertainment_duration; break;
        default: break;
      }
      const double rate = profile.uses_per_day * use_scale[c] * std::exp(use_dir * s * kUseEffect * centered);
      const std::int64_t count = rng.poisson(rate);
      const double mean_seconds =
          profile.seconds_per_use * duration_scale[c] * std::exp(duration_dir * s * kDurationEffect * centered);
      for (std::int64_t k = 0; k < count; ++k) {
        const double secs = mean_seconds * std::exp(rng.normal(0.0, 0.4) - 0.08);
        uses.push_back({profile.category, std::max<std::int64_t>(5, std::llround(secs))});
      }
    }
    if (uses.empty()) uses.push_back({AppCategory::Browser, 30});
    rng.shuffle(std::span(uses));

    // Lay uses out from 09:00 UTC. Consecutive uses share a screen-on
    // session with probability 0.4; sessions pad their events by a few
    // seconds on each side.
    Timestamp cursor = Zone().at_local(day, 9 * 3600) + static_cast<Timestamp>(rng.uniform_index(300));
    std::optional<ScreenInterval> session;
    for (const auto& use : uses) {
      const bool continue_session = session && rng.bernoulli(0.4);
      if (!continue_session) {
        if (session) {
          session->end = cursor + 1 + static_cast<Timestamp>(rng.uniform_index(5));
          cursor = session->end;
          out.screen.push_back(*session);
        }
        cursor += 60 + static_cast<Timestamp>(rng.uniform_index(480));
        session = ScreenInterval{user, cursor, cursor};
        cursor += 1 + static_cast<Timestamp>(rng.uniform_index(5));
      } else {
        cursor += 2 + static_cast<Timestamp>(rng.uniform_index(19));
      }
      const auto& pool = apps_by_category[static_cast<std::size_t>(use.category)];
      const std::string_view app = pool[rng.uniform_index(pool.size())];
      out.events.push_back({user, std::string(app), cursor, cursor + use.seconds});
      cursor += use.seconds;
    }
    session->end = cursor + 1 + static_cast<Timestamp>(rng.uniform_index(5));
    out.screen.push_back(*session);

    // Three prompts: start of work, noon, end of work.
    int answered = 0;
    for (const int prompt : {9 * 3600 + 900, 12 * 3600 + 1800, 17 * 3600 + 1800}) {
      const Timestamp at = Zone().at_local(day, prompt) + static_cast<Timestamp>(rng.uniform_index(1200));
      const bool missing = rng.bernoulli(spec.ema_missing_rate);
      int level = stress;
      if (rng.bernoulli(0.1)) level += rng.bernoulli(0.5) ? 1 : -1;
      if (missing) continue;
      out.ema.push_back({user, at, std::clamp(level, 1, 5)});
      ++answered;
    }
    out.truth.push_back({user, day, stress, rule.id, answered});
    ++day;
  }
  out.users.push_back(user);
}

}  // namespace

std::string_view to_string(Heterogeneity h) {
  return h == Heterogeneity::Homogeneous ? "homogeneous" : "per_user_rules";
}

std::optional<Heterogeneity> parse_heterogeneity(std::string_view name) {
  if (name == "homogeneous") return Heterogeneity::Homogeneous;
  if (name == "per_user_rules") return Heterogeneity::PerUserRules;
  return std::nullopt;
}

void CohortSpec::validate() const {
  if (n_users < 1) raise(ErrorKind::Config, kModule, "n_users must be positive");
  if (n_days < 1) raise(ErrorKind::Config, kModule, "n_days must be positive");
  if (!(signal_strength >= 0.0 && signal_strength <= 1.0)) {
    raise(ErrorKind::Config, kModule, "signal_strength must lie in [0, 1]");
  }
  if (!(ema_missing_rate >= 0.0 && ema_missing_rate < 1.0)) {
    raise(ErrorKind::Config, kModule, "ema_missing_rate must lie in [0, 1)");
  }
  if (!(apps_per_user_mean > 0.0) || !(apps_per_user_sd >= 0.0)) {
    raise(ErrorKind::Config, kModule, "apps_per_user parameters out of range");
  }
}

std::span<const UsageRule> usage_rules() { return kRules; }

std::span<const VocabularyEntry> synth_vocabulary() { return kVocabulary; }

Cohort generate_cohort(const CohortSpec& spec) {
  spec.validate();
  Cohort cohort;
  for (int u = 0; u < spec.n_users; ++u) generate_user(spec, u, cohort);
  return cohort;
}

void write_truth_csv(std::ostream& out, std::span<const TruthRow> truth) {
  out << "user_id,date,latent_stress,rule_id\n";
  for (const auto& t : truth) {
    out << csv_field(t.user_id) << ',' << format_date(t.date) << ',' << t.latent_stress << ',' << t.rule_id << '\n';
  }
}

}  // namespace appstress
