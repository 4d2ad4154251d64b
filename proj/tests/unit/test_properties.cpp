// Randomized checks of invariants that span a whole input space. Generators
// are hand-rolled on the seeded Rng so failures replay exactly.
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "appstress/evaluation.hpp"
#include "appstress/features.hpp"
#include "appstress/ingest.hpp"
#include "appstress/model_selection.hpp"
#include "appstress/rng.hpp"
#include "appstress/taxonomy.hpp"
#include "helpers.hpp"

using namespace appstress;

namespace {

constexpr Timestamp kBase = 1383523200;  // 2013-11-04 00:00:00 UTC

std::string random_token(Rng& rng, std::size_t max_len) {
  static constexpr std::string_view kAlphabet = "abcdefgh.ijk_lmnopqrstuvwxyz0123";
  std::string s;
  const std::size_t len = 1 + rng.uniform_index(max_len);
  for (std::size_t i = 0; i < len; ++i) s += kAlphabet[rng.uniform_index(kAlphabet.size())];
  return s;
}

AppCategory random_category(Rng& rng) { return static_cast<AppCategory>(rng.uniform_index(6)); }

std::vector<AppEvent> random_events(Rng& rng, std::size_t n, const std::vector<std::string>& apps) {
  std::vector<AppEvent> out;
  for (std::size_t i = 0; i < n; ++i) {
    const Timestamp start = kBase + static_cast<Timestamp>(rng.uniform_index(3 * 86400));
    const Timestamp length = static_cast<Timestamp>(rng.uniform_index(4000));
    out.push_back({rng.bernoulli(0.5) ? "u1" : "u2", apps[rng.uniform_index(apps.size())], start, start + length});
  }
  return out;
}

// Per user, events follow one another without overlap.
std::vector<AppEvent> disjoint_events(Rng& rng, std::size_t n, const std::vector<std::string>& apps) {
  std::vector<AppEvent> out;
  std::map<std::string, Timestamp> cursor = {{"u1", kBase}, {"u2", kBase}};
  for (std::size_t i = 0; i < n; ++i) {
    const std::string user = rng.bernoulli(0.5) ? "u1" : "u2";
    const Timestamp start = cursor[user] + static_cast<Timestamp>(rng.uniform_index(20000));
    const Timestamp end = start + static_cast<Timestamp>(rng.uniform_index(4000));
    cursor[user] = end;
    out.push_back({user, apps[rng.uniform_index(apps.size())], start, end});
  }
  return out;
}

std::vector<ScreenInterval> random_screen(Rng& rng, std::size_t n) {
  std::vector<ScreenInterval> out;
  for (std::size_t i = 0; i < n; ++i) {
    const Timestamp start = kBase + static_cast<Timestamp>(rng.uniform_index(3 * 86400));
    out.push_back({rng.bernoulli(0.5) ? "u1" : "u2", start, start + static_cast<Timestamp>(rng.uniform_index(20000))});
  }
  return out;
}

std::map<std::string, Timestamp> seconds_by_user(const auto& items) {
  std::map<std::string, Timestamp> out;
  for (const auto& item : items) out[item.user_id] += item.end - item.start;
  return out;
}

}  // namespace

TEST_CASE("categorize is total and deterministic") {
  Rng rng(31);
  Taxonomy tax;
  for (int i = 0; i < 20; ++i) {
    const std::string pattern = random_token(rng, 6);
    if (rng.bernoulli(0.5)) {
      if (!tax.exact_rules().count(pattern)) tax.add_exact(pattern, random_category(rng));
    } else {
      tax.add_substring(pattern, random_category(rng));
    }
  }
  for (int i = 0; i < 500; ++i) {
    const std::string app = random_token(rng, 12);
    const AppCategory c = categorize_app(tax, app);
    CHECK(static_cast<int>(c) >= 0);
    CHECK(static_cast<int>(c) <= static_cast<int>(AppCategory::Unknown));
    CHECK(categorize_app(tax, app) == c);
  }
}

TEST_CASE("substring rules never override exact rules") {
  Rng rng(32);
  for (int trial = 0; trial < 50; ++trial) {
    Taxonomy tax;
    std::vector<std::pair<std::string, AppCategory>> exact;
    for (int i = 0; i < 5; ++i) {
      const std::string pattern = random_token(rng, 8);
      if (tax.exact_rules().count(pattern)) continue;
      const AppCategory c = random_category(rng);
      tax.add_exact(pattern, c);
      exact.emplace_back(pattern, c);
    }
    for (int i = 0; i < 5; ++i) {
      // Substrings of exact patterns are the adversarial case.
      const auto& victim = exact[rng.uniform_index(exact.size())].first;
      const std::size_t at = rng.uniform_index(victim.size());
      tax.add_substring(victim.substr(at, 1 + rng.uniform_index(victim.size() - at)), random_category(rng));
      for (const auto& [pattern, c] : exact) CHECK(categorize_app(tax, pattern) == c);
    }
  }
}

TEST_CASE("parsing accounts for every data row") {
  Rng rng(33);
  const std::vector<std::string> good = {"u1,chrome,2013-11-04T09:00:00Z,2013-11-04T09:05:00Z",
                                         "u2,com.whatsapp,2013-11-05T10:00:00Z,2013-11-05T10:00:30Z"};
  const std::vector<std::string> bad = {"u1,chrome,yesterday,2013-11-04T09:05:00Z",
                                        "u1,chrome,2013-11-04T09:05:00Z",
                                        ",chrome,2013-11-04T09:00:00Z,2013-11-04T09:05:00Z",
                                        "u1,chrome,2013-11-04T09:05:00Z,2013-11-04T09:00:00Z"};
  for (int trial = 0; trial < 100; ++trial) {
    std::string text = "user_id,app_id,start_ts,end_ts\n";
    std::size_t n_good = 0, n_bad = 0;
    const std::size_t rows = rng.uniform_index(20);
    for (std::size_t i = 0; i < rows; ++i) {
      if (rng.bernoulli(0.6)) {
        text += good[rng.uniform_index(good.size())] + "\n";
        ++n_good;
      } else {
        text += bad[rng.uniform_index(bad.size())] + "\n";
        ++n_bad;
      }
    }
    std::istringstream in(text);
    const auto p = parse_app_events(in, InputFormat::Csv);
    CHECK(p.data_rows == rows);
    CHECK(p.rows.size() == n_good);
    CHECK(p.diagnostics.size() == n_bad);
  }
}

TEST_CASE("clipped time never exceeds events or screen time") {
  Rng rng(34);
  const std::vector<std::string> apps = {"chrome", "com.whatsapp", "calculator"};
  for (int trial = 0; trial < 200; ++trial) {
    const auto events = disjoint_events(rng, rng.uniform_index(15), apps);
    const auto screen = normalize_screen_intervals(random_screen(rng, rng.uniform_index(8)));
    const auto clipped = clip_to_screen_on(events, screen);
    const auto e = seconds_by_user(events);
    const auto s = seconds_by_user(screen);
    for (const auto& [user, total] : seconds_by_user(clipped)) {
      CHECK(total <= e.at(user));
      CHECK(total <= s.at(user));
    }
    CHECK(clip_to_screen_on(clipped, screen) == clipped);
  }
}

TEST_CASE("category time sums to at most the day's event seconds") {
  Rng rng(35);
  const std::vector<std::string> known = {"chrome", "com.whatsapp", "calculator", "youtube", "com.king.candycrush"};
  std::vector<std::string> mixed = known;
  mixed.push_back("org.unlisted.app");
  for (int trial = 0; trial < 100; ++trial) {
    const bool with_unknown = trial % 2 == 1;
    const auto events = random_events(rng, 1 + rng.uniform_index(12), with_unknown ? mixed : known);
    const auto features = extract_daily_features(events, default_taxonomy(), Zone());

    // Per-second split of event time across local days.
    std::map<std::pair<std::string, Date>, Timestamp> per_day;
    for (const auto& ev : events) {
      for (Timestamp t = ev.start; t < ev.end; ++t) ++per_day[{ev.user_id, Zone().local_day(t)}];
    }
    for (const auto& f : features) {
      Timestamp sum = 0;
      for (std::size_t i = 5; i < 10; ++i) sum += f.values[i];
      const Timestamp total = per_day[{f.user_id, f.date}];
      if (with_unknown) {
        CHECK(sum <= total);
      } else {
        CHECK(sum == total);
      }
    }
  }
}

TEST_CASE("folds partition, balance and stratify on random configurations") {
  Rng rng(36);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(80);
    const int k = 2 + static_cast<int>(rng.uniform_index(12));
    const int classes = 1 + static_cast<int>(rng.uniform_index(5));
    std::vector<int> labels(n);
    for (auto& l : labels) l = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(classes)));
    const auto folds = make_folds(n, labels, {k, rng.next_u64(), true});

    std::vector<std::size_t> all;
    std::size_t lo = n, hi = 0;
    std::map<int, std::vector<std::size_t>> per_class;
    for (const auto& set : folds.sets) {
      all.insert(all.end(), set.begin(), set.end());
      lo = std::min(lo, set.size());
      hi = std::max(hi, set.size());
      std::map<int, std::size_t> counts;
      for (const auto i : set) ++counts[labels[i]];
      for (int c = 1; c <= classes; ++c) per_class[c].push_back(counts[c]);
    }
    std::sort(all.begin(), all.end());
    CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
    CHECK(all.size() == n);
    CHECK(all.back() == n - 1);
    CHECK(hi - lo <= 1);
    for (const auto& [c, counts] : per_class) {
      const auto [mn, mx] = std::minmax_element(counts.begin(), counts.end());
      CHECK(*mx - *mn <= 1);
    }
  }
}

TEST_CASE("selected grid point maximizes the table and wins ties by simplicity") {
  Rng rng(37);
  for (int trial = 0; trial < 10; ++trial) {
    Dataset d;
    for (int i = 0; i < 16; ++i) {
      const int label = 1 + static_cast<int>(rng.uniform_index(3));
      d.add({label + rng.normal(0.0, 0.8), rng.normal()}, label);
    }
    const Grid grid{{KernelSpec::rbf(1.0), KernelSpec::linear(), KernelSpec::polynomial(2)}, {10.0, 0.1, 1.0}};
    const auto result = grid_search(d, grid, {4, static_cast<std::uint64_t>(trial), true});
    for (const auto& e : result.table) {
      CHECK(e.cv_accuracy <= result.cv_accuracy);
      if (e.cv_accuracy == result.cv_accuracy && !(e.point == result.best)) {
        CHECK(simpler_than(result.best, e.point));
      }
    }
  }
}
