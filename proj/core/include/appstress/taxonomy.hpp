#pragma once

#include <array>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace appstress {

enum class AppCategory { Entertainment, SocialNetworking, Utility, Browser, Game, Unknown };

/// The five categories that carry features, in feature-vector order.
inline constexpr std::array<AppCategory, 5> kFeatureCategories = {
    AppCategory::Entertainment, AppCategory::SocialNetworking, AppCategory::Game,
    AppCategory::Utility, AppCategory::Browser};

std::string_view to_string(AppCategory category);
/// Accepts the snake_case names produced by to_string.
std::optional<AppCategory> parse_category(std::string_view name);

/// App-id to category rules. Exact rules win over substring rules;
/// substring rules are tried in insertion order and the first hit wins.
class Taxonomy {
 public:
  /// Raises a schema error if `pattern` already has an exact rule.
  void add_exact(std::string_view pattern, AppCategory category);
  void add_substring(std::string_view pattern, AppCategory category);

  AppCategory categorize(std::string_view app_id) const;

  const std::map<std::string, AppCategory, std::less<>>& exact_rules() const noexcept { return exact_; }
  const std::vector<std::pair<std::string, AppCategory>>& substring_rules() const noexcept {
    return substring_;
  }

 private:
  std::map<std::string, AppCategory, std::less<>> exact_;
  std::vector<std::pair<std::string, AppCategory>> substring_;
};

/// Reads `pattern,match_kind,category` rows (header row optional, `#`
/// comments allowed). Unknown categories or match kinds and duplicate exact
/// patterns raise schema errors. An empty stream gives an empty taxonomy.
Taxonomy load_taxonomy(std::istream& in);

inline AppCategory categorize_app(const Taxonomy& taxonomy, std::string_view app_id) {
  return taxonomy.categorize(app_id);
}

/// Rules covering every app named in the study's category table, plus
/// package-name fragments for the same apps.
const Taxonomy& default_taxonomy();
std::string_view default_taxonomy_csv();

}  // namespace appstress
