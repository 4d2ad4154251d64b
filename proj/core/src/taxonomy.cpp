#include "appstress/taxonomy.hpp"

#include <sstream>

#include "appstress/csv.hpp"
#include "appstress/error.hpp"

namespace appstress {

namespace {

constexpr std::string_view kModule = "taxonomy";

// Exact names first (as they appear in the category table, lowercased with
// spaces removed), then package-name fragments. Email is filed under
// browser, matching the table.
constexpr std::string_view kDefaultCsv = R"(pattern,match_kind,category
facebook,exact,social_networking
twitter,exact,social_networking
google+,exact,social_networking
googleplus,exact,social_networking
localphone,exact,social_networking
mobilevoip,exact,social_networking
dropbox,exact,social_networking
pinterest,exact,social_networking
flipboard,exact,social_networking
whatsapp,exact,social_networking
gtalk,exact,social_networking
viber,exact,social_networking
skype,exact,social_networking
youtube,exact,entertainment
videoplayer,exact,entertainment
tvguide,exact,entertainment
tvstreaming,exact,entertainment
fmradio,exact,entertainment
musictuner,exact,entertainment
musiccomposer,exact,entertainment
ebookreader,exact,entertainment
bookstore,exact,entertainment
newsreader,exact,entertainment
calendar,exact,utility
map,exact,utility
maps,exact,utility
navigator,exact,utility
clock,exact,utility
weather,exact,utility
notes,exact,utility
voicetotext,exact,utility
texttovoice,exact,utility
tripadvisor,exact,utility
qrcodereader,exact,utility
calculator,exact,utility
accounting,exact,utility
scanner,exact,utility
flashlight,exact,utility
voicerecorder,exact,utility
recipes,exact,utility
camera,exact,utility
onlineshopping,exact,utility
chrome,exact,browser
firefox,exact,browser
email,exact,browser
googlequicksearchbox,exact,browser
fruitninja,exact,game
candycrushsaga,exact,game
angrybirds,exact,game
fruitninja,substring,game
candycrush,substring,game
angrybirds,substring,game
solitaire,substring,game
puzzle,substring,game
sudoku,substring,game
.game,substring,game
chrome,substring,browser
firefox,substring,browser
browser,substring,browser
quicksearchbox,substring,browser
email,substring,browser
mail,substring,browser
facebook,substring,social_networking
twitter,substring,social_networking
apps.plus,substring,social_networking
whatsapp,substring,social_networking
gtalk,substring,social_networking
viber,substring,social_networking
skype,substring,social_networking
dropbox,substring,social_networking
pinterest,substring,social_networking
flipboard,substring,social_networking
localphone,substring,social_networking
voip,substring,social_networking
youtube,substring,entertainment
video,substring,entertainment
music,substring,entertainment
radio,substring,entertainment
tvguide,substring,entertainment
ebook,substring,entertainment
news,substring,entertainment
tuner,substring,entertainment
calendar,substring,utility
maps,substring,utility
navigat,substring,utility
clock,substring,utility
weather,substring,utility
notes,substring,utility
texttospeech,substring,utility
voicesearch,substring,utility
tripadvisor,substring,utility
qrcode,substring,utility
calculator,substring,utility
accounting,substring,utility
scanner,substring,utility
flashlight,substring,utility
recorder,substring,utility
recipe,substring,utility
camera,substring,utility
shopping,substring,utility
)";

}  // namespace

std::string_view to_string(AppCategory category) {
  switch (category) {
    case AppCategory::Entertainment: return "entertainment";
    case AppCategory::SocialNetworking: return "social_networking";
    case AppCategory::Utility: return "utility";
    case AppCategory::Browser: return "browser";
    case AppCategory::Game: return "game";
    case AppCategory::Unknown: return "unknown";
  }
  return "unknown";
}

std::optional<AppCategory> parse_category(std::string_view name) {
  for (const auto c : {AppCategory::Entertainment, AppCategory::SocialNetworking, AppCategory::Utility,
                       AppCategory::Browser, AppCategory::Game, AppCategory::Unknown}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

void Taxonomy::add_exact(std::string_view pattern, AppCategory category) {
  auto [it, inserted] = exact_.emplace(to_lower(pattern), category);
  if (!inserted) raise(ErrorKind::Schema, kModule, "duplicate exact pattern '" + it->first + "'");
}

void Taxonomy::add_substring(std::string_view pattern, AppCategory category) {
  substring_.emplace_back(to_lower(pattern), category);
}

AppCategory Taxonomy::categorize(std::string_view app_id) const {
  if (const auto it = exact_.find(app_id); it != exact_.end()) return it->second;
  for (const auto& [pattern, category] : substring_) {
    if (app_id.find(pattern) != std::string_view::npos) return category;
  }
  return AppCategory::Unknown;
}

Taxonomy load_taxonomy(std::istream& in) {
  if (!in.good() && !in.eof()) raise(ErrorKind::Io, kModule, "input stream is not readable");
  Taxonomy taxonomy;
  std::string line;
  std::size_t line_number = 0;
  bool first_row = true;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string_view text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto where = "line " + std::to_string(line_number) + ": ";
    auto fields = split_csv_line(text);
    if (!fields || fields->size() != 3) {
      raise(ErrorKind::Schema, kModule, where + "expected pattern,match_kind,category");
    }
    const std::string pattern = to_lower((*fields)[0]);
    const std::string kind = to_lower((*fields)[1]);
    const std::string category_name = to_lower((*fields)[2]);
    if (first_row && pattern == "pattern" && kind == "match_kind" && category_name == "category") {
      first_row = false;
      continue;
    }
    first_row = false;
    if (pattern.empty()) raise(ErrorKind::Schema, kModule, where + "empty pattern");
    const auto category = parse_category(category_name);
    if (!category) raise(ErrorKind::Schema, kModule, where + "unknown category '" + category_name + "'");
    if (kind == "exact") {
      if (taxonomy.exact_rules().contains(pattern)) {
        raise(ErrorKind::Schema, kModule, where + "duplicate exact pattern '" + pattern + "'");
      }
      taxonomy.add_exact(pattern, *category);
    } else if (kind == "substring") {
      taxonomy.add_substring(pattern, *category);
    } else {
      raise(ErrorKind::Schema, kModule, where + "unknown match kind '" + kind + "'");
    }
  }
  if (in.bad()) raise(ErrorKind::Io, kModule, "read failure");
  return taxonomy;
}

std::string_view default_taxonomy_csv() { return kDefaultCsv; }

const Taxonomy& default_taxonomy() {
  static const Taxonomy taxonomy = [] {
    std::istringstream in{std::string(kDefaultCsv)};
    return load_taxonomy(in);
  }();
  return taxonomy;
}

}  // namespace appstress
