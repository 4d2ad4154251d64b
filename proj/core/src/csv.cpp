#include "appstress/csv.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>

#include "appstress/error.hpp"

namespace appstress {

bool is_valid_utf8(std::string_view text) {
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(text[i]);
    std::size_t extra = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    for (std::size_t k = 1; k <= extra; ++k) {
      if (i + k >= n) return false;
      const auto cc = static_cast<unsigned char>(text[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Overlong encodings, surrogates, and out-of-range code points.
    if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) || (extra == 3 && cp < 0x10000) ||
        cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += extra + 1;
  }
  return true;
}

std::string_view trim(std::string_view text) {
  const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  return text;
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<std::vector<std::string>> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"' && trim(current).empty()) {
      current.clear();
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.emplace_back(was_quoted ? current : std::string(trim(current)));
      current.clear();
      was_quoted = false;
    } else {
      current.push_back(c);
    }
  }
  if (quoted) return std::nullopt;
  fields.emplace_back(was_quoted ? current : std::string(trim(current)));
  return fields;
}

std::string csv_field(std::string_view value) {
  const bool needs_quotes = value.find_first_of(",\"\n") != std::string_view::npos ||
                            (!value.empty() && (value.front() == ' ' || value.back() == ' '));
  if (!needs_quotes) return std::string(value);
  std::string out = "\"";
  for (const char c : value) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

namespace {

bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace

CsvReader::CsvReader(std::istream& in, std::string_view module) : in_(in), module_(module) {
  if (!in_.good()) raise(ErrorKind::Io, module_, "input stream is not readable");
  std::string line;
  while (read_line(in_, line)) {
    ++line_;
    if (line_ == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (!fields) raise(ErrorKind::Schema, module_, "malformed header row");
    for (auto& f : *fields) f = to_lower(f);
    header_ = std::move(*fields);
    return;
  }
  if (in_.bad()) raise(ErrorKind::Io, module_, "read failure");
  raise(ErrorKind::Schema, module_, "missing header row");
}

std::optional<std::size_t> CsvReader::find_column(std::string_view name) const {
  const auto it = std::find(header_.begin(), header_.end(), name);
  if (it == header_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - header_.begin());
}

std::size_t CsvReader::require_column(std::string_view name) const {
  if (auto idx = find_column(name)) return *idx;
  raise(ErrorKind::Schema, module_, "missing required column '" + std::string(name) + "'");
}

bool CsvReader::next(CsvRecord& record, std::string& error) {
  std::string line;
  while (read_line(in_, line)) {
    ++line_;
    if (trim(line).empty()) continue;
    record.line = line_;
    record.fields.clear();
    error.clear();
    if (!is_valid_utf8(line)) {
      error = "invalid UTF-8";
      return true;
    }
    auto fields = split_csv_line(line);
    if (!fields) {
      error = "unterminated quoted field";
      return true;
    }
    if (fields->size() != header_.size()) {
      error = "expected " + std::to_string(header_.size()) + " fields, found " +
              std::to_string(fields->size());
      return true;
    }
    record.fields = std::move(*fields);
    return true;
  }
  if (in_.bad()) raise(ErrorKind::Io, module_, "read failure");
  return false;
}

LineReader::LineReader(std::istream& in, std::string_view module) : in_(in) {
  if (!in_.good()) raise(ErrorKind::Io, module, "input stream is not readable");
}

bool LineReader::next(std::size_t& line_number, std::string& line) {
  while (read_line(in_, line)) {
    ++line_;
    if (line_ == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (trim(line).empty()) continue;
    line_number = line_;
    return true;
  }
  return false;
}

}  // namespace appstress
