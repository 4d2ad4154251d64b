#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace appstress {

bool is_valid_utf8(std::string_view text);

std::string_view trim(std::string_view text);
std::string to_lower(std::string_view text);

/// Splits one CSV line. Double-quoted fields may contain commas and `""`
/// escapes; fields are whitespace-trimmed. Returns nullopt on an
/// unterminated quote.
std::optional<std::vector<std::string>> split_csv_line(std::string_view line);

/// Quotes a field when it contains a comma, quote, or leading/trailing space.
std::string csv_field(std::string_view value);

struct CsvRecord {
  std::size_t line = 0;  // 1-based line number in the source
  std::vector<std::string> fields;
};

/// Line-oriented CSV reader with a mandatory header row. Blank lines are
/// skipped and do not count as data rows.
class CsvReader {
 public:
  /// Reads the header. Raises an io error when the stream is unreadable and
  /// a schema error when the header is missing. `module` prefixes errors.
  CsvReader(std::istream& in, std::string_view module);

  const std::vector<std::string>& header() const noexcept { return header_; }
  std::optional<std::size_t> find_column(std::string_view name) const;
  /// Raises a schema error naming the missing column.
  std::size_t require_column(std::string_view name) const;

  /// Next non-blank line. On a malformed line (bad quoting, invalid UTF-8)
  /// `fields` is empty and `error` holds the reason.
  bool next(CsvRecord& record, std::string& error);

 private:
  std::istream& in_;
  std::string module_;
  std::vector<std::string> header_;
  std::size_t line_ = 0;
};

/// Reads non-blank lines with their line numbers; used by JSONL parsers.
class LineReader {
 public:
  LineReader(std::istream& in, std::string_view module);
  bool next(std::size_t& line_number, std::string& line);

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

}  // namespace appstress
