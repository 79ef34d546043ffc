#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace quadrat {

/// Line-oriented CSV reader for the flat formats used here: no quoting, LF
/// line endings, a fixed header on the first line.
class CsvReader {
 public:
  CsvReader(std::istream& in, std::string_view expected_header);

  /// Next data row split on ',', or nullopt at end of input. Blank lines are
  /// skipped.
  std::optional<std::vector<std::string>> next();

  /// "line N" for error messages.
  std::string where() const;

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

std::vector<std::string> split(std::string_view text, char sep);

std::int64_t parse_int(std::string_view text, const std::string& where);
double parse_double(std::string_view text, const std::string& where);
std::vector<std::int64_t> parse_int_list(std::string_view text, char sep, const std::string& where);
std::vector<double> parse_double_list(std::string_view text, char sep, const std::string& where);

/// printf-style %.*g formatting; `digits` = 17 round-trips a double exactly.
std::string format_double(double value, int digits);

/// Rounds through the decimal representation with the given significant
/// digits, so in-memory values match what a text file would hold.
double round_significant(double value, int digits);

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temp file then renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Flat `key=value` configuration. '#' starts a comment; blank lines ignored.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text);
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.contains(key); }
  std::optional<std::string> get(const std::string& key) const;
  std::string get_or(const std::string& key, std::string fallback) const;
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  /// Keys present in the file but never read through get/get_or.
  std::vector<std::string> unused_keys() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, bool> touched_;
};

}  // namespace quadrat
