#include "quadrat/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

#include "quadrat/error.hpp"

namespace quadrat {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

CsvReader::CsvReader(std::istream& in, std::string_view expected_header) : in_(in) {
  std::string header;
  if (!std::getline(in_, header)) {
    throw Error(ErrorKind::parse, "empty file, expected header '" + std::string(expected_header) + "'");
  }
  ++line_;
  if (!header.empty() && header.back() == '\r') header.pop_back();
  // Tolerate a UTF-8 byte order mark.
  if (header.rfind("\xEF\xBB\xBF", 0) == 0) header.erase(0, 3);
  if (header != expected_header) {
    throw Error(ErrorKind::parse, "bad header '" + header + "', expected '" +
                                      std::string(expected_header) + "'");
  }
}

std::optional<std::vector<std::string>> CsvReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    return split(line, ',');
  }
  return std::nullopt;
}

std::string CsvReader::where() const { return "line " + std::to_string(line_); }

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(text.substr(start));
      break;
    }
    out.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::int64_t parse_int(std::string_view text, const std::string& where) {
  text = trim(text);
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw Error(ErrorKind::parse, where + ": not an integer: '" + std::string(text) + "'");
  }
  return value;
}

double parse_double(std::string_view text, const std::string& where) {
  text = trim(text);
  std::string buf(text);
  if (buf == "inf" || buf == "+inf") return INFINITY;
  if (buf == "-inf") return -INFINITY;
  char* end = nullptr;
  double value = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size() || !std::isfinite(value)) {
    throw Error(ErrorKind::parse, where + ": not a number: '" + buf + "'");
  }
  return value;
}

std::vector<std::int64_t> parse_int_list(std::string_view text, char sep, const std::string& where) {
  std::vector<std::int64_t> out;
  if (trim(text).empty()) return out;
  for (const auto& part : split(text, sep)) out.push_back(parse_int(part, where));
  return out;
}

std::vector<double> parse_double_list(std::string_view text, char sep, const std::string& where) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (const auto& part : split(text, sep)) out.push_back(parse_double(part, where));
  return out;
}

std::string format_double(double value, int digits) {
  char buf[64];
  int n = std::snprintf(buf, sizeof(buf), "%.*g", digits, value);
  return std::string(buf, static_cast<std::size_t>(n));
}

double round_significant(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, value);
  return std::strtod(buf, nullptr);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorKind::io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::io, "cannot rename " + tmp.string() + ": " + ec.message());
}

KeyValueConfig KeyValueConfig::parse(std::string_view text) {
  KeyValueConfig cfg;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::parse, "config line " + std::to_string(line_no) + ": missing '='");
    }
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) {
      throw Error(ErrorKind::parse, "config line " + std::to_string(line_no) + ": empty key");
    }
    if (cfg.values_.contains(key)) {
      throw Error(ErrorKind::invalid_config, "config key '" + key + "' given twice");
    }
    cfg.values_[key] = value;
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  return parse(read_file(path));
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  touched_[key] = true;
  return it->second;
}

std::string KeyValueConfig::get_or(const std::string& key, std::string fallback) const {
  auto v = get(key);
  return v ? *v : std::move(fallback);
}

std::vector<std::string> KeyValueConfig::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : values_) {
    if (!touched_.contains(k)) out.push_back(k);
  }
  return out;
}

}  // namespace quadrat
