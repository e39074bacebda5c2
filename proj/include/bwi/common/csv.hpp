#pragma once

// Minimal CSV support for the comma-separated, unquoted tables this project
// reads and writes. Fields never contain commas, so no quoting is handled.

#include <charconv>
#include <cstddef>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <fmt/format.h>

#include "bwi/common/error.hpp"

namespace bwi::csv {

enum class CsvErrorKind { MissingHeader, WrongHeader, FieldCount };
using CsvError = KindedError<CsvErrorKind>;

struct Row {
  std::size_t line = 0;  // 1-based line number in the source
  std::vector<std::string> fields;

  const std::string& operator[](std::size_t i) const { return fields[i]; }
  std::size_t size() const noexcept { return fields.size(); }
};

inline std::vector<std::string> split(std::string_view line, char sep = ',') {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

/// Reads a table whose first line must equal `header` exactly (after trimming
/// a UTF-8 BOM and a trailing CR). Blank lines are skipped.
inline std::vector<Row> read(std::istream& in, const std::vector<std::string>& header) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto fields = split(line);
    for (auto& f : fields) f = std::string(trim(f));
    if (!have_header) {
      if (fields != header) {
        std::string expected;
        for (std::size_t i = 0; i < header.size(); ++i) {
          expected += (i ? "," : "") + header[i];
        }
        throw CsvError(CsvErrorKind::WrongHeader,
                       fmt::format("line {}: expected header '{}', got '{}'", line_no,
                                   expected, line));
      }
      have_header = true;
      continue;
    }
    if (fields.size() != header.size()) {
      throw CsvError(CsvErrorKind::FieldCount,
                     fmt::format("line {}: expected {} fields, got {}", line_no,
                                 header.size(), fields.size()));
    }
    rows.push_back(Row{line_no, std::move(fields)});
  }
  if (!have_header) throw CsvError(CsvErrorKind::MissingHeader, "missing header row");
  return rows;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  if (s == "inf" || s == "Inf" || s == "INF") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<long long> parse_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Shortest round-trip representation; byte-stable across runs.
inline std::string num(double v) { return fmt::format("{}", v); }

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  template <class... Fields>
  void row(const Fields&... fields) {
    bool first = true;
    ((out_ << (first ? "" : ",") << to_field(fields), first = false), ...);
    out_ << '\n';
  }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) out_ << (i ? "," : "") << fields[i];
    out_ << '\n';
  }

 private:
  static std::string to_field(const std::string& s) { return s; }
  static std::string to_field(std::string_view s) { return std::string(s); }
  static std::string to_field(const char* s) { return s; }
  static std::string to_field(double v) { return num(v); }
  static std::string to_field(int v) { return std::to_string(v); }
  static std::string to_field(long v) { return std::to_string(v); }
  static std::string to_field(long long v) { return std::to_string(v); }
  static std::string to_field(unsigned long v) { return std::to_string(v); }
  static std::string to_field(unsigned long long v) { return std::to_string(v); }

  std::ostream& out_;
};

}  // namespace bwi::csv
