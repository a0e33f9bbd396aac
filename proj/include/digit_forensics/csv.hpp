#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "digit_forensics/error.hpp"

namespace digit_forensics {

struct CsvOptions {
  char delimiter = ',';
  bool header = true;
  char decimal_separator = '.';
};

struct CsvRecord {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

// RFC 4180 records: quoted fields may hold delimiters, doubled quotes and
// line breaks. Blank lines are ignored. Field counts are not checked here.
inline std::vector<CsvRecord> parse_csv_records(std::string_view text, char delimiter) {
  std::vector<CsvRecord> records;
  CsvRecord current;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  bool record_has_content = false;
  std::size_t line = 1;
  current.line = 1;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    if (record_has_content) records.push_back(std::move(current));
    current = CsvRecord{};
    record_has_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      if (!field.empty() || field_was_quoted) {
        throw Error(ErrorCode::MalformedCsv,
                    "line " + std::to_string(line) + ": quote inside unquoted field");
      }
      in_quotes = true;
      field_was_quoted = true;
      record_has_content = true;
    } else if (c == delimiter) {
      end_field();
      record_has_content = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_record();
      ++line;
      current.line = line;
    } else {
      if (field_was_quoted) {
        throw Error(ErrorCode::MalformedCsv,
                    "line " + std::to_string(line) + ": text after closing quote");
      }
      field.push_back(c);
      if (c != ' ' && c != '\t') record_has_content = true;
    }
  }
  if (in_quotes) {
    throw Error(ErrorCode::MalformedCsv,
                "line " + std::to_string(current.line) + ": unterminated quoted field");
  }
  if (record_has_content || !field.empty()) end_record();
  return records;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline bool is_missing_token(std::string_view s) {
  return s.empty() || s == "NA" || s == "N/A" || s == "NaN" || s == "nan" || s == "null" ||
         s == "NULL";
}

}  // namespace detail

enum class CellKind { Number, Missing, Text };

struct Cell {
  CellKind kind = CellKind::Missing;
  double value = std::numeric_limits<double>::quiet_NaN();
};

inline Cell parse_cell(std::string_view raw, char decimal_separator = '.') {
  std::string_view s = detail::trim(raw);
  if (detail::is_missing_token(s)) return {};
  std::string buffer(s);
  if (decimal_separator != '.') {
    for (char& c : buffer) {
      if (c == decimal_separator) c = '.';
    }
  }
  std::string_view digits = buffer;
  if (!digits.empty() && digits.front() == '+') digits.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc{} || ptr != digits.data() + digits.size() || !std::isfinite(value)) {
    return {CellKind::Text, std::numeric_limits<double>::quiet_NaN()};
  }
  return {CellKind::Number, value};
}

}  // namespace digit_forensics
