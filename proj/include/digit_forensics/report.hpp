#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "digit_forensics/error.hpp"
#include "digit_forensics/operators.hpp"

namespace digit_forensics {

// Statistics transcribed from one manuscript, grouped by operator.
struct ReportedStats {
  std::string source_id;
  std::map<OperatorKind, std::vector<double>> groups;
  std::map<std::string, std::string> metadata;
};

namespace detail {

inline std::string pointer_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

[[noreturn]] inline void schema_error(const std::string& pointer, const std::string& what) {
  throw Error(ErrorCode::SchemaViolation, pointer + ": " + what);
}

}  // namespace detail

// Document shape:
//   { "source_id": str, "groups": { "mean"|"std"|"ols_slope": [num...] },
//     "metadata": { str: str } }
inline ReportedStats parse_report(const nlohmann::json& doc, const std::string& fallback_id = {}) {
  if (!doc.is_object()) detail::schema_error("", "report must be a JSON object");
  ReportedStats r;
  if (doc.contains("source_id")) {
    if (!doc["source_id"].is_string()) detail::schema_error("/source_id", "must be a string");
    r.source_id = doc["source_id"].get<std::string>();
  } else {
    r.source_id = fallback_id;
  }
  if (r.source_id.empty()) detail::schema_error("/source_id", "missing");

  if (!doc.contains("groups")) detail::schema_error("/groups", "missing");
  const auto& groups = doc["groups"];
  if (!groups.is_object()) detail::schema_error("/groups", "must be an object");
  if (groups.empty()) detail::schema_error("/groups", "at least one operator group is required");
  for (const auto& [name, values] : groups.items()) {
    const OperatorKind op = parse_operator(name);
    const std::string base = "/groups/" + detail::pointer_token(name);
    if (!values.is_array()) detail::schema_error(base, "must be an array of numbers");
    std::vector<double> out;
    out.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      const auto& v = values[i];
      if (!v.is_number()) detail::schema_error(base + "/" + std::to_string(i), "not a number");
      const double x = v.get<double>();
      if (!std::isfinite(x)) detail::schema_error(base + "/" + std::to_string(i), "not finite");
      out.push_back(x);
    }
    r.groups[op] = std::move(out);
  }

  if (doc.contains("metadata")) {
    const auto& meta = doc["metadata"];
    if (!meta.is_object()) detail::schema_error("/metadata", "must be an object");
    for (const auto& [key, value] : meta.items()) {
      if (value.is_string()) {
        r.metadata[key] = value.get<std::string>();
      } else if (value.is_number()) {
        r.metadata[key] = value.dump();
      } else {
        detail::schema_error("/metadata/" + detail::pointer_token(key), "must be a string");
      }
    }
  }
  return r;
}

inline ReportedStats parse_report(const std::string& text, const std::string& fallback_id = {}) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    detail::schema_error("", std::string("invalid JSON: ") + e.what());
  }
  return parse_report(doc, fallback_id);
}

inline ReportedStats load_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_report(buffer.str(), path.stem().string());
}

// Sample size behind each reported statistic, from metadata "n".
inline std::optional<std::size_t> reported_sample_size(const ReportedStats& r) {
  const auto it = r.metadata.find("n");
  if (it == r.metadata.end()) return std::nullopt;
  std::size_t n = 0;
  const std::string& s = it->second;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
  if (ec != std::errc{} || ptr != s.data() + s.size() || n == 0) {
    throw Error(ErrorCode::SchemaViolation, "/metadata/n: must be a positive integer");
  }
  return n;
}

}  // namespace digit_forensics
