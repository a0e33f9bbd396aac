#pragma once

#include <cstdio>
#include <sstream>
#include <string>

#include <json.hpp>

#include "digit_forensics/harness.hpp"
#include "digit_forensics/reference.hpp"
#include "digit_forensics/scoring.hpp"

// JSON documents and text tables emitted by the command-line tool. JSON
// objects serialize with sorted keys, so equal values give equal bytes.

namespace digit_forensics {

inline nlohmann::json to_json(const ReferenceKey& key) {
  return {{"operator", std::string(operator_name(key.op))},
          {"entries_per_vector", key.entries_per_vector},
          {"observed_len_bucket", key.observed_len_bucket}};
}

// Deliberately omits created_at: printed references must be reproducible.
inline nlohmann::json to_json(const ReferenceDistribution& ref) {
  return {{"operator", std::string(operator_name(ref.op))},
          {"entries_per_vector", ref.entries_per_vector},
          {"observed_len_bucket", ref.observed_len_bucket},
          {"pmf", ref.pmf.probabilities()},
          {"calibration_floor", ref.calibration_floor},
          {"mc_draws", ref.mc_draws},
          {"calibration_samples", ref.calibration_samples},
          {"seed", ref.seed}};
}

inline nlohmann::json to_json(const TestOutcome& t) {
  return {{"operator", std::string(operator_name(t.op))},
          {"raw_score", t.raw_score},
          {"normalized_score", t.normalized_score},
          {"ks_statistic", t.ks.statistic},
          {"p_value", t.ks.p_value},
          {"resamples", t.ks.resamples},
          {"sample_count", t.sample_count},
          {"skipped", t.skipped},
          {"calibration_floor", t.calibration_floor},
          {"reference_key", to_json(t.reference_key)}};
}

inline nlohmann::json to_json(const InsufficientData& d) {
  return {{"operator", std::string(operator_name(d.op))},
          {"usable", d.usable},
          {"skipped", d.skipped},
          {"required", d.required}};
}

inline nlohmann::json to_json(const AggregateOutcome& a) {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& t : a.per_operator) per.push_back(to_json(t));
  nlohmann::json excluded = nlohmann::json::array();
  for (const auto& e : a.excluded) excluded.push_back(to_json(e));
  return {{"per_operator", per}, {"insufficient", excluded}, {"overall", a.overall}};
}

inline nlohmann::json to_json(const ConfusionMatrix& m) {
  return {{"tp", m.tp}, {"fn", m.fn}, {"fp", m.fp}, {"tn", m.tn}};
}

inline nlohmann::json to_json(const ValidationResult& r) {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& v : r.per_dataset) {
    per.push_back({{"name", v.name},
                   {"truth", std::string(truth_name(v.truth))},
                   {"overall", v.overall},
                   {"decision", std::string(truth_name(v.decision))}});
  }
  nlohmann::json excluded = nlohmann::json::array();
  for (const auto& e : r.excluded) {
    excluded.push_back({{"name", e.name}, {"truth", std::string(truth_name(e.truth))}, {"reason", e.reason}});
  }
  return {{"matrix", to_json(r.matrix)},
          {"accuracy", r.accuracy},
          {"f1_per_class",
           {{"manipulation_free", r.f1_per_class.first}, {"manipulated", r.f1_per_class.second}}},
          {"threshold", r.decision_threshold},
          {"per_dataset", per},
          {"excluded", excluded}};
}

inline nlohmann::json to_json(const FlagTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"confidence_level", r.confidence_level},
                    {"flagged_count", r.flagged_count},
                    {"flagged_ids", r.flagged_ids}});
  }
  nlohmann::json scored = nlohmann::json::array();
  for (const auto& s : t.scored) scored.push_back({{"id", s.id}, {"overall", s.overall}});
  nlohmann::json unscorable = nlohmann::json::array();
  for (const auto& u : t.unscorable) unscorable.push_back({{"id", u.id}, {"reason", u.reason}});
  return {{"rows", rows}, {"scored", scored}, {"unscorable", unscorable}};
}

namespace detail {

inline std::string fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

inline std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

}  // namespace detail

inline std::string render_text(const ReferenceDistribution& ref) {
  std::ostringstream out;
  out << "operator " << operator_name(ref.op) << ", n=" << ref.entries_per_vector
      << ", observed length bucket " << ref.observed_len_bucket << '\n';
  out << "digit  probability\n";
  for (std::size_t i = 0; i < kDigitCount; ++i) {
    out << "    " << i + 1 << "  " << detail::fixed(ref.pmf[i], 6) << '\n';
  }
  out << "calibration floor a = " << detail::fixed(ref.calibration_floor, 6) << " ("
      << ref.calibration_samples << " null samples, " << ref.mc_draws << " draws)\n";
  return out.str();
}

inline std::string render_text(const AggregateOutcome& a) {
  std::ostringstream out;
  out << "operator   n    raw     normalized  p-value\n";
  for (const auto& t : a.per_operator) {
    std::string name(operator_name(t.op));
    name.resize(10, ' ');
    out << name << ' ' << detail::pad(std::to_string(t.sample_count), 3) << "  "
        << detail::fixed(t.raw_score, 4) << "  " << detail::fixed(t.normalized_score, 4) << "      "
        << detail::fixed(t.ks.p_value, 5) << '\n';
  }
  for (const auto& e : a.excluded) {
    out << operator_name(e.op) << ": insufficient data (" << e.usable << " of " << e.required
        << " values)\n";
  }
  out << "overall anomaly probability: " << detail::fixed(a.overall, 4) << '\n';
  return out.str();
}

// Truth in rows, prediction in columns.
inline std::string render_text(const ValidationResult& r) {
  const ConfusionMatrix& m = r.matrix;
  std::ostringstream out;
  out << "              Positive  Negative  Total\n";
  out << "Positive      " << detail::pad(std::to_string(m.tp), 8) << "  "
      << detail::pad(std::to_string(m.fn), 8) << "  " << detail::pad(std::to_string(m.tp + m.fn), 5) << '\n';
  out << "Negative      " << detail::pad(std::to_string(m.fp), 8) << "  "
      << detail::pad(std::to_string(m.tn), 8) << "  " << detail::pad(std::to_string(m.fp + m.tn), 5) << '\n';
  out << "Total         " << detail::pad(std::to_string(m.tp + m.fp), 8) << "  "
      << detail::pad(std::to_string(m.fn + m.tn), 8) << "  " << detail::pad(std::to_string(m.total()), 5) << '\n';
  out << "(positive = manipulation-free; rows = truth, columns = prediction)\n";
  out << "accuracy " << detail::fixed(r.accuracy, 4) << ", F1 manipulation-free "
      << detail::fixed(r.f1_per_class.first, 4) << ", F1 manipulated "
      << detail::fixed(r.f1_per_class.second, 4) << ", threshold "
      << detail::fixed(r.decision_threshold, 2) << '\n';
  if (!r.excluded.empty()) out << r.excluded.size() << " dataset(s) excluded\n";
  return out.str();
}

inline std::string render_text(const FlagTable& t) {
  std::ostringstream out;
  out << "Confidence level    ";
  for (const auto& r : t.rows) out << detail::pad(detail::fixed(100.0 * r.confidence_level, 0) + "%", 6);
  out << "\nFlagged manuscripts ";
  for (const auto& r : t.rows) out << detail::pad(std::to_string(r.flagged_count), 6);
  out << '\n';
  out << t.scored.size() << " scored, " << t.unscorable.size() << " unscorable\n";
  return out.str();
}

}  // namespace digit_forensics
