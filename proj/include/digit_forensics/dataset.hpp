#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "digit_forensics/csv.hpp"
#include "digit_forensics/error.hpp"
#include "digit_forensics/operators.hpp"
#include "digit_forensics/random.hpp"

namespace digit_forensics {

inline constexpr std::size_t kDefaultPairCap = 200;

struct Feature {
  std::string label;
  std::vector<double> values;  // NaN marks a missing cell
};

// Numeric table whose columns are the features.
struct DatasetMatrix {
  std::string name;
  std::vector<Feature> columns;
  std::size_t n_rows = 0;
  std::vector<std::string> dropped_columns;

  std::size_t n_features() const noexcept { return columns.size(); }
};

inline DatasetMatrix parse_csv(std::string_view text, std::string name,
                               const CsvOptions& options = {}) {
  if (options.delimiter == options.decimal_separator) {
    throw Error(ErrorCode::InvalidArgument, "delimiter and decimal separator must differ");
  }
  const std::vector<CsvRecord> records = parse_csv_records(text, options.delimiter);
  if (records.empty()) throw Error(ErrorCode::MalformedCsv, "line 1: empty file");

  const std::size_t width = records.front().fields.size();
  for (const CsvRecord& r : records) {
    if (r.fields.size() != width) {
      throw Error(ErrorCode::MalformedCsv,
                  "line " + std::to_string(r.line) + ": expected " + std::to_string(width) +
                      " fields, found " + std::to_string(r.fields.size()));
    }
  }

  std::vector<std::string> labels(width);
  std::size_t first_row = 0;
  if (options.header) {
    for (std::size_t c = 0; c < width; ++c) labels[c] = std::string(detail::trim(records[0].fields[c]));
    first_row = 1;
  }
  for (std::size_t c = 0; c < width; ++c) {
    if (labels[c].empty()) labels[c] = "col" + std::to_string(c + 1);
  }

  DatasetMatrix d;
  d.name = std::move(name);
  d.n_rows = records.size() - first_row;
  for (std::size_t c = 0; c < width; ++c) {
    Feature f{labels[c], {}};
    f.values.reserve(d.n_rows);
    bool numeric = true;
    std::size_t present = 0;
    for (std::size_t r = first_row; r < records.size() && numeric; ++r) {
      const Cell cell = parse_cell(records[r].fields[c], options.decimal_separator);
      if (cell.kind == CellKind::Text) numeric = false;
      if (cell.kind == CellKind::Number) ++present;
      f.values.push_back(cell.value);
    }
    if (numeric && present > 0) {
      d.columns.push_back(std::move(f));
    } else {
      d.dropped_columns.push_back(labels[c]);
    }
  }

  const bool enough = std::any_of(d.columns.begin(), d.columns.end(), [](const Feature& f) {
    return std::count_if(f.values.begin(), f.values.end(), [](double v) { return !std::isnan(v); }) >= 2;
  });
  if (!enough) {
    throw Error(ErrorCode::NoNumericColumns,
                d.name + ": no numeric column with at least 2 values");
  }
  return d;
}

inline DatasetMatrix load_csv(const std::filesystem::path& path, const CsvOptions& options = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), path.stem().string(), options);
}

namespace detail {

inline std::string shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string quote_if_needed(const std::string& s, char delimiter) {
  if (s.find_first_of(std::string{delimiter, '"', '\n', '\r'}) == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

// Numeric columns only, shortest round-trip decimals, empty cell for NaN.
inline std::string write_csv(const DatasetMatrix& d, char delimiter = ',') {
  std::string out;
  for (std::size_t c = 0; c < d.columns.size(); ++c) {
    if (c) out += delimiter;
    out += detail::quote_if_needed(d.columns[c].label, delimiter);
  }
  out += '\n';
  for (std::size_t r = 0; r < d.n_rows; ++r) {
    for (std::size_t c = 0; c < d.columns.size(); ++c) {
      if (c) out += delimiter;
      const double v = d.columns[c].values[r];
      if (!std::isnan(v)) out += detail::shortest(v);
    }
    out += '\n';
  }
  return out;
}

struct FeaturePair {
  std::size_t regressor = 0;
  std::size_t response = 0;

  friend bool operator==(const FeaturePair&, const FeaturePair&) = default;
  friend auto operator<=>(const FeaturePair&, const FeaturePair&) = default;
};

struct SkippedPair {
  FeaturePair pair;
  std::string reason;
};

struct ComputedStats {
  std::vector<double> means;  // NaN when a feature has no values
  std::vector<double> stds;   // NaN when a feature has fewer than 2 values
  std::vector<double> slopes;
  std::vector<FeaturePair> slope_pairs;  // parallel to `slopes`
  std::vector<SkippedPair> skipped_pairs;
  std::size_t n_rows = 0;
  std::size_t n_features = 0;

  const std::vector<double>& group(OperatorKind op) const {
    switch (op) {
      case OperatorKind::Mean: return means;
      case OperatorKind::StdDev: return stds;
      case OperatorKind::OlsSlope: return slopes;
    }
    return means;
  }
  std::vector<double>& group(OperatorKind op) {
    return const_cast<std::vector<double>&>(std::as_const(*this).group(op));
  }
};

namespace detail {

inline std::vector<double> present_values(const std::vector<double>& values) {
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) {
    if (!std::isnan(v)) out.push_back(v);
  }
  return out;
}

}  // namespace detail

// Ordered pairs (j, k), j != k, with k regressed on j. When there are more
// than pair_cap of them a seeded uniform subset is kept, in the original order.
inline std::vector<FeaturePair> select_pairs(std::size_t n_features, std::size_t pair_cap,
                                             std::uint64_t pair_seed) {
  std::vector<FeaturePair> pairs;
  for (std::size_t j = 0; j < n_features; ++j) {
    for (std::size_t k = 0; k < n_features; ++k) {
      if (j != k) pairs.push_back({j, k});
    }
  }
  if (pairs.size() > pair_cap) {
    Engine eng = make_engine(pair_seed, StreamTag::PairSubsample);
    fisher_yates(pairs, eng);
    pairs.resize(pair_cap);
    std::sort(pairs.begin(), pairs.end());
  }
  return pairs;
}

inline ComputedStats compute_stats(const DatasetMatrix& d, std::size_t pair_cap = kDefaultPairCap,
                                   std::uint64_t pair_seed = kDefaultSeed) {
  if (d.n_features() == 0) {
    throw Error(ErrorCode::DegenerateInput, d.name + ": dataset has no features");
  }
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  ComputedStats s;
  s.n_rows = d.n_rows;
  s.n_features = d.n_features();
  for (const Feature& f : d.columns) {
    const std::vector<double> v = detail::present_values(f.values);
    s.means.push_back(v.empty() ? kNaN : mean(v));
    s.stds.push_back(v.size() < 2 ? kNaN : sample_stddev(v));
  }

  for (const FeaturePair& p : select_pairs(d.n_features(), pair_cap, pair_seed)) {
    const auto& xs = d.columns[p.regressor].values;
    const auto& ys = d.columns[p.response].values;
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t r = 0; r < d.n_rows; ++r) {
      if (!std::isnan(xs[r]) && !std::isnan(ys[r])) {
        x.push_back(xs[r]);
        y.push_back(ys[r]);
      }
    }
    try {
      s.slopes.push_back(ols_slope(x, y));
      s.slope_pairs.push_back(p);
    } catch (const Error& e) {
      s.skipped_pairs.push_back({p, e.what()});
    }
  }
  return s;
}

}  // namespace digit_forensics
