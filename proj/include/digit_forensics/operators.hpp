#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "digit_forensics/error.hpp"

namespace digit_forensics {

enum class OperatorKind { Mean, StdDev, OlsSlope };

inline constexpr std::array<OperatorKind, 3> kAllOperators{
    OperatorKind::Mean, OperatorKind::StdDev, OperatorKind::OlsSlope};

inline std::string_view operator_name(OperatorKind op) {
  switch (op) {
    case OperatorKind::Mean: return "mean";
    case OperatorKind::StdDev: return "std";
    case OperatorKind::OlsSlope: return "ols_slope";
  }
  return "unknown";
}

inline std::optional<OperatorKind> try_parse_operator(std::string_view name) {
  for (OperatorKind op : kAllOperators) {
    if (operator_name(op) == name) return op;
  }
  return std::nullopt;
}

inline OperatorKind parse_operator(std::string_view name) {
  if (auto op = try_parse_operator(name)) return *op;
  throw Error(ErrorCode::UnknownOperator,
              "'" + std::string(name) + "' (valid: mean, std, ols_slope)");
}

inline double mean(std::span<const double> v) {
  if (v.empty()) throw Error(ErrorCode::DegenerateInput, "mean of empty vector");
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

// Sample standard deviation (n - 1 denominator), two-pass.
inline double sample_stddev(std::span<const double> v) {
  if (v.size() < 2) {
    throw Error(ErrorCode::DegenerateInput, "stddev needs at least 2 values");
  }
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Slope of the simple regression of y on x: cov(x, y) / var(x).
inline double ols_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::DegenerateInput, "slope needs paired vectors of equal length");
  }
  if (x.size() < 2) {
    throw Error(ErrorCode::DegenerateInput, "slope needs at least 2 pairs");
  }
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    sxx += dx * dx;
    sxy += dx * (y[i] - my);
  }
  if (!(sxx > 0.0)) {
    throw Error(ErrorCode::DegenerateInput, "regressor has zero variance");
  }
  return sxy / sxx;
}

// For OlsSlope, `values` is the regressor and `paired` the response.
inline double apply_operator(OperatorKind op, std::span<const double> values,
                             std::span<const double> paired = {}) {
  switch (op) {
    case OperatorKind::Mean:
      return mean(values);
    case OperatorKind::StdDev:
      return sample_stddev(values);
    case OperatorKind::OlsSlope:
      return ols_slope(values, paired);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown operator");
}

}  // namespace digit_forensics
