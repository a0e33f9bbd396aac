#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "digit_forensics/digits.hpp"
#include "digit_forensics/error.hpp"
#include "digit_forensics/ks.hpp"
#include "digit_forensics/operators.hpp"
#include "digit_forensics/reference.hpp"

namespace digit_forensics {

inline constexpr std::size_t kDefaultMinSamples = 5;

struct ScoreOptions {
  std::size_t min_samples = kDefaultMinSamples;
  KsOptions ks;
};

struct TestOutcome {
  OperatorKind op = OperatorKind::Mean;
  double raw_score = 0.0;         // 1 - p
  double normalized_score = 0.0;  // clip((raw - a) / (1 - a), 0, 1)
  KsResult ks;
  std::size_t sample_count = 0;
  std::size_t skipped = 0;
  ReferenceKey reference_key;
  double calibration_floor = 0.0;
};

// Too few usable digits for the operator to be tested at all.
struct InsufficientData {
  OperatorKind op = OperatorKind::Mean;
  std::size_t usable = 0;
  std::size_t skipped = 0;
  std::size_t required = kDefaultMinSamples;
};

using OperatorScore = std::variant<TestOutcome, InsufficientData>;

inline OperatorKind score_operator_kind(const OperatorScore& s) {
  return std::visit([](const auto& v) { return v.op; }, s);
}

inline double normalize_score(double raw, double floor) {
  if (raw <= floor) return 0.0;
  return std::clamp((raw - floor) / (1.0 - floor), 0.0, 1.0);
}

// Shares KS null tables between tests with the same reference pmf, sample
// size and resampling options. Safe for concurrent use.
class NullTableCache {
 public:
  std::shared_ptr<const KsNullDistribution> get(const DigitPmf& pmf, std::uint64_t total,
                                                const KsOptions& ks) {
    const Key key{pmf.probabilities(), total, ks.resamples, ks.seed};
    {
      std::lock_guard lock(mutex_);
      if (auto it = tables_.find(key); it != tables_.end()) return it->second;
    }
    auto table = std::make_shared<const KsNullDistribution>(pmf, total, ks.resamples, ks.seed);
    std::lock_guard lock(mutex_);
    return tables_.try_emplace(key, std::move(table)).first->second;
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return tables_.size();
  }

 private:
  using Key = std::tuple<DigitVector, std::uint64_t, std::size_t, std::uint64_t>;
  mutable std::mutex mutex_;
  std::map<Key, std::shared_ptr<const KsNullDistribution>> tables_;
};

// T_o: raw = 1 - p of the discrete KS test of the values' leading digits
// against the operator's reference, rescaled by the reference's floor.
inline OperatorScore score_operator(std::span<const double> values, OperatorKind op,
                                    const ReferenceDistribution& ref,
                                    const ScoreOptions& options = {},
                                    NullTableCache* tables = nullptr) {
  if (!ref.calibrated) {
    throw Error(ErrorCode::UncalibratedReference,
                "reference for " + std::string(operator_name(ref.op)) + " has no floor");
  }
  if (ref.op != op) {
    throw Error(ErrorCode::InvalidArgument, "reference operator does not match");
  }
  const HistogramResult h = histogram(values);
  const std::size_t usable = static_cast<std::size_t>(h.histogram.total());
  if (usable < std::max<std::size_t>(options.min_samples, 1)) {
    return InsufficientData{op, usable, h.skipped, options.min_samples};
  }

  KsResult ks;
  if (tables != nullptr) {
    ks = tables->get(ref.pmf, usable, options.ks)->test(h.histogram);
  } else {
    ks = ks_p_value(h.histogram, ref.pmf, options.ks.resamples, options.ks.seed);
  }
  TestOutcome out;
  out.op = op;
  out.ks = ks;
  out.raw_score = 1.0 - ks.p_value;
  out.normalized_score = normalize_score(out.raw_score, ref.calibration_floor);
  out.sample_count = usable;
  out.skipped = h.skipped;
  out.reference_key = ref.key();
  out.calibration_floor = ref.calibration_floor;
  return out;
}

struct AggregateOutcome {
  std::vector<TestOutcome> per_operator;
  std::vector<InsufficientData> excluded;
  double overall = 0.0;
};

// Overall anomaly probability: mean of the usable normalized scores.
inline AggregateOutcome aggregate(std::span<const OperatorScore> scores) {
  AggregateOutcome out;
  for (const OperatorScore& s : scores) {
    if (const auto* t = std::get_if<TestOutcome>(&s)) {
      out.per_operator.push_back(*t);
    } else {
      out.excluded.push_back(std::get<InsufficientData>(s));
    }
  }
  if (out.per_operator.empty()) {
    std::string groups;
    for (const auto& e : out.excluded) {
      if (!groups.empty()) groups += ", ";
      groups += std::string(operator_name(e.op)) + " (" + std::to_string(e.usable) + " of " +
                std::to_string(e.required) + " required values)";
    }
    throw Error(ErrorCode::NoUsableOutcomes,
                groups.empty() ? std::string("no operator groups") : "insufficient data: " + groups);
  }
  double sum = 0.0;
  for (const auto& t : out.per_operator) sum += t.normalized_score;
  out.overall = sum / static_cast<double>(out.per_operator.size());
  return out;
}

inline bool flag(double overall, double confidence_level) {
  return overall >= confidence_level;
}

}  // namespace digit_forensics
