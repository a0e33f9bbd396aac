#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "digit_forensics/dataset.hpp"
#include "digit_forensics/error.hpp"
#include "digit_forensics/random.hpp"
#include "digit_forensics/reference_provider.hpp"
#include "digit_forensics/report.hpp"
#include "digit_forensics/scoring.hpp"

namespace digit_forensics {

// ---------------------------------------------------------------------------
// Scoring of whole datasets and reports

inline constexpr std::size_t kDefaultReportSampleSize = 100;

// Scores operator groups against references chosen by (operator, sample size
// n behind each statistic, number of usable digits in the group).
class Scorer {
 public:
  Scorer(ReferenceProvider& provider, ScoreOptions options = {})
      : provider_(provider), options_(options) {}

  const ScoreOptions& options() const noexcept { return options_; }

  OperatorScore score_group(OperatorKind op, std::span<const double> values, std::size_t n) {
    const HistogramResult h = histogram(values);
    const auto usable = static_cast<std::size_t>(h.histogram.total());
    if (usable < options_.min_samples) {
      return InsufficientData{op, usable, h.skipped, options_.min_samples};
    }
    const ReferenceDistribution& ref = provider_.get(op, n, usable);
    return score_operator(values, op, ref, options_, &tables_);
  }

  std::vector<OperatorScore> score_groups(const ComputedStats& stats) {
    std::vector<OperatorScore> scores;
    for (OperatorKind op : kAllOperators) {
      scores.push_back(score_group(op, stats.group(op), stats.n_rows));
    }
    return scores;
  }

  std::vector<OperatorScore> score_groups(const ReportedStats& report,
                                          std::size_t default_n = kDefaultReportSampleSize) {
    const std::size_t n = reported_sample_size(report).value_or(default_n);
    std::vector<OperatorScore> scores;
    for (const auto& [op, values] : report.groups) {
      scores.push_back(score_group(op, values, n));
    }
    return scores;
  }

  AggregateOutcome score(const ComputedStats& stats) { return aggregate(score_groups(stats)); }

  AggregateOutcome score(const ReportedStats& report,
                         std::size_t default_n = kDefaultReportSampleSize) {
    return aggregate(score_groups(report, default_n));
  }

 private:
  ReferenceProvider& provider_;
  ScoreOptions options_;
  NullTableCache tables_;
};

// ---------------------------------------------------------------------------
// Noise injection

enum class NoiseSign { Symmetric, Positive, Negative };

// Perturbation s -> s + sign * eps * |m|, eps ~ U[min_fraction, max_fraction],
// m the mean of the statistic's group.
struct NoiseSpec {
  double min_fraction = 0.01;
  double max_fraction = 0.10;
  std::uint64_t seed = kDefaultSeed;
  NoiseSign sign = NoiseSign::Symmetric;

  void validate() const {
    const bool identity = min_fraction == 0.0 && max_fraction == 0.0;
    if (!identity && !(min_fraction > 0.0 && min_fraction <= max_fraction && max_fraction < 1.0)) {
      throw Error(ErrorCode::InvalidConfig,
                  "noise fractions must satisfy 0 < min <= max < 1 (or both 0)");
    }
  }
};

inline void inject_noise_group(std::vector<double>& values, const NoiseSpec& spec, Engine& eng) {
  double sum = 0.0;
  std::size_t finite = 0;
  for (double v : values) {
    if (std::isfinite(v)) {
      sum += v;
      ++finite;
    }
  }
  if (finite == 0) return;
  const double group_mean = sum / static_cast<double>(finite);
  for (double& s : values) {
    if (!std::isfinite(s)) continue;
    const double eps = uniform(eng, spec.min_fraction, spec.max_fraction);
    double sign = 1.0;
    switch (spec.sign) {
      case NoiseSign::Symmetric: sign = (eng() >> 63) ? 1.0 : -1.0; break;
      case NoiseSign::Positive: sign = 1.0; break;
      case NoiseSign::Negative: sign = -1.0; break;
    }
    const double scale = group_mean != 0.0 ? std::fabs(group_mean) : std::fabs(s);
    s += sign * eps * scale;
  }
}

inline ComputedStats inject_noise(const ComputedStats& stats, const NoiseSpec& spec, Engine& eng) {
  spec.validate();
  ComputedStats out = stats;
  for (OperatorKind op : kAllOperators) inject_noise_group(out.group(op), spec, eng);
  return out;
}

// ---------------------------------------------------------------------------
// Confusion matrix. Positive = manipulation-free; rows are the truth and
// columns the prediction.

struct ConfusionMatrix {
  std::size_t tp = 0;  // clean, predicted clean
  std::size_t fn = 0;  // clean, predicted manipulated
  std::size_t fp = 0;  // manipulated, predicted clean
  std::size_t tn = 0;  // manipulated, predicted manipulated

  std::size_t total() const noexcept { return tp + fn + fp + tn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct ConfusionMetrics {
  double accuracy = 0.0;
  double f1_clean = 0.0;
  double f1_manipulated = 0.0;
};

namespace detail {

inline double f1(std::size_t hits, std::size_t predicted, std::size_t actual) {
  if (hits == 0) return 0.0;
  const double precision = static_cast<double>(hits) / static_cast<double>(predicted);
  const double recall = static_cast<double>(hits) / static_cast<double>(actual);
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace detail

inline ConfusionMetrics confusion_metrics(const ConfusionMatrix& m) {
  ConfusionMetrics out;
  if (m.total() == 0) return out;
  out.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(m.total());
  out.f1_clean = detail::f1(m.tp, m.tp + m.fp, m.tp + m.fn);
  out.f1_manipulated = detail::f1(m.tn, m.tn + m.fn, m.tn + m.fp);
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic corpus: each feature is log-uniform over decade_span decades with
// its own offset, i.e. the same magnitude model the references assume.

struct SyntheticCorpusSpec {
  std::size_t count = 100;
  std::size_t rows_min = 20;
  std::size_t rows_max = 200;
  std::size_t features_min = 5;
  std::size_t features_max = 20;
  int decade_span = 3;
  double center_lo = -3.0;
  double center_hi = 3.0;
  std::uint64_t seed = kDefaultSeed;
};

inline DatasetMatrix synthetic_dataset(const SyntheticCorpusSpec& spec, std::size_t index) {
  Engine eng = make_engine(spec.seed, StreamTag::SyntheticCorpus, index);
  const std::size_t rows = spec.rows_min + uniform_index(eng, spec.rows_max - spec.rows_min + 1);
  const std::size_t features =
      spec.features_min + uniform_index(eng, spec.features_max - spec.features_min + 1);
  char name[32];
  std::snprintf(name, sizeof name, "synthetic-%04zu", index);
  DatasetMatrix d;
  d.name = name;
  d.n_rows = rows;
  for (std::size_t f = 0; f < features; ++f) {
    const double center = uniform(eng, spec.center_lo, spec.center_hi);
    Feature feature{"f" + std::to_string(f + 1), std::vector<double>(rows)};
    for (double& v : feature.values) v = std::pow(10.0, center + spec.decade_span * uniform01(eng));
    d.columns.push_back(std::move(feature));
  }
  return d;
}

inline std::vector<DatasetMatrix> synthetic_corpus(const SyntheticCorpusSpec& spec) {
  if (spec.rows_min < 2 || spec.rows_min > spec.rows_max || spec.features_min < 1 ||
      spec.features_min > spec.features_max || spec.decade_span < 1) {
    throw Error(ErrorCode::InvalidConfig, "invalid synthetic corpus spec");
  }
  std::vector<DatasetMatrix> out;
  out.reserve(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) out.push_back(synthetic_dataset(spec, i));
  return out;
}

// ---------------------------------------------------------------------------
// Validation experiment

enum class Truth { ManipulationFree, Manipulated };

inline std::string_view truth_name(Truth t) {
  return t == Truth::ManipulationFree ? "manipulation-free" : "manipulated";
}

struct DatasetVerdict {
  std::string name;
  Truth truth = Truth::ManipulationFree;
  double overall = 0.0;
  Truth decision = Truth::ManipulationFree;
};

struct ExcludedDataset {
  std::string name;
  Truth truth = Truth::ManipulationFree;
  std::string reason;
};

struct ValidationResult {
  ConfusionMatrix matrix;
  double accuracy = 0.0;
  std::pair<double, double> f1_per_class;  // (manipulation-free, manipulated)
  double decision_threshold = 0.5;
  std::vector<DatasetVerdict> per_dataset;
  std::vector<ExcludedDataset> excluded;
};

struct ValidationOptions {
  NoiseSpec noise;
  double decision_threshold = 0.5;
  std::uint64_t seed = kDefaultSeed;
  std::size_t pair_cap = kDefaultPairCap;
};

inline ConfusionMatrix tally(std::span<const DatasetVerdict> verdicts) {
  ConfusionMatrix m;
  for (const auto& v : verdicts) {
    const bool predicted_clean = v.decision == Truth::ManipulationFree;
    if (v.truth == Truth::ManipulationFree) {
      (predicted_clean ? m.tp : m.fn)++;
    } else {
      (predicted_clean ? m.fp : m.tn)++;
    }
  }
  return m;
}

// Seeded 50/50 split: one half keeps its true statistics, the other half has
// them perturbed; each dataset is then scored and thresholded.
inline ValidationResult run_validation(std::span<const DatasetMatrix> datasets, Scorer& scorer,
                                       const ValidationOptions& options = {}) {
  if (datasets.size() < 2 || datasets.size() % 2 != 0) {
    throw Error(ErrorCode::InvalidArgument,
                "validation needs an even number (>= 2) of datasets, got " +
                    std::to_string(datasets.size()));
  }
  options.noise.validate();

  std::vector<std::size_t> order(datasets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Engine split = make_engine(options.seed, StreamTag::Split);
  fisher_yates(order, split);
  std::vector<Truth> truth(datasets.size(), Truth::ManipulationFree);
  for (std::size_t i = order.size() / 2; i < order.size(); ++i) truth[order[i]] = Truth::Manipulated;

  ValidationResult result;
  result.decision_threshold = options.decision_threshold;
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    const DatasetMatrix& d = datasets[i];
    try {
      ComputedStats stats =
          compute_stats(d, options.pair_cap, derive_seed(options.seed, StreamTag::PairSubsample, i));
      if (truth[i] == Truth::Manipulated) {
        Engine noise = make_engine(options.noise.seed, StreamTag::Noise, i);
        stats = inject_noise(stats, options.noise, noise);
      }
      const double overall = scorer.score(stats).overall;
      const Truth decision =
          overall >= options.decision_threshold ? Truth::Manipulated : Truth::ManipulationFree;
      result.per_dataset.push_back({d.name, truth[i], overall, decision});
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InvalidConfig) throw;
      result.excluded.push_back({d.name, truth[i], e.what()});
    }
  }
  std::sort(result.per_dataset.begin(), result.per_dataset.end(),
            [](const auto& a, const auto& b) { return a.name < b.name; });
  std::sort(result.excluded.begin(), result.excluded.end(),
            [](const auto& a, const auto& b) { return a.name < b.name; });

  result.matrix = tally(result.per_dataset);
  const ConfusionMetrics metrics = confusion_metrics(result.matrix);
  result.accuracy = metrics.accuracy;
  result.f1_per_class = {metrics.f1_clean, metrics.f1_manipulated};
  return result;
}

// ---------------------------------------------------------------------------
// Corpus scan

inline const std::vector<double> kDefaultConfidenceLevels{0.90, 0.92, 0.94, 0.96, 0.98};

struct ScoredReport {
  std::string id;
  double overall = 0.0;
};

struct UnscorableReport {
  std::string id;
  std::string reason;
};

struct FlagRow {
  double confidence_level = 0.0;
  std::size_t flagged_count = 0;
  std::vector<std::string> flagged_ids;
};

struct FlagTable {
  std::vector<FlagRow> rows;
  std::vector<ScoredReport> scored;
  std::vector<UnscorableReport> unscorable;
};

inline void validate_levels(std::span<const double> levels) {
  if (levels.empty()) throw Error(ErrorCode::InvalidArgument, "at least one confidence level is required");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(levels[i] > 0.0 && levels[i] < 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "confidence levels must lie in (0, 1)");
    }
    if (i > 0 && !(levels[i] > levels[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "confidence levels must be strictly increasing");
    }
  }
}

// Row i lists the reports with overall >= levels[i]; with increasing levels
// each row is a subset of the previous one.
inline FlagTable build_flag_table(std::vector<ScoredReport> scored, std::span<const double> levels) {
  validate_levels(levels);
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  FlagTable table;
  for (double level : levels) {
    FlagRow row{level, 0, {}};
    for (const auto& r : scored) {
      if (flag(r.overall, level)) row.flagged_ids.push_back(r.id);
    }
    row.flagged_count = row.flagged_ids.size();
    table.rows.push_back(std::move(row));
  }
  table.scored = std::move(scored);
  return table;
}

inline FlagTable scan_corpus(std::span<const ReportedStats> reports, Scorer& scorer,
                             std::span<const double> levels = kDefaultConfidenceLevels,
                             std::size_t default_n = kDefaultReportSampleSize) {
  if (reports.empty()) throw Error(ErrorCode::InvalidArgument, "corpus has no reports");
  validate_levels(levels);
  std::vector<ScoredReport> scored;
  std::vector<UnscorableReport> unscorable;
  for (const ReportedStats& r : reports) {
    try {
      scored.push_back({r.source_id, scorer.score(r, default_n).overall});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoUsableOutcomes && e.code() != ErrorCode::SchemaViolation) throw;
      unscorable.push_back({r.source_id, e.what()});
    }
  }
  FlagTable table = build_flag_table(std::move(scored), levels);
  std::sort(unscorable.begin(), unscorable.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  table.unscorable = std::move(unscorable);
  return table;
}

}  // namespace digit_forensics
