#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ctime>
#include <string>
#include <vector>

#include "digit_forensics/digits.hpp"
#include "digit_forensics/error.hpp"
#include "digit_forensics/ks.hpp"
#include "digit_forensics/operators.hpp"
#include "digit_forensics/random.hpp"

namespace digit_forensics {

inline constexpr std::size_t kDefaultCalibrationSamples = 1000;
inline constexpr std::size_t kDefaultMcDraws = 100000;
inline constexpr std::size_t kMinMcDraws = 1000;

// Geometric buckets shared by entries_per_vector and the observed length.
inline constexpr std::array<std::size_t, 10> kSizeBuckets{1,  2,   5,   10,  20,
                                                          50, 100, 200, 500, 1000};

// Nearest bucket by log distance; ties resolve to the smaller bucket.
inline std::size_t size_bucket(std::size_t n) {
  const double ln = std::log(static_cast<double>(std::max<std::size_t>(n, 1)));
  std::size_t best = kSizeBuckets.front();
  double best_gap = std::fabs(ln - std::log(static_cast<double>(best)));
  for (std::size_t b : kSizeBuckets) {
    const double gap = std::fabs(ln - std::log(static_cast<double>(b)));
    if (gap < best_gap - 1e-12) {
      best = b;
      best_gap = gap;
    }
  }
  return best;
}

// Magnitude model of the synthetic vectors: entry = 10^W with
// W ~ U[c, c + decade_span] and c ~ U[center_lo, center_hi] once per vector.
struct SynthesisConfig {
  std::size_t entries_per_vector = 1;
  int decade_span = 3;
  double center_lo = -3.0;
  double center_hi = 3.0;
  std::size_t mc_draws = kDefaultMcDraws;
  std::uint64_t seed = kDefaultSeed;

  void validate() const {
    if (entries_per_vector < 1) {
      throw Error(ErrorCode::InvalidConfig, "entries_per_vector must be >= 1");
    }
    if (decade_span < 1) {
      throw Error(ErrorCode::InvalidConfig, "decade_span must be an integer >= 1");
    }
    if (!std::isfinite(center_lo) || !std::isfinite(center_hi) || center_lo > center_hi) {
      throw Error(ErrorCode::InvalidConfig, "center range must be a finite interval");
    }
    if (mc_draws < kMinMcDraws) {
      throw Error(ErrorCode::InvalidConfig, "mc_draws must be >= 1000");
    }
  }
};

struct ReferenceKey {
  OperatorKind op = OperatorKind::Mean;
  std::size_t entries_per_vector = 1;
  std::size_t observed_len_bucket = 1;

  friend bool operator==(const ReferenceKey&, const ReferenceKey&) = default;
};

inline ReferenceKey make_reference_key(OperatorKind op, std::size_t n,
                                       std::size_t observed_len) {
  std::size_t nb = size_bucket(n);
  // A spread or slope needs at least two entries per vector.
  if (op != OperatorKind::Mean) nb = std::max<std::size_t>(nb, 2);
  return ReferenceKey{op, nb, size_bucket(observed_len)};
}

struct ReferenceDistribution {
  OperatorKind op = OperatorKind::Mean;
  std::size_t entries_per_vector = 1;
  std::size_t observed_len_bucket = 0;  // 0 while uncalibrated
  DigitPmf pmf;
  double calibration_floor = 0.0;
  bool calibrated = false;
  std::size_t mc_draws = 0;
  std::size_t skipped_draws = 0;
  std::size_t calibration_samples = kDefaultCalibrationSamples;
  std::uint64_t seed = 0;
  std::string created_at;

  ReferenceKey key() const { return {op, entries_per_vector, observed_len_bucket}; }
};

namespace detail {

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

inline std::vector<double> synth_benford_vector(const SynthesisConfig& cfg, Engine& eng) {
  const double center = uniform(eng, cfg.center_lo, cfg.center_hi);
  std::vector<double> v(cfg.entries_per_vector);
  for (double& x : v) {
    x = std::pow(10.0, center + cfg.decade_span * uniform01(eng));
  }
  return v;
}

// One Monte-Carlo draw of the operator over fresh synthetic input.
// Returns false when the draw has no leading digit (zero, NaN, degenerate).
inline bool draw_operator_value(OperatorKind op, const SynthesisConfig& cfg,
                                Engine& eng, double& out) {
  const std::vector<double> x = synth_benford_vector(cfg, eng);
  if (op == OperatorKind::OlsSlope) {
    if (x.size() < 2) return false;
    const std::vector<double> y = synth_benford_vector(cfg, eng);
    double sxx = 0.0;
    const double mx = mean(x);
    for (double v : x) sxx += (v - mx) * (v - mx);
    if (!(sxx > 0.0)) return false;
    out = ols_slope(x, y);
  } else if (op == OperatorKind::StdDev) {
    if (x.size() < 2) return false;
    out = sample_stddev(x);
  } else {
    out = mean(x);
  }
  return has_leading_digit(out);
}

// Leading-digit law of `op` applied to Benford-conforming synthetic vectors.
// Draw i is seeded from (cfg.seed, i), so any thread count gives the same pmf.
inline ReferenceDistribution generate_reference(OperatorKind op, const SynthesisConfig& cfg,
                                                std::size_t threads = 0) {
  cfg.validate();
  const std::size_t workers = detail::worker_count(cfg.mc_draws, threads);
  std::vector<DigitHistogram::Counts> partial(workers);
  std::vector<std::size_t> skipped(workers, 0);
  detail::parallel_chunks(cfg.mc_draws, workers, [&](std::size_t begin, std::size_t end, std::size_t w) {
    DigitHistogram::Counts counts{};
    for (std::size_t i = begin; i < end; ++i) {
      Engine eng = make_engine(cfg.seed, StreamTag::ReferenceDraw, i);
      double value = 0.0;
      if (draw_operator_value(op, cfg, eng, value)) {
        ++counts[leading_digit(value).index()];
      } else {
        ++skipped[w];
      }
    }
    partial[w] = counts;
  });

  DigitHistogram::Counts total{};
  std::size_t total_skipped = 0;
  for (std::size_t w = 0; w < workers; ++w) {
    for (std::size_t d = 0; d < kDigitCount; ++d) total[d] += partial[w][d];
    total_skipped += skipped[w];
  }
  if (total_skipped * 10 > cfg.mc_draws) {
    throw Error(ErrorCode::TooManySkips,
                std::to_string(total_skipped) + " of " + std::to_string(cfg.mc_draws) +
                    " draws produced no digit for operator " +
                    std::string(operator_name(op)));
  }

  ReferenceDistribution ref;
  ref.op = op;
  ref.entries_per_vector = cfg.entries_per_vector;
  ref.pmf = DigitHistogram(total).to_pmf();
  ref.mc_draws = cfg.mc_draws;
  ref.skipped_draws = total_skipped;
  ref.seed = cfg.seed;
  ref.created_at = detail::utc_timestamp();
  return ref;
}

// Raw scores 1 - p of `null_samples` observation sets of size observed_len
// drawn from the reference itself.
inline std::vector<double> null_raw_scores(const DigitPmf& pmf, std::uint64_t seed,
                                           std::size_t null_samples,
                                           std::size_t observed_len,
                                           const KsOptions& ks) {
  const KsNullDistribution table(pmf, observed_len, ks.resamples, ks.seed);
  const DigitSampler sampler(pmf);
  const std::uint64_t stream = derive_seed(seed, StreamTag::CalibrationNull, observed_len);
  std::vector<double> raws(null_samples);
  for (std::size_t i = 0; i < null_samples; ++i) {
    Engine eng = make_engine(stream, StreamTag::CalibrationNull, i);
    raws[i] = 1.0 - table.test(sampler.draw_histogram(observed_len, eng)).p_value;
  }
  return raws;
}

// Floor a = the worst (largest) raw score any conforming null sample produced.
inline ReferenceDistribution calibrate_floor(const ReferenceDistribution& ref,
                                             const SynthesisConfig& cfg,
                                             std::size_t observed_len,
                                             std::size_t null_samples = kDefaultCalibrationSamples,
                                             const KsOptions& ks = {}) {
  if (observed_len < 1) {
    throw Error(ErrorCode::InvalidArgument, "observed_len must be >= 1");
  }
  if (null_samples < 1) {
    throw Error(ErrorCode::InvalidArgument, "null_samples must be >= 1");
  }
  const std::vector<double> raws = null_raw_scores(ref.pmf, cfg.seed, null_samples, observed_len, ks);
  ReferenceDistribution out = ref;
  out.calibration_floor = *std::max_element(raws.begin(), raws.end());
  out.calibrated = true;
  out.calibration_samples = null_samples;
  out.observed_len_bucket = size_bucket(observed_len);
  return out;
}

}  // namespace digit_forensics
