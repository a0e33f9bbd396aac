#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "digit_forensics/digits.hpp"
#include "digit_forensics/error.hpp"
#include "digit_forensics/random.hpp"

namespace digit_forensics {

inline constexpr std::size_t kDefaultKsResamples = 2000;

// Two statistics closer than this are treated as ties. Distinct histograms
// can produce mathematically equal gaps that differ in the last bits.
inline constexpr double kKsTieTolerance = 1e-12;

// Resampling used by the scoring pipeline and by floor calibration. The two
// must agree: the floor is a maximum over null raw scores whose resolution is
// 1 / (resamples + 1).
inline constexpr std::size_t kDefaultScoringResamples = 20000;

struct KsOptions {
  std::size_t resamples = kDefaultScoringResamples;
  std::uint64_t seed = kDefaultSeed;
};

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t resamples = 0;

  friend bool operator==(const KsResult&, const KsResult&) = default;
};

inline double ks_distance(const DigitVector& cdf_a, const DigitVector& cdf_b) {
  double d = 0.0;
  for (std::size_t i = 0; i < kDigitCount; ++i) {
    d = std::max(d, std::fabs(cdf_a[i] - cdf_b[i]));
  }
  return d;
}

// Discrete KS statistic: max over d of |F_obs(d) - F_ref(d)|.
inline double ks_discrete(const DigitHistogram& observed, const DigitPmf& ref) {
  return ks_distance(cdf(observed), cdf(ref));
}

// Inverse-CDF sampler over the nine digits.
class DigitSampler {
 public:
  explicit DigitSampler(const DigitPmf& pmf) : cumulative_(cdf(pmf)) {
    cumulative_.back() = 1.0;
  }

  std::size_t draw_index(Engine& eng) const {
    const double u = uniform01(eng);
    for (std::size_t i = 0; i + 1 < kDigitCount; ++i) {
      if (u < cumulative_[i]) return i;
    }
    return kDigitCount - 1;
  }

  DigitHistogram draw_histogram(std::uint64_t size, Engine& eng) const {
    DigitHistogram::Counts counts{};
    for (std::uint64_t k = 0; k < size; ++k) ++counts[draw_index(eng)];
    return DigitHistogram(counts);
  }

 private:
  DigitVector cumulative_;
};

// Null distribution of the discrete KS statistic for samples of `total`
// digits drawn from `ref`. Each fixed block of resamples uses its own
// substream, so the table depends only on (ref, total, resamples, seed) and
// not on thread layout.
class KsNullDistribution {
 public:
  KsNullDistribution(const DigitPmf& ref, std::uint64_t total,
                     std::size_t resamples, std::uint64_t seed,
                     std::size_t threads = 0)
      : total_(total), ref_cdf_(cdf(ref)) {
    if (total == 0) {
      throw Error(ErrorCode::EmptyHistogram, "null distribution needs total >= 1");
    }
    if (resamples == 0) {
      throw Error(ErrorCode::InvalidArgument, "resamples must be positive");
    }
    statistics_.resize(resamples);
    const DigitSampler sampler(ref);
    const std::size_t blocks = (resamples + kBlock - 1) / kBlock;
    detail::parallel_chunks(blocks, threads, [&](std::size_t begin, std::size_t end, std::size_t) {
      for (std::size_t b = begin; b < end; ++b) {
        Engine eng = make_engine(seed, StreamTag::KsResample, b);
        const std::size_t last = std::min(resamples, (b + 1) * kBlock);
        for (std::size_t i = b * kBlock; i < last; ++i) {
          statistics_[i] = ks_distance(cdf(sampler.draw_histogram(total_, eng)), ref_cdf_);
        }
      }
    });
    std::sort(statistics_.begin(), statistics_.end());
  }

  std::uint64_t total() const noexcept { return total_; }
  std::size_t resamples() const noexcept { return statistics_.size(); }
  const DigitVector& reference_cdf() const noexcept { return ref_cdf_; }

  std::size_t count_at_least(double statistic) const {
    auto it = std::lower_bound(statistics_.begin(), statistics_.end(),
                               statistic - kKsTieTolerance);
    return static_cast<std::size_t>(statistics_.end() - it);
  }

  // Add-one smoothed: (1 + #{resampled >= observed}) / (resamples + 1).
  double p_value(double statistic) const {
    return static_cast<double>(1 + count_at_least(statistic)) /
           static_cast<double>(resamples() + 1);
  }

  KsResult test(const DigitHistogram& observed) const {
    if (observed.total() != total_) {
      throw Error(ErrorCode::InvalidArgument, "observed size does not match null table");
    }
    const double d = ks_distance(cdf(observed), ref_cdf_);
    return KsResult{d, p_value(d), resamples()};
  }

 private:
  static constexpr std::size_t kBlock = 512;

  std::uint64_t total_;
  DigitVector ref_cdf_;
  std::vector<double> statistics_;
};

// Monte-Carlo p-value of the discrete KS statistic.
inline KsResult ks_p_value(const DigitHistogram& observed, const DigitPmf& ref,
                           std::size_t resamples, std::uint64_t seed) {
  if (observed.empty()) {
    throw Error(ErrorCode::EmptyHistogram, "observed histogram is empty");
  }
  return KsNullDistribution(ref, observed.total(), resamples, seed).test(observed);
}

inline KsResult ks_p_value(const DigitHistogram& observed, const DigitPmf& ref,
                           std::uint64_t seed) {
  return ks_p_value(observed, ref, kDefaultKsResamples, seed);
}

}  // namespace digit_forensics
