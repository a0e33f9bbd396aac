#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>

#include "digit_forensics/error.hpp"

namespace digit_forensics {

inline constexpr std::size_t kDigitCount = 9;

using DigitVector = std::array<double, kDigitCount>;

// A leading decimal digit, 1..9.
class Digit {
 public:
  explicit Digit(int value) : value_(value) {
    if (value < 1 || value > 9) {
      throw Error(ErrorCode::InvalidArgument,
                  "digit must be in 1..9, got " + std::to_string(value));
    }
  }

  int value() const noexcept { return value_; }
  std::size_t index() const noexcept { return static_cast<std::size_t>(value_ - 1); }

  friend bool operator==(Digit, Digit) = default;

 private:
  int value_;
};

namespace detail {

// Largest relative gap (in units of epsilon) below an integer that is still
// snapped up to it. Scaling by a power of ten is exact only up to 10^22, so
// significands like 2.9999999999999996 can appear for a value typed as 3e25.
inline constexpr double kSnapUlps = 4.0;

inline double scale_to_significand(double magnitude) {
  int exponent = static_cast<int>(std::floor(std::log10(magnitude)));
  double s = magnitude;
  if (exponent < -300) {
    s *= 1e300;
    exponent += 300;
  }
  if (exponent > 0) {
    s /= std::pow(10.0, exponent);
  } else if (exponent < 0) {
    s *= std::pow(10.0, -exponent);
  }
  while (s >= 10.0) s /= 10.0;
  while (s < 1.0) s *= 10.0;
  const double up = std::ceil(s);
  if (up - s > 0.0 && up - s <= kSnapUlps * 0x1.0p-52 * s) {
    s = up;
  }
  if (s >= 10.0) s /= 10.0;
  return s;
}

}  // namespace detail

// First significant decimal digit of |x|.
inline Digit leading_digit(double x) {
  if (x == 0.0 || !std::isfinite(x)) {
    throw Error(ErrorCode::ZeroOrNonFinite, "value carries no leading digit");
  }
  const double s = detail::scale_to_significand(std::fabs(x));
  return Digit(static_cast<int>(s));
}

inline bool has_leading_digit(double x) noexcept {
  return x != 0.0 && std::isfinite(x);
}

// A probability vector over the digits 1..9.
class DigitPmf {
 public:
  DigitPmf() = default;

  static DigitPmf from_probabilities(const DigitVector& probs,
                                     double tolerance = 1e-9) {
    double sum = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw Error(ErrorCode::InvalidDistribution,
                    "probabilities must be finite and non-negative");
      }
      sum += p;
    }
    if (std::fabs(sum - 1.0) > tolerance) {
      throw Error(ErrorCode::InvalidDistribution,
                  "probabilities sum to " + std::to_string(sum));
    }
    DigitPmf pmf;
    pmf.probs_ = probs;
    return pmf;
  }

  double operator[](std::size_t index) const { return probs_[index]; }
  double at(Digit d) const { return probs_[d.index()]; }
  const DigitVector& probabilities() const noexcept { return probs_; }

  friend bool operator==(const DigitPmf&, const DigitPmf&) = default;

 private:
  DigitVector probs_{};
};

// P(d) = log10(1 + 1/d).
inline DigitPmf benford_pmf() {
  DigitVector probs{};
  for (int d = 1; d <= 9; ++d) {
    probs[static_cast<std::size_t>(d - 1)] = std::log10(1.0 + 1.0 / d);
  }
  return DigitPmf::from_probabilities(probs, 1e-12);
}

inline DigitPmf uniform_digit_pmf() {
  DigitVector probs{};
  probs.fill(1.0 / 9.0);
  return DigitPmf::from_probabilities(probs, 1e-12);
}

class DigitHistogram {
 public:
  using Counts = std::array<std::uint64_t, kDigitCount>;

  DigitHistogram() = default;
  explicit DigitHistogram(const Counts& counts) : counts_(counts) {
    total_ = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  }

  void add(Digit d, std::uint64_t times = 1) {
    counts_[d.index()] += times;
    total_ += times;
  }

  std::uint64_t count(Digit d) const { return counts_[d.index()]; }
  const Counts& counts() const noexcept { return counts_; }
  std::uint64_t total() const noexcept { return total_; }
  bool empty() const noexcept { return total_ == 0; }

  DigitVector frequencies() const {
    if (total_ == 0) {
      throw Error(ErrorCode::EmptyHistogram, "histogram has no observations");
    }
    DigitVector f{};
    for (std::size_t i = 0; i < kDigitCount; ++i) {
      f[i] = static_cast<double>(counts_[i]) / static_cast<double>(total_);
    }
    return f;
  }

  DigitPmf to_pmf() const { return DigitPmf::from_probabilities(frequencies()); }

  friend bool operator==(const DigitHistogram&, const DigitHistogram&) = default;

 private:
  Counts counts_{};
  std::uint64_t total_ = 0;
};

struct HistogramResult {
  DigitHistogram histogram;
  std::size_t skipped = 0;
};

// Zeros and non-finite entries are counted in `skipped`, never dropped silently.
inline HistogramResult histogram(std::span<const double> values) {
  HistogramResult result;
  for (double v : values) {
    if (has_leading_digit(v)) {
      result.histogram.add(leading_digit(v));
    } else {
      ++result.skipped;
    }
  }
  return result;
}

inline DigitVector cdf(const DigitPmf& pmf) {
  DigitVector c{};
  double running = 0.0;
  for (std::size_t i = 0; i < kDigitCount; ++i) {
    running += pmf[i];
    c[i] = running;
  }
  return c;
}

// Cumulated from integer counts so that F(9) is exactly 1.
inline DigitVector cdf(const DigitHistogram& h) {
  if (h.empty()) {
    throw Error(ErrorCode::EmptyHistogram, "histogram has no observations");
  }
  DigitVector c{};
  std::uint64_t running = 0;
  for (std::size_t i = 0; i < kDigitCount; ++i) {
    running += h.counts()[i];
    c[i] = static_cast<double>(running) / static_cast<double>(h.total());
  }
  return c;
}

// Half the L1 distance between two digit distributions.
inline double total_variation(const DigitPmf& a, const DigitPmf& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < kDigitCount; ++i) sum += std::fabs(a[i] - b[i]);
  return 0.5 * sum;
}

}  // namespace digit_forensics
