#pragma once

// Test-only reference computations, kept independent of the library paths
// they check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace oracle {

using Pmf = std::array<double, 9>;
using Counts = std::array<std::uint64_t, 9>;

inline Pmf benford() {
  Pmf p{};
  for (int d = 1; d <= 9; ++d) p[d - 1] = std::log10(static_cast<double>(d + 1) / d);
  return p;
}

inline double ks_gap(const Counts& counts, const Pmf& ref) {
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  double f_obs = 0.0;
  double f_ref = 0.0;
  double gap = 0.0;
  std::uint64_t running = 0;
  for (std::size_t i = 0; i < 9; ++i) {
    running += counts[i];
    f_obs = static_cast<double>(running) / static_cast<double>(total);
    f_ref += ref[i];
    gap = std::max(gap, std::fabs(f_obs - f_ref));
  }
  return gap;
}

// Exact P(D >= observed gap) under `ref`, by walking all 9^total ordered
// digit sequences.
inline double exact_ks_p_value(const Counts& observed, const Pmf& ref) {
  std::uint64_t total = 0;
  for (auto c : observed) total += c;
  const double target = ks_gap(observed, ref);
  std::vector<int> seq(total, 0);
  double p = 0.0;
  while (true) {
    Counts counts{};
    double prob = 1.0;
    for (int d : seq) {
      ++counts[static_cast<std::size_t>(d)];
      prob *= ref[static_cast<std::size_t>(d)];
    }
    if (ks_gap(counts, ref) >= target - 1e-12) p += prob;
    std::size_t pos = 0;
    while (pos < seq.size() && seq[pos] == 8) seq[pos++] = 0;
    if (pos == seq.size()) break;
    ++seq[pos];
  }
  return p;
}

struct NullPoint {
  double gap;
  double prob;
};

// Every ordered sequence of `total` digits, collapsed to (gap, probability).
inline std::vector<NullPoint> exact_null_table(std::size_t total, const Pmf& ref) {
  std::vector<NullPoint> out;
  std::vector<int> seq(total, 0);
  while (true) {
    Counts counts{};
    double prob = 1.0;
    for (int d : seq) {
      ++counts[static_cast<std::size_t>(d)];
      prob *= ref[static_cast<std::size_t>(d)];
    }
    out.push_back({ks_gap(counts, ref), prob});
    std::size_t pos = 0;
    while (pos < seq.size() && seq[pos] == 8) seq[pos++] = 0;
    if (pos == seq.size()) break;
    ++seq[pos];
  }
  return out;
}

inline double exact_p_from_table(const std::vector<NullPoint>& table, double gap) {
  double p = 0.0;
  for (const auto& pt : table) {
    if (pt.gap >= gap - 1e-12) p += pt.prob;
  }
  return p;
}

}  // namespace oracle
