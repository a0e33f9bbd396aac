#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

namespace digit_forensics {

// Fixed default so that runs without an explicit seed are reproducible.
inline constexpr std::uint64_t kDefaultSeed = 20230701;

// Stream tags keep independent consumers of one user seed from overlapping.
enum class StreamTag : std::uint64_t {
  ReferenceDraw = 1,
  CalibrationNull = 2,
  KsResample = 3,
  PairSubsample = 4,
  Noise = 5,
  Split = 6,
  SyntheticCorpus = 7,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based substream seed: draw `index` of consumer `tag` gets the same
// seed no matter which thread or in what order it is evaluated.
inline std::uint64_t derive_seed(std::uint64_t seed, StreamTag tag,
                                 std::uint64_t index = 0) {
  std::uint64_t h = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(tag)));
  return splitmix64(h ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed, StreamTag tag,
                          std::uint64_t index = 0) {
  return Engine(derive_seed(seed, tag, index));
}

// [0, 1) with 53 random bits. Used instead of std::uniform_real_distribution,
// whose output is not pinned by the standard.
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline double uniform(Engine& eng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(eng);
}

// Uniform integer in [0, bound) by rejection; bound must be > 0.
inline std::uint64_t uniform_index(Engine& eng, std::uint64_t bound) {
  const std::uint64_t limit = Engine::max() - Engine::max() % bound;
  std::uint64_t x;
  do {
    x = eng();
  } while (x >= limit);
  return x % bound;
}

template <typename T>
void fisher_yates(std::vector<T>& items, Engine& eng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[uniform_index(eng, i)]);
  }
}

namespace detail {

inline std::size_t worker_count(std::size_t work_items, std::size_t requested) {
  std::size_t threads = requested;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(threads, work_items / 1024 + 1));
}

// Runs fn(begin, end, chunk_index) over contiguous chunks of [0, count).
template <typename Fn>
void parallel_chunks(std::size_t count, std::size_t threads, Fn&& fn) {
  const std::size_t workers = worker_count(count, threads);
  if (workers == 1) {
    fn(std::size_t{0}, count, std::size_t{0});
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  const std::size_t step = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(count, w * step);
    const std::size_t end = std::min(count, begin + step);
    pool.emplace_back([&fn, begin, end, w] { fn(begin, end, w); });
  }
}

}  // namespace detail

}  // namespace digit_forensics
