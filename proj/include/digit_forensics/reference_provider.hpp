#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <tuple>
#include <utility>

#include "digit_forensics/reference.hpp"
#include "digit_forensics/reference_cache.hpp"

namespace digit_forensics {

struct ProviderOptions {
  SynthesisConfig synthesis;  // entries_per_vector is overridden per request
  std::size_t calibration_samples = kDefaultCalibrationSamples;
  KsOptions ks;
  std::size_t threads = 0;
};

// Hands out calibrated references by (operator, n, observed length),
// generating on first use. Backed by an optional on-disk cache; a cached
// entry is reused only if it was produced with the same draws, seed and
// calibration sample count.
class ReferenceProvider {
 public:
  explicit ReferenceProvider(ProviderOptions options,
                             std::optional<std::filesystem::path> cache_path = std::nullopt)
      : options_(std::move(options)) {
    if (cache_path) cache_.emplace(*cache_path);
  }

  const ProviderOptions& options() const noexcept { return options_; }

  const ReferenceDistribution& get(OperatorKind op, std::size_t n, std::size_t observed_len) {
    return get(make_reference_key(op, n, observed_len));
  }

  const ReferenceDistribution& get(const ReferenceKey& key) {
    std::lock_guard lock(mutex_);
    const auto k = as_tuple(key);
    if (auto it = calibrated_.find(k); it != calibrated_.end()) return it->second;

    if (cache_) {
      if (auto hit = cache_->find(key); hit && matches(*hit)) {
        ++hits_;
        return calibrated_.emplace(k, std::move(*hit)).first->second;
      }
    }
    ++misses_;
    const SynthesisConfig cfg = config_for(key.entries_per_vector);
    auto raw = uncalibrated_.find({static_cast<int>(key.op), key.entries_per_vector});
    if (raw == uncalibrated_.end()) {
      raw = uncalibrated_
                .emplace(std::pair{static_cast<int>(key.op), key.entries_per_vector},
                         generate_reference(key.op, cfg, options_.threads))
                .first;
    }
    ReferenceDistribution ref = calibrate_floor(raw->second, cfg, key.observed_len_bucket,
                                                options_.calibration_samples, options_.ks);
    if (cache_) cache_->store(ref);
    return calibrated_.emplace(k, std::move(ref)).first->second;
  }

  std::size_t cache_hits() const noexcept { return hits_; }
  std::size_t cache_misses() const noexcept { return misses_; }

  SynthesisConfig config_for(std::size_t entries_per_vector) const {
    SynthesisConfig cfg = options_.synthesis;
    cfg.entries_per_vector = entries_per_vector;
    return cfg;
  }

 private:
  using Key = std::tuple<int, std::size_t, std::size_t>;

  static Key as_tuple(const ReferenceKey& key) {
    return {static_cast<int>(key.op), key.entries_per_vector, key.observed_len_bucket};
  }

  bool matches(const ReferenceDistribution& ref) const {
    return ref.mc_draws == options_.synthesis.mc_draws && ref.seed == options_.synthesis.seed &&
           ref.calibration_samples == options_.calibration_samples;
  }

  ProviderOptions options_;
  std::optional<ReferenceCache> cache_;
  std::mutex mutex_;
  std::map<Key, ReferenceDistribution> calibrated_;
  std::map<std::pair<int, std::size_t>, ReferenceDistribution> uncalibrated_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

}  // namespace digit_forensics
