#pragma once

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "digit_forensics/error.hpp"
#include "digit_forensics/reference.hpp"

namespace digit_forensics {

inline constexpr int kCacheVersion = 1;

inline std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::Io, "SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

// nlohmann::json objects keep keys sorted and print doubles in shortest
// round-trip form, so dump() is already a canonical serialization.
inline nlohmann::json entry_payload(const ReferenceDistribution& ref) {
  nlohmann::json j;
  j["operator"] = std::string(operator_name(ref.op));
  j["entries_per_vector"] = ref.entries_per_vector;
  j["observed_len_bucket"] = ref.observed_len_bucket;
  j["pmf"] = ref.pmf.probabilities();
  j["calibration_floor"] = ref.calibration_floor;
  j["mc_draws"] = ref.mc_draws;
  j["calibration_samples"] = ref.calibration_samples;
  j["seed"] = ref.seed;
  j["created_at"] = ref.created_at;
  return j;
}

inline nlohmann::json to_cache_entry(const ReferenceDistribution& ref) {
  nlohmann::json j = entry_payload(ref);
  j["checksum"] = sha256_hex(j.dump());
  return j;
}

inline ReferenceDistribution from_cache_entry(const nlohmann::json& entry) {
  try {
    if (!entry.is_object() || !entry.contains("checksum")) {
      throw Error(ErrorCode::CorruptCache, "entry without checksum");
    }
    nlohmann::json payload = entry;
    const std::string checksum = payload.at("checksum").get<std::string>();
    payload.erase("checksum");
    if (sha256_hex(payload.dump()) != checksum) {
      throw Error(ErrorCode::CorruptCache, "checksum mismatch");
    }
    ReferenceDistribution ref;
    ref.op = parse_operator(payload.at("operator").get<std::string>());
    ref.entries_per_vector = payload.at("entries_per_vector").get<std::size_t>();
    ref.observed_len_bucket = payload.at("observed_len_bucket").get<std::size_t>();
    ref.pmf = DigitPmf::from_probabilities(payload.at("pmf").get<DigitVector>());
    ref.calibration_floor = payload.at("calibration_floor").get<double>();
    ref.calibrated = true;
    ref.mc_draws = payload.at("mc_draws").get<std::size_t>();
    ref.calibration_samples = payload.at("calibration_samples").get<std::size_t>();
    ref.seed = payload.at("seed").get<std::uint64_t>();
    ref.created_at = payload.value("created_at", std::string{});
    if (!(ref.calibration_floor >= 0.0 && ref.calibration_floor < 1.0)) {
      throw Error(ErrorCode::CorruptCache, "calibration_floor outside [0, 1)");
    }
    return ref;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CorruptCache) throw;
    throw Error(ErrorCode::CorruptCache, e.what());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptCache, e.what());
  }
}

// One JSON document holding every calibrated reference, keyed by
// (operator, entries_per_vector bucket, observed-length bucket).
// Readers share a lock; writers are exclusive and replace the file atomically.
class ReferenceCache {
 public:
  explicit ReferenceCache(std::filesystem::path path) : path_(std::move(path)) {}

  const std::filesystem::path& path() const noexcept { return path_; }

  ReferenceDistribution load(const ReferenceKey& key) const {
    std::shared_lock lock(mutex_);
    for (const ReferenceDistribution& ref : read_all_unlocked()) {
      if (ref.key() == key) return ref;
    }
    throw Error(ErrorCode::CacheMiss, describe(key));
  }

  std::optional<ReferenceDistribution> find(const ReferenceKey& key) const {
    try {
      return load(key);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::CacheMiss) return std::nullopt;
      throw;
    }
  }

  std::vector<ReferenceDistribution> entries() const {
    std::shared_lock lock(mutex_);
    return read_all_unlocked();
  }

  void store(const ReferenceDistribution& ref) {
    if (!ref.calibrated) {
      throw Error(ErrorCode::UncalibratedReference, "only calibrated references are cached");
    }
    std::unique_lock lock(mutex_);
    std::vector<ReferenceDistribution> all = read_all_unlocked();
    std::erase_if(all, [&](const ReferenceDistribution& r) { return r.key() == ref.key(); });
    all.push_back(ref);
    write_all_unlocked(all);
  }

  static std::string describe(const ReferenceKey& key) {
    return std::string(operator_name(key.op)) + "/n=" + std::to_string(key.entries_per_vector) +
           "/len=" + std::to_string(key.observed_len_bucket);
  }

 private:
  std::vector<ReferenceDistribution> read_all_unlocked() const {
    std::vector<ReferenceDistribution> out;
    if (!std::filesystem::exists(path_)) return out;
    std::ifstream in(path_, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + path_.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(buffer.str());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::CorruptCache, path_.string() + ": " + e.what());
    }
    if (!doc.is_object() || doc.value("version", 0) != kCacheVersion ||
        !doc.contains("entries") || !doc["entries"].is_array()) {
      throw Error(ErrorCode::CorruptCache, path_.string() + ": unexpected document layout");
    }
    for (const auto& entry : doc["entries"]) out.push_back(from_cache_entry(entry));
    return out;
  }

  void write_all_unlocked(std::vector<ReferenceDistribution> all) const {
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
      return std::tuple(static_cast<int>(a.op), a.entries_per_vector, a.observed_len_bucket) <
             std::tuple(static_cast<int>(b.op), b.entries_per_vector, b.observed_len_bucket);
    });
    nlohmann::json doc;
    doc["version"] = kCacheVersion;
    doc["entries"] = nlohmann::json::array();
    for (const auto& ref : all) doc["entries"].push_back(to_cache_entry(ref));

    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::filesystem::path tmp = path_;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
      out << doc.dump(2) << '\n';
      if (!out) throw Error(ErrorCode::Io, "short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path_);
  }

  std::filesystem::path path_;
  mutable std::shared_mutex mutex_;
};

}  // namespace digit_forensics
