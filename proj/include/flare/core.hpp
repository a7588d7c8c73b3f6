#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>

namespace flare {

/// Lowercase hex SHA-256 of a stored image's bytes.
class SampleId {
 public:
  SampleId() = default;
  explicit SampleId(std::string hex);  // throws InvalidInput unless 64 lowercase hex chars

  const std::string& str() const noexcept { return hex_; }
  std::string shard() const { return hex_.substr(0, 2); }
  bool empty() const noexcept { return hex_.empty(); }

  friend auto operator<=>(const SampleId&, const SampleId&) = default;

 private:
  std::string hex_;
};

SampleId content_hash(std::span<const std::uint8_t> bytes);

/// Raw SHA-256 digest; `bytes` may be empty.
std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> bytes);

/// One step of the splitmix64 generator: advances `state` and returns the mixed output.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Stream of splitmix64 outputs with uniform-real helpers.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept { return splitmix64(state_); }

  // 53-bit mantissa draw in [0, 1).
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  // Multiply-shift bounded draw: high 64 bits of next() * bound.
  std::uint64_t below(std::uint64_t bound) noexcept {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * bound) >> 64);
  }

 private:
  std::uint64_t state_;
};

/// splitmix64(global_seed ^ BE64(sha256(key || stage || BE32(variant))[0..8])).
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view key, std::string_view stage,
                          std::uint32_t variant_index);

enum class Tier { LR, HR };

enum class StageTag { Raw_LR, Raw_Aug_LR, Raw_HR, Raw_Aug_HR, T2I, I2I, T2I_Aug_HR, Combined };

std::string_view to_string(Tier tier);
std::string_view to_string(StageTag tag);
Tier parse_tier(std::string_view text);
StageTag parse_stage_tag(std::string_view text);

namespace provenance {

struct RawIngested {
  std::string source_path;
  friend bool operator==(const RawIngested&, const RawIngested&) = default;
};

struct Restored {
  std::string method;
  int scale = 0;
  SampleId parent_id;
  friend bool operator==(const Restored&, const Restored&) = default;
};

struct Augmented {
  std::string kind;
  std::uint64_t seed = 0;
  SampleId parent_id;
  friend bool operator==(const Augmented&, const Augmented&) = default;
};

struct SyntheticT2I {
  std::string prompt;
  std::uint64_t seed = 0;
  friend bool operator==(const SyntheticT2I&, const SyntheticT2I&) = default;
};

struct SyntheticI2I {
  std::uint64_t variation_seed = 0;
  SampleId parent_id;
  friend bool operator==(const SyntheticI2I&, const SyntheticI2I&) = default;
};

}  // namespace provenance

using Provenance = std::variant<provenance::RawIngested, provenance::Restored,
                                provenance::Augmented, provenance::SyntheticT2I,
                                provenance::SyntheticI2I>;

/// Parent id, or an empty id for chain roots.
SampleId parent_of(const Provenance& p);
std::string_view provenance_type(const Provenance& p);

struct SampleRecord {
  SampleId id;
  std::string fine_label;
  Tier tier = Tier::LR;
  Provenance provenance;
  std::string image_path;
  // 0 for the original/base copy, i for the i-th augmentation kind or variation seed.
  std::uint32_t variant = 0;
  // Set when an augmented image is byte-identical to another record in the manifest.
  bool collision = false;

  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

/// Manifest ordering: id, then variant, then parent id.
bool record_less(const SampleRecord& a, const SampleRecord& b);

}  // namespace flare
