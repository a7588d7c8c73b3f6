#pragma once

#include "flare/image.hpp"
#include "flare/manifest.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace flare {

struct HorizontalFlip {
  friend bool operator==(const HorizontalFlip&, const HorizontalFlip&) = default;
};
struct VerticalFlip {
  friend bool operator==(const VerticalFlip&, const VerticalFlip&) = default;
};

/// Maximum deviations for brightness/contrast/saturation factors (each in [0, 1]) and hue shift
/// as a fraction of the full circle (in [0, 0.5]).
struct ColorJitter {
  double brightness = 0.0;
  double contrast = 0.0;
  double saturation = 0.0;
  double hue = 0.0;

  void validate() const;
  friend bool operator==(const ColorJitter&, const ColorJitter&) = default;
};

using AugmentationStep = std::variant<HorizontalFlip, VerticalFlip, ColorJitter>;

/// Sequential application of primitive steps; nesting is impossible by construction.
struct Compose {
  std::vector<AugmentationStep> steps;
  friend bool operator==(const Compose&, const Compose&) = default;
};

using AugmentationKind = std::variant<HorizontalFlip, VerticalFlip, ColorJitter, Compose>;

std::string name_of(const AugmentationKind& kind);
nlohmann::json to_json(const AugmentationKind& kind);
AugmentationKind augmentation_from_json(const nlohmann::json& j);
void validate(const AugmentationKind& kind);

/// k - 1 augmentation kinds in priority order plus the global seed; k = kinds + 1.
class AugmentationPlan {
 public:
  AugmentationPlan(std::vector<AugmentationKind> kinds, std::uint64_t global_seed);

  /// ColorJitter(0.4, 0.4, 0.4, 0.1), HorizontalFlip, VerticalFlip,
  /// Compose(HorizontalFlip, ColorJitter(0.4, 0.4, 0.4, 0.1)).
  static AugmentationPlan default_plan(std::uint64_t global_seed);
  static AugmentationPlan from_json(const nlohmann::json& j, std::uint64_t global_seed);

  const std::vector<AugmentationKind>& kinds() const noexcept { return kinds_; }
  std::uint64_t global_seed() const noexcept { return global_seed_; }
  int k() const noexcept { return static_cast<int>(kinds_.size()) + 1; }

  nlohmann::json to_json() const;

 private:
  std::vector<AugmentationKind> kinds_;
  std::uint64_t global_seed_;
};

ImageBuffer hflip(const ImageBuffer& image);
ImageBuffer vflip(const ImageBuffer& image);

/// Factors are drawn from SplitMix64(seed) in the order brightness, contrast, saturation, hue,
/// then applied in that order with clamping after each step and a single final rounding.
ImageBuffer color_jitter(const ImageBuffer& image, const ColorJitter& params, std::uint64_t seed);

/// Applies one kind; gray images are promoted to RGB before any jitter step.
ImageBuffer apply(const AugmentationKind& kind, const ImageBuffer& image, std::uint64_t seed);

struct AugmentReport {
  std::vector<std::string> collisions;  // ids produced more than once
};

struct AugmentResult {
  DatasetManifest manifest;
  AugmentReport report;
};

/// Raw_LR -> Raw_Aug_LR, Raw_HR -> Raw_Aug_HR.
StageTag augmented_stage(StageTag input);

/// Keeps every input record and adds one record per (record, kind) with variant index i and
/// seed derive_seed(global_seed, parent id, "aug", i).
AugmentResult augment_dataset(const DatasetManifest& manifest, const AugmentationPlan& plan,
                              const ContentStore& store, int workers = 1);

/// Manifest-only counterpart of augment_dataset: same records and seeds, but each augmented id
/// is sha256("<parent id>/<variant>") and no pixels are read or written.
AugmentResult plan_augment(const DatasetManifest& manifest, const AugmentationPlan& plan);

}  // namespace flare
