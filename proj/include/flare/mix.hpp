#pragma once

#include "flare/manifest.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace flare {

/// How much of an n * k augmented manifest survives a selection with weight w:
///  - OriginalPlusFloor: the base group plus floor(w * (k - 1)) whole augmentation groups;
///  - StrictEq7: round-half-up(n * w * k) records, filling whole groups base-first and taking
///    the remainder from the next group in id order.
enum class CountRule { OriginalPlusFloor, StrictEq7 };

std::string_view to_string(CountRule rule);
CountRule parse_count_rule(std::string_view text);

struct MixParams {
  double alpha = 0.5;
  double beta = 1.0;
  CountRule count_rule = CountRule::OriginalPlusFloor;
  // Augmentation kind names, highest priority first. Empty means variant-index order.
  std::vector<std::string> kind_priority;

  void validate() const;  // throws InvalidWeight
  nlohmann::json to_json() const;
  static MixParams from_json(const nlohmann::json& j);
};

/// Number of records kept from a manifest of n bases with k copies each.
std::size_t records_kept(double weight, int k, std::size_t n, CountRule rule);

/// Keeps the highest-priority copy-groups of an augmented manifest (Raw_Aug_HR or T2I_Aug_HR).
/// Every group must hold the same number of records.
DatasetManifest select(double weight, int k, const DatasetManifest& manifest,
                       CountRule rule = CountRule::OriginalPlusFloor,
                       const std::vector<std::string>& kind_priority = {});

struct CombineResult {
  DatasetManifest manifest;  // stage Combined
  std::vector<std::string> collisions;  // synth ids already present in the augmented input
};

/// Concatenates the two selections; records α, β, k and the rule in the snapshot.
CombineResult combine(const DatasetManifest& selected_aug, const DatasetManifest& selected_synth,
                      const MixParams& params, int k);

}  // namespace flare
