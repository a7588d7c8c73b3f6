#pragma once

#include "flare/augment.hpp"
#include "flare/ingest.hpp"
#include "flare/mix.hpp"
#include "flare/restore.hpp"
#include "flare/synth.hpp"
#include "flare/taxonomy.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>

namespace flare {

/// Effective pipeline configuration. JSON schema (every section optional except global_seed):
///
///   {
///     "global_seed": 42,
///     "taxonomy": "taxonomy.json" | { "fine_classes": [...], "macro_classes": [...], "mapping": {...} },
///     "store": "store",
///     "workers": 4,
///     "ingest":  { "min_side", "allowed_channels", "dedup_mode", "dhash_threshold", "strict_layout" },
///     "restore": { "scale", "method", "remote_endpoint", "timeout", "retries", "max_in_flight" },
///     "augment": { "kinds": [ {"type": "HorizontalFlip"}, ... ] },
///     "synth":   { "per_class_count", "variations_k", "output_size", "endpoint", "prompt_template",
///                  "timeout", "retries", "max_in_flight" },
///     "mix":     { "alpha", "beta", "count_rule", "kind_priority" }
///   }
///
/// Relative paths resolve against the config file's directory.
struct PipelineConfig {
  std::optional<std::uint64_t> global_seed;
  ClassTaxonomy taxonomy = ClassTaxonomy::default_taxonomy();
  std::filesystem::path store_root;
  int workers = 1;
  IngestPolicy ingest;
  bool strict_layout = true;
  RestoreConfig restore;
  nlohmann::json augment = nlohmann::json::object();
  SynthConfig synth;
  MixParams mix;

  /// Throws ConfigError naming the offending field.
  static PipelineConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  static nlohmann::json load_json(const std::filesystem::path& path);

  std::uint64_t seed() const;  // throws ConfigError when absent
  AugmentationPlan plan() const;

  /// Everything that determines stage output; excludes worker count and filesystem paths.
  nlohmann::json snapshot() const;
};

}  // namespace flare
