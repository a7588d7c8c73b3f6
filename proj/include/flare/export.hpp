#pragma once

#include "flare/manifest.hpp"
#include "flare/taxonomy.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace flare {

struct SplitOptions {
  double train_frac = 0.8;  // in [0, 1]
  std::uint64_t seed = 0;
  bool macro = false;  // directories named by macro class instead of fine class
};

struct SplitEntry {
  std::string label;  // directory name (fine or macro class)
  SampleId id;
  std::size_t record = 0;  // index into the manifest
};

struct Split {
  std::vector<SplitEntry> train;
  std::vector<SplitEntry> test;
};

/// Per fine class: records in manifest order, shuffled with a seed derived from (seed, class);
/// the first round-half-up(train_frac * n) go to train.
Split stratified_split(const DatasetManifest& manifest, const ClassTaxonomy& taxonomy,
                       const SplitOptions& options);

struct ExportResult {
  Split split;
  std::vector<std::string> warnings;
};

/// Writes out_dir/{train,test}/<class>/<id>.png plus train.txt and test.txt (one
/// "<class>/<id>" per line).
ExportResult export_dataset(const DatasetManifest& manifest, const ContentStore& store,
                            const std::filesystem::path& out_dir, const SplitOptions& options);

}  // namespace flare
