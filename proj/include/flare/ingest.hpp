#pragma once

#include "flare/manifest.hpp"
#include "flare/taxonomy.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace flare {

enum class DedupMode { Exact, Perceptual, Both };

std::string_view to_string(DedupMode mode);
DedupMode parse_dedup_mode(std::string_view text);

struct IngestPolicy {
  int min_side = 64;
  std::set<int> allowed_channels{1, 3};
  DedupMode dedup_mode = DedupMode::Both;
  int dhash_threshold = 4;

  void validate() const;
  nlohmann::json to_json() const;
  static IngestPolicy from_json(const nlohmann::json& j);
};

struct ScanEntry {
  std::filesystem::path path;
  std::string fine_label;
};

struct ScanResult {
  std::vector<ScanEntry> entries;  // sorted by path
  std::size_t skipped = 0;         // non-image files
};

/// Lists image files in `root/<fine_class>/`. With `strict`, every taxonomy class must have a
/// directory (LayoutError otherwise); without it, missing classes are ignored.
ScanResult scan_directory(const std::filesystem::path& root, const ClassTaxonomy& taxonomy,
                          bool strict = true);

/// 64-bit difference hash over a 9x8 box-resized BT.601 luma image; bit (r, c) is set iff
/// pixel (r, c) < pixel (r, c + 1) by more than 1e-9, row-major, most significant bit first.
std::uint64_t dhash(const ImageBuffer& image);

inline int hamming(std::uint64_t a, std::uint64_t b) { return std::popcount(a ^ b); }

struct IngestReport {
  std::size_t files_scanned = 0;
  std::size_t non_image_skipped = 0;
  std::size_t undecodable = 0;
  std::size_t dropped_by_policy = 0;
  std::size_t exact_duplicates = 0;
  std::size_t near_duplicates = 0;
  // Identical images found under different classes; the first class in taxonomy order is kept.
  std::vector<std::string> label_conflicts;
};

struct IngestOptions {
  int workers = 1;
  bool strict_layout = true;
};

struct IngestResult {
  DatasetManifest manifest;
  IngestReport report;
};

/// Builds a Raw_LR manifest from a class-per-directory tree, copying survivors into the store.
IngestResult ingest(const std::filesystem::path& root, const ClassTaxonomy& taxonomy,
                    const IngestPolicy& policy, const ContentStore& store,
                    const IngestOptions& options = {});

}  // namespace flare
