#pragma once

#include "flare/codec.hpp"
#include "flare/core.hpp"
#include "flare/image.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace flare {

/// Content-addressed image store: `<root>/<first-2-hex>/<id>.png`.
class ContentStore {
 public:
  explicit ContentStore(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }

  struct Stored {
    SampleId id;
    std::string relative_path;
  };

  /// Encodes as PNG, hashes, and writes unless the object already exists.
  Stored put(const ImageBuffer& image) const;
  Stored put_encoded(std::span<const std::uint8_t> png_bytes) const;

  ImageBuffer load(const SampleRecord& record) const;
  std::filesystem::path path_of(const SampleRecord& record) const { return root_ / record.image_path; }
  std::filesystem::path path_of(const SampleId& id) const;
  bool contains(const SampleId& id) const;

  static std::string relative_path(const SampleId& id);

 private:
  std::filesystem::path root_;
};

struct DatasetManifest {
  StageTag stage = StageTag::Raw_LR;
  std::vector<SampleRecord> records;
  nlohmann::json config_snapshot = nlohmann::json::object();
  std::string created_at;

  /// Sorts records into manifest order.
  void normalize();
  bool is_normalized() const;
};

nlohmann::json to_json(const SampleRecord& record);
SampleRecord record_from_json(const nlohmann::json& j);

/// JSON-lines text: a header object followed by one record per line, LF-terminated.
std::string serialize_manifest(const DatasetManifest& manifest);
DatasetManifest parse_manifest(std::string_view text);

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest read_manifest(const std::filesystem::path& path);

/// UTC timestamp used for manifest headers: SOURCE_DATE_EPOCH when set, otherwise the epoch.
std::string manifest_timestamp();
std::string format_utc(std::int64_t seconds_since_epoch);

struct Violation {
  enum class Kind { HashMismatch, MissingFile, DanglingParent, UnknownLabel, Ordering, Unflagged };
  Kind kind;
  std::string record_id;
  std::string detail;
};

std::string_view to_string(Violation::Kind kind);

struct ValidationReport {
  std::size_t records_checked = 0;
  std::vector<Violation> violations;
  bool valid() const noexcept { return violations.empty(); }
};

class ClassTaxonomy;

/// Checks every record against the store. Parents resolve if present in the manifest or the
/// store. Labels are checked against `taxonomy` when given, otherwise against the snapshot's.
ValidationReport validate_manifest(const DatasetManifest& manifest,
                                   const std::filesystem::path& store_root,
                                   const ClassTaxonomy* taxonomy = nullptr);

}  // namespace flare
