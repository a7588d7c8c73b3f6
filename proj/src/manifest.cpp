#include "flare/manifest.hpp"

#include "flare/error.hpp"
#include "flare/taxonomy.hpp"

#include <algorithm>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

namespace flare {

ContentStore::ContentStore(std::filesystem::path root) : root_(std::move(root)) {}

std::string ContentStore::relative_path(const SampleId& id) {
  return id.shard() + "/" + id.str() + ".png";
}

std::filesystem::path ContentStore::path_of(const SampleId& id) const {
  return root_ / relative_path(id);
}

bool ContentStore::contains(const SampleId& id) const {
  std::error_code ec;
  return std::filesystem::is_regular_file(path_of(id), ec);
}

ContentStore::Stored ContentStore::put(const ImageBuffer& image) const {
  return put_encoded(encode_png(image));
}

ContentStore::Stored ContentStore::put_encoded(std::span<const std::uint8_t> png_bytes) const {
  Stored stored{content_hash(png_bytes), {}};
  stored.relative_path = relative_path(stored.id);
  if (!contains(stored.id)) write_file(root_ / stored.relative_path, png_bytes);
  return stored;
}

ImageBuffer ContentStore::load(const SampleRecord& record) const {
  const auto path = path_of(record);
  const auto bytes = read_file(path);
  try {
    return decode_image(bytes);
  } catch (const Error& e) {
    throw Error(ErrorKind::IoError, path.string() + ": " + e.what());
  }
}

void DatasetManifest::normalize() { std::sort(records.begin(), records.end(), record_less); }

bool DatasetManifest::is_normalized() const {
  return std::adjacent_find(records.begin(), records.end(), [](const auto& a, const auto& b) {
           return !record_less(a, b);
         }) == records.end();
}

namespace {

nlohmann::json provenance_json(const Provenance& p) {
  using namespace provenance;
  nlohmann::json j = {{"type", provenance_type(p)}};
  std::visit(
      [&j](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, RawIngested>) {
          j["source_path"] = v.source_path;
        } else if constexpr (std::is_same_v<T, Restored>) {
          j["method"] = v.method;
          j["scale"] = v.scale;
          j["parent_id"] = v.parent_id.str();
        } else if constexpr (std::is_same_v<T, Augmented>) {
          j["kind"] = v.kind;
          j["seed"] = v.seed;
          j["parent_id"] = v.parent_id.str();
        } else if constexpr (std::is_same_v<T, SyntheticT2I>) {
          j["prompt"] = v.prompt;
          j["seed"] = v.seed;
        } else {
          j["variation_seed"] = v.variation_seed;
          j["parent_id"] = v.parent_id.str();
        }
      },
      p);
  return j;
}

Provenance provenance_from_json(const nlohmann::json& j) {
  using namespace provenance;
  const auto type = j.at("type").get<std::string>();
  if (type == "RawIngested") return RawIngested{j.at("source_path").get<std::string>()};
  if (type == "Restored")
    return Restored{j.at("method").get<std::string>(), j.at("scale").get<int>(),
                    SampleId(j.at("parent_id").get<std::string>())};
  if (type == "Augmented")
    return Augmented{j.at("kind").get<std::string>(), j.at("seed").get<std::uint64_t>(),
                     SampleId(j.at("parent_id").get<std::string>())};
  if (type == "SyntheticT2I")
    return SyntheticT2I{j.at("prompt").get<std::string>(), j.at("seed").get<std::uint64_t>()};
  if (type == "SyntheticI2I")
    return SyntheticI2I{j.at("variation_seed").get<std::uint64_t>(),
                        SampleId(j.at("parent_id").get<std::string>())};
  throw Error(ErrorKind::InvalidInput, "unknown provenance type '" + type + "'");
}

}  // namespace

nlohmann::json to_json(const SampleRecord& r) {
  return {{"id", r.id.str()},
          {"fine_label", r.fine_label},
          {"tier", to_string(r.tier)},
          {"provenance", provenance_json(r.provenance)},
          {"image_path", r.image_path},
          {"variant", r.variant},
          {"collision", r.collision}};
}

SampleRecord record_from_json(const nlohmann::json& j) {
  SampleRecord r;
  r.id = SampleId(j.at("id").get<std::string>());
  r.fine_label = j.at("fine_label").get<std::string>();
  r.tier = parse_tier(j.at("tier").get<std::string>());
  r.provenance = provenance_from_json(j.at("provenance"));
  r.image_path = j.at("image_path").get<std::string>();
  r.variant = j.value("variant", std::uint32_t{0});
  r.collision = j.value("collision", false);
  return r;
}

std::string serialize_manifest(const DatasetManifest& manifest) {
  const nlohmann::json header = {{"stage_tag", to_string(manifest.stage)},
                                 {"config_snapshot", manifest.config_snapshot},
                                 {"created_at", manifest.created_at},
                                 {"record_count", manifest.records.size()}};
  std::string out = header.dump();
  out.push_back('\n');
  for (const auto& r : manifest.records) {
    out += to_json(r).dump();
    out.push_back('\n');
  }
  return out;
}

DatasetManifest parse_manifest(std::string_view text) {
  DatasetManifest m;
  std::size_t line_no = 0;
  std::size_t expected = 0;
  bool have_header = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (!have_header) {
        m.stage = parse_stage_tag(j.at("stage_tag").get<std::string>());
        m.config_snapshot = j.at("config_snapshot");
        m.created_at = j.at("created_at").get<std::string>();
        expected = j.at("record_count").get<std::size_t>();
        have_header = true;
      } else {
        m.records.push_back(record_from_json(j));
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::InvalidInput,
                  "manifest line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) throw Error(ErrorKind::InvalidInput, "manifest has no header line");
  if (m.records.size() != expected)
    throw Error(ErrorKind::InvalidInput, "manifest header declares " + std::to_string(expected) +
                                             " records, found " + std::to_string(m.records.size()));
  return m;
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  const auto text = serialize_manifest(manifest);
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return parse_manifest(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string format_utc(std::int64_t seconds) {
  const std::time_t t = static_cast<std::time_t>(seconds);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string manifest_timestamp() {
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env && *env) {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (end && *end == '\0') return format_utc(v);
  }
  return format_utc(0);
}

std::string_view to_string(Violation::Kind kind) {
  switch (kind) {
    case Violation::Kind::HashMismatch: return "hash-mismatch";
    case Violation::Kind::MissingFile: return "missing-file";
    case Violation::Kind::DanglingParent: return "dangling-parent";
    case Violation::Kind::UnknownLabel: return "unknown-label";
    case Violation::Kind::Ordering: return "ordering";
    case Violation::Kind::Unflagged: return "unflagged-duplicate";
  }
  return "?";
}

ValidationReport validate_manifest(const DatasetManifest& manifest,
                                   const std::filesystem::path& store_root,
                                   const ClassTaxonomy* taxonomy) {
  std::error_code ec;
  if (!std::filesystem::is_directory(store_root, ec))
    throw Error(ErrorKind::IoError, "store root " + store_root.string() + " is not a directory");

  std::optional<ClassTaxonomy> snapshot_taxonomy;
  if (!taxonomy) {
    if (manifest.config_snapshot.contains("taxonomy"))
      snapshot_taxonomy = ClassTaxonomy::from_json(manifest.config_snapshot.at("taxonomy"));
    else
      snapshot_taxonomy = ClassTaxonomy::default_taxonomy();
    taxonomy = &*snapshot_taxonomy;
  }

  const ContentStore store(store_root);
  ValidationReport report;
  std::set<SampleId> ids;
  for (const auto& r : manifest.records) ids.insert(r.id);

  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const auto& r = manifest.records[i];
    ++report.records_checked;
    auto add = [&](Violation::Kind kind, std::string detail) {
      report.violations.push_back({kind, r.id.str(), std::move(detail)});
    };

    if (i > 0 && !record_less(manifest.records[i - 1], r))
      add(Violation::Kind::Ordering, "record out of order or duplicated");
    if (i > 0 && manifest.records[i - 1].id == r.id && !r.collision &&
        !manifest.records[i - 1].collision)
      add(Violation::Kind::Unflagged, "repeated id without a collision flag");

    const auto path = store.path_of(r);
    if (!std::filesystem::is_regular_file(path, ec)) {
      add(Violation::Kind::MissingFile, path.string());
    } else {
      const auto bytes = read_file(path);
      if (bytes.empty() || content_hash(bytes) != r.id)
        add(Violation::Kind::HashMismatch, path.string());
    }

    if (const auto parent = parent_of(r.provenance);
        !parent.empty() && !ids.contains(parent) && !store.contains(parent))
      add(Violation::Kind::DanglingParent, "parent " + parent.str() + " not found");

    if (!taxonomy->contains(r.fine_label))
      add(Violation::Kind::UnknownLabel, "label '" + r.fine_label + "'");
  }
  return report;
}

}  // namespace flare
