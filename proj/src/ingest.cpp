#include "flare/ingest.hpp"

#include "flare/error.hpp"
#include "flare/parallel.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>

namespace flare {

std::string_view to_string(DedupMode mode) {
  switch (mode) {
    case DedupMode::Exact: return "exact";
    case DedupMode::Perceptual: return "perceptual";
    case DedupMode::Both: return "both";
  }
  return "?";
}

DedupMode parse_dedup_mode(std::string_view text) {
  for (auto m : {DedupMode::Exact, DedupMode::Perceptual, DedupMode::Both})
    if (to_string(m) == text) return m;
  throw Error(ErrorKind::ConfigError, "ingest.dedup_mode: unknown mode '" + std::string(text) + "'");
}

void IngestPolicy::validate() const {
  if (min_side < 1) throw Error(ErrorKind::ConfigError, "ingest.min_side: must be >= 1");
  if (dhash_threshold < 0 || dhash_threshold > 64)
    throw Error(ErrorKind::ConfigError, "ingest.dhash_threshold: must be in [0, 64]");
  if (allowed_channels.empty())
    throw Error(ErrorKind::ConfigError, "ingest.allowed_channels: must not be empty");
  for (int c : allowed_channels)
    if (c != 1 && c != 3)
      throw Error(ErrorKind::ConfigError, "ingest.allowed_channels: only 1 and 3 are supported");
}

nlohmann::json IngestPolicy::to_json() const {
  return {{"min_side", min_side},
          {"allowed_channels", allowed_channels},
          {"dedup_mode", to_string(dedup_mode)},
          {"dhash_threshold", dhash_threshold}};
}

IngestPolicy IngestPolicy::from_json(const nlohmann::json& j) {
  IngestPolicy p;
  p.min_side = j.value("min_side", p.min_side);
  if (j.contains("allowed_channels")) p.allowed_channels = j.at("allowed_channels").get<std::set<int>>();
  if (j.contains("dedup_mode")) p.dedup_mode = parse_dedup_mode(j.at("dedup_mode").get<std::string>());
  p.dhash_threshold = j.value("dhash_threshold", p.dhash_threshold);
  return p;
}

namespace {

bool has_image_extension(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

}  // namespace

ScanResult scan_directory(const std::filesystem::path& root, const ClassTaxonomy& taxonomy,
                          bool strict) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(root, ec))
    throw Error(ErrorKind::LayoutError, root.string() + " is not a directory");

  ScanResult result;
  for (const auto& cls : taxonomy.fine_classes()) {
    const fs::path dir = root / cls;
    if (!fs::is_directory(dir, ec)) {
      if (strict) throw Error(ErrorKind::LayoutError, "missing class directory " + dir.string());
      continue;
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir, ec))
      if (entry.is_regular_file()) files.push_back(entry.path());
    if (ec) throw Error(ErrorKind::IoError, "cannot list " + dir.string() + ": " + ec.message());
    std::sort(files.begin(), files.end());
    for (auto& f : files) {
      bool ok = has_image_extension(f);
      if (ok) {
        const auto bytes = read_file(f);
        ok = looks_like_image(bytes);
      }
      if (ok)
        result.entries.push_back({std::move(f), cls});
      else
        ++result.skipped;
    }
  }
  std::sort(result.entries.begin(), result.entries.end(),
            [](const ScanEntry& a, const ScanEntry& b) { return a.path < b.path; });
  if (result.entries.empty())
    throw Error(ErrorKind::EmptyDataset, "no images found under " + root.string());
  return result;
}

std::uint64_t dhash(const ImageBuffer& image) {
  // Differences below this are resampling round-off, not image content.
  constexpr double kTie = 1e-9;
  const auto small = box_resize<double>(luma<double>(image), 8, 9);
  std::uint64_t hash = 0;
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c) hash = (hash << 1) | (small(r, c + 1) - small(r, c) > kTie ? 1u : 0u);
  return hash;
}

namespace {

struct Candidate {
  std::size_t entry = 0;
  std::vector<std::uint8_t> png;
  SampleId id;
  std::uint64_t hash = 0;
};

}  // namespace

IngestResult ingest(const std::filesystem::path& root, const ClassTaxonomy& taxonomy,
                    const IngestPolicy& policy, const ContentStore& store,
                    const IngestOptions& options) {
  policy.validate();
  const auto scan = scan_directory(root, taxonomy, options.strict_layout);

  IngestResult result;
  auto& report = result.report;
  report.files_scanned = scan.entries.size() + scan.skipped;
  report.non_image_skipped = scan.skipped;

  enum class Outcome { Kept, Undecodable, Dropped };
  std::vector<Outcome> outcomes(scan.entries.size(), Outcome::Kept);
  std::vector<Candidate> decoded(scan.entries.size());

  parallel_for(scan.entries.size(), options.workers, [&](std::size_t i) {
    ImageBuffer image;
    try {
      image = decode_image(read_file(scan.entries[i].path));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::IoError) throw;
      outcomes[i] = Outcome::Undecodable;
      return;
    }
    if (std::min(image.width(), image.height()) < policy.min_side ||
        !policy.allowed_channels.contains(image.channels())) {
      outcomes[i] = Outcome::Dropped;
      return;
    }
    Candidate& c = decoded[i];
    c.entry = i;
    c.png = encode_png(image);
    c.id = content_hash(c.png);
    c.hash = dhash(image);
  });

  // Exact duplicates: one candidate per id, preferring the earliest class then the smallest path.
  std::map<SampleId, Candidate*> by_id;
  for (std::size_t i = 0; i < decoded.size(); ++i) {
    if (outcomes[i] == Outcome::Undecodable) {
      ++report.undecodable;
      continue;
    }
    if (outcomes[i] == Outcome::Dropped) {
      ++report.dropped_by_policy;
      continue;
    }
    Candidate* c = &decoded[i];
    auto [it, inserted] = by_id.emplace(c->id, c);
    if (inserted) continue;
    const auto& held = scan.entries[it->second->entry];
    const auto& incoming = scan.entries[c->entry];
    if (held.fine_label == incoming.fine_label) {
      ++report.exact_duplicates;
    } else {
      report.label_conflicts.push_back(c->id.str() + ": '" + held.fine_label + "' vs '" +
                                       incoming.fine_label + "'");
      if (taxonomy.index_of(incoming.fine_label) < taxonomy.index_of(held.fine_label))
        it->second = c;
    }
  }

  // Perceptual near-duplicates within a class: walk ids ascending, keep the first of each cluster.
  std::vector<const Candidate*> survivors;
  std::map<std::string, std::vector<const Candidate*>> kept_by_class;
  for (const auto& [id, c] : by_id) {
    auto& kept = kept_by_class[scan.entries[c->entry].fine_label];
    if (policy.dedup_mode != DedupMode::Exact &&
        std::any_of(kept.begin(), kept.end(), [&](const Candidate* k) {
          return hamming(k->hash, c->hash) <= policy.dhash_threshold;
        })) {
      ++report.near_duplicates;
      continue;
    }
    kept.push_back(c);
    survivors.push_back(c);
  }

  auto& manifest = result.manifest;
  manifest.stage = StageTag::Raw_LR;
  manifest.records.resize(survivors.size());
  parallel_for(survivors.size(), options.workers, [&](std::size_t i) {
    const Candidate& c = *survivors[i];
    const auto& entry = scan.entries[c.entry];
    const auto stored = store.put_encoded(c.png);
    SampleRecord r;
    r.id = stored.id;
    r.fine_label = entry.fine_label;
    r.tier = Tier::LR;
    r.provenance = provenance::RawIngested{entry.path.lexically_relative(root).generic_string()};
    r.image_path = stored.relative_path;
    manifest.records[i] = std::move(r);
  });
  manifest.config_snapshot = {{"taxonomy", taxonomy.to_json()}, {"ingest", policy.to_json()}};
  manifest.created_at = manifest_timestamp();
  manifest.normalize();
  return result;
}

}  // namespace flare
