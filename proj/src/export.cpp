#include "flare/export.hpp"

#include "flare/codec.hpp"
#include "flare/core.hpp"
#include "flare/error.hpp"

#include <cmath>
#include <map>

namespace flare {

Split stratified_split(const DatasetManifest& manifest, const ClassTaxonomy& taxonomy,
                       const SplitOptions& options) {
  if (!(options.train_frac >= 0.0 && options.train_frac <= 1.0))
    throw Error(ErrorKind::InvalidInput, "train_frac must be in [0, 1]");
  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < manifest.records.size(); ++i)
    by_class[manifest.records[i].fine_label].push_back(i);

  Split split;
  for (auto& [fine, members] : by_class) {
    SplitMix64 rng(derive_seed(options.seed, fine, "split", 0));
    for (std::size_t i = members.size(); i > 1; --i)
      std::swap(members[i - 1], members[rng.below(i)]);
    const auto n_train = static_cast<std::size_t>(
        std::floor(options.train_frac * static_cast<double>(members.size()) + 0.5));
    const std::string label = options.macro ? taxonomy.macro_of(fine) : fine;
    for (std::size_t j = 0; j < members.size(); ++j) {
      SplitEntry e{label, manifest.records[members[j]].id, members[j]};
      (j < n_train ? split.train : split.test).push_back(std::move(e));
    }
  }
  return split;
}

ExportResult export_dataset(const DatasetManifest& manifest, const ContentStore& store,
                            const std::filesystem::path& out_dir, const SplitOptions& options) {
  const ClassTaxonomy taxonomy = manifest.config_snapshot.contains("taxonomy")
                                     ? ClassTaxonomy::from_json(manifest.config_snapshot.at("taxonomy"))
                                     : ClassTaxonomy::default_taxonomy();
  ExportResult result;
  result.split = stratified_split(manifest, taxonomy, options);
  if (result.split.test.empty())
    result.warnings.push_back("test split is empty (train_frac = " + std::to_string(options.train_frac) + ")");

  auto emit = [&](const std::vector<SplitEntry>& entries, const char* part) {
    std::string listing;
    std::filesystem::create_directories(out_dir / part);
    for (const auto& e : entries) {
      const auto bytes = read_file(store.path_of(manifest.records[e.record]));
      write_file(out_dir / part / e.label / (e.id.str() + ".png"), bytes);
      listing += e.label + "/" + e.id.str() + "\n";
    }
    write_file(out_dir / (std::string(part) + ".txt"),
               std::span(reinterpret_cast<const std::uint8_t*>(listing.data()), listing.size()));
  };
  emit(result.split.train, "train");
  emit(result.split.test, "test");
  return result;
}

}  // namespace flare
