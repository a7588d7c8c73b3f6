#include "flare/taxonomy.hpp"

#include "flare/error.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace flare {

ClassTaxonomy::ClassTaxonomy(std::vector<std::string> fine, std::vector<std::string> macro,
                             std::map<std::string, std::string> mapping)
    : fine_(std::move(fine)), macro_(std::move(macro)), mapping_(std::move(mapping)) {
  if (fine_.empty()) throw Error(ErrorKind::TaxonomyError, "taxonomy has no fine classes");
  const std::set<std::string> fine_set(fine_.begin(), fine_.end());
  const std::set<std::string> macro_set(macro_.begin(), macro_.end());
  if (fine_set.size() != fine_.size())
    throw Error(ErrorKind::TaxonomyError, "duplicate fine class names");
  if (macro_set.size() != macro_.size())
    throw Error(ErrorKind::TaxonomyError, "duplicate macro class names");
  for (const auto& f : fine_) {
    if (f.empty()) throw Error(ErrorKind::TaxonomyError, "empty fine class name");
    const auto it = mapping_.find(f);
    if (it == mapping_.end())
      throw Error(ErrorKind::TaxonomyError, "fine class '" + f + "' has no macro class");
    if (!macro_set.contains(it->second))
      throw Error(ErrorKind::TaxonomyError,
                  "fine class '" + f + "' maps to unknown macro class '" + it->second + "'");
  }
  for (const auto& [f, m] : mapping_)
    if (!fine_set.contains(f))
      throw Error(ErrorKind::TaxonomyError, "mapping names unknown fine class '" + f + "'");
}

ClassTaxonomy ClassTaxonomy::default_taxonomy() {
  return ClassTaxonomy(
      {"planet", "galaxy", "asteroid", "nebula", "comet", "black hole", "star", "constellation"},
      {"Astronomical Patterns", "Celestial Bodies", "Cosmic Phenomena", "Stellar Objects"},
      {{"planet", "Celestial Bodies"},
       {"asteroid", "Celestial Bodies"},
       {"comet", "Celestial Bodies"},
       {"star", "Stellar Objects"},
       {"galaxy", "Stellar Objects"},
       {"black hole", "Cosmic Phenomena"},
       {"nebula", "Cosmic Phenomena"},
       {"constellation", "Astronomical Patterns"}});
}

ClassTaxonomy ClassTaxonomy::from_json(const nlohmann::json& j) {
  try {
    return ClassTaxonomy(j.at("fine_classes").get<std::vector<std::string>>(),
                         j.at("macro_classes").get<std::vector<std::string>>(),
                         j.at("mapping").get<std::map<std::string, std::string>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::TaxonomyError, std::string("malformed taxonomy: ") + e.what());
  }
}

ClassTaxonomy ClassTaxonomy::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open taxonomy file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::TaxonomyError, path.string() + ": " + e.what());
  }
  return from_json(j);
}

std::size_t ClassTaxonomy::index_of(const std::string& fine) const {
  const auto it = std::find(fine_.begin(), fine_.end(), fine);
  if (it == fine_.end()) throw Error(ErrorKind::UnknownClass, "unknown fine class '" + fine + "'");
  return static_cast<std::size_t>(it - fine_.begin());
}

const std::string& ClassTaxonomy::macro_of(const std::string& fine) const {
  const auto it = mapping_.find(fine);
  if (it == mapping_.end())
    throw Error(ErrorKind::UnknownClass, "unknown fine class '" + fine + "'");
  return it->second;
}

nlohmann::json ClassTaxonomy::to_json() const {
  return {{"fine_classes", fine_}, {"macro_classes", macro_}, {"mapping", mapping_}};
}

}  // namespace flare
