#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace flare {

/// Fine-grained classes with their umbrella (macro) grouping.
class ClassTaxonomy {
 public:
  ClassTaxonomy(std::vector<std::string> fine, std::vector<std::string> macro,
                std::map<std::string, std::string> mapping);

  /// planet..constellation grouped into the four umbrella classes.
  static ClassTaxonomy default_taxonomy();
  static ClassTaxonomy from_json(const nlohmann::json& j);
  static ClassTaxonomy load(const std::filesystem::path& path);

  const std::vector<std::string>& fine_classes() const noexcept { return fine_; }
  const std::vector<std::string>& macro_classes() const noexcept { return macro_; }

  bool contains(const std::string& fine) const { return mapping_.contains(fine); }
  std::size_t index_of(const std::string& fine) const;  // throws UnknownClass
  const std::string& macro_of(const std::string& fine) const;

  nlohmann::json to_json() const;

  friend bool operator==(const ClassTaxonomy&, const ClassTaxonomy&) = default;

 private:
  std::vector<std::string> fine_;
  std::vector<std::string> macro_;
  std::map<std::string, std::string> mapping_;
};

inline const std::string& macro_of(const std::string& fine, const ClassTaxonomy& taxonomy) {
  return taxonomy.macro_of(fine);
}

}  // namespace flare
