#pragma once

#include "flare/manifest.hpp"
#include "flare/restore.hpp"
#include "flare/services.hpp"
#include "flare/taxonomy.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>

namespace flare {

/// Prompt text with exactly one `{CLS}` placeholder.
class PromptTemplate {
 public:
  static constexpr std::string_view kPlaceholder = "{CLS}";
  static constexpr std::string_view kDefault = "A realistic image of {CLS} in space";

  explicit PromptTemplate(std::string text = std::string(kDefault));

  const std::string& text() const noexcept { return text_; }
  std::string render(const std::string& fine_class) const;

  friend bool operator==(const PromptTemplate&, const PromptTemplate&) = default;

 private:
  std::string text_;
};

std::string build_prompt(const std::string& fine_class, const PromptTemplate& prompt_template);

struct SynthConfig {
  int per_class_count = 1;
  int variations_k = 5;  // total copies per base: the base plus k - 1 variations
  int output_size = 256;
  std::string endpoint = "mock";
  std::uint64_t global_seed = 0;
  PromptTemplate prompt;
  double timeout_seconds = 60.0;
  int retries = 2;
  int max_in_flight = 4;

  void validate() const;
  nlohmann::json to_json() const;
  static SynthConfig from_json(const nlohmann::json& j, std::uint64_t global_seed);
};

/// Generates one size x size image and checks its shape.
ImageBuffer t2i_generate(DiffusionService& client, const std::string& prompt, std::uint64_t seed,
                         int size);
ImageBuffer i2i_variation(DiffusionService& client, const ImageBuffer& base,
                          std::uint64_t variation_seed, int size);

/// Seed namespace for the j-th base of a class: "<class>/<j>".
std::string synth_key(const std::string& fine_class, int index);

struct SynthResult {
  DatasetManifest t2i;  // n = |classes| * per_class_count bases
  DatasetManifest i2i;  // bases plus k - 1 variations each: n * k
  DatasetManifest hr;   // i2i after the restoration pass (stage T2I_Aug_HR)
};

struct SynthOptions {
  int workers = 1;
  DiffusionService* diffusion = nullptr;  // overrides config.endpoint
  SuperResolutionService* sr = nullptr;   // overrides the restore method
};

SynthResult synth_dataset(const ClassTaxonomy& taxonomy, const SynthConfig& config,
                          const RestoreConfig& restore_config, const ContentStore& store,
                          const SynthOptions& options = {});

}  // namespace flare
