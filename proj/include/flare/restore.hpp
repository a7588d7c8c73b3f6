#pragma once

#include "flare/manifest.hpp"
#include "flare/resample.hpp"
#include "flare/services.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace flare {

enum class RestoreMethod { Nearest, Bilinear, Bicubic, Lanczos3, Remote };

std::string_view to_string(RestoreMethod method);
RestoreMethod parse_restore_method(std::string_view text);

struct RestoreConfig {
  int scale = 4;
  RestoreMethod method = RestoreMethod::Lanczos3;
  std::string remote_endpoint;  // required iff method == Remote
  double timeout_seconds = 60.0;
  int retries = 2;
  int max_in_flight = 4;

  void validate() const;  // throws ConfigError
  nlohmann::json to_json() const;
  static RestoreConfig from_json(const nlohmann::json& j);
};

/// Upscales via a service and checks the returned dimensions.
ImageBuffer upscale_remote(SuperResolutionService& client, const ImageBuffer& image, int factor);

/// Native kernel for the configured method, or an HTTP client for Remote.
std::unique_ptr<SuperResolutionService> make_sr_service(const RestoreConfig& config);

struct RestoreOptions {
  int workers = 1;
  // Optional override of the SR backend (tests, mock servers).
  SuperResolutionService* service = nullptr;
};

/// Raw_LR -> Raw_HR, Raw_Aug_LR -> Raw_Aug_HR, T2I -> T2I, I2I -> T2I_Aug_HR.
StageTag restored_stage(StageTag input);

/// Maps every record of `manifest` to an HR record (labels and variants preserved).
DatasetManifest restore_dataset(const DatasetManifest& manifest, const RestoreConfig& config,
                                const ContentStore& store, const RestoreOptions& options = {});

}  // namespace flare
