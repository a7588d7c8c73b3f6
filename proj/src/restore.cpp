#include "flare/restore.hpp"

#include "flare/error.hpp"
#include "flare/parallel.hpp"

#include <algorithm>
#include <mutex>
#include <set>

namespace flare {

std::string_view to_string(RestoreMethod method) {
  switch (method) {
    case RestoreMethod::Nearest: return "nearest";
    case RestoreMethod::Bilinear: return "bilinear";
    case RestoreMethod::Bicubic: return "bicubic";
    case RestoreMethod::Lanczos3: return "lanczos3";
    case RestoreMethod::Remote: return "remote";
  }
  return "?";
}

RestoreMethod parse_restore_method(std::string_view text) {
  for (auto m : {RestoreMethod::Nearest, RestoreMethod::Bilinear, RestoreMethod::Bicubic,
                 RestoreMethod::Lanczos3, RestoreMethod::Remote})
    if (to_string(m) == text) return m;
  throw Error(ErrorKind::ConfigError, "restore.method: unknown method '" + std::string(text) + "'");
}

void RestoreConfig::validate() const {
  if (scale != 2 && scale != 3 && scale != 4 && scale != 8)
    throw Error(ErrorKind::ConfigError,
                "restore.scale: must be one of 2, 3, 4, 8 (got " + std::to_string(scale) + ")");
  if ((method == RestoreMethod::Remote) == remote_endpoint.empty())
    throw Error(ErrorKind::ConfigError,
                "restore.remote_endpoint: required if and only if method is remote");
  if (timeout_seconds <= 0.0) throw Error(ErrorKind::ConfigError, "restore.timeout: must be > 0");
  if (retries < 0) throw Error(ErrorKind::ConfigError, "restore.retries: must be >= 0");
  if (max_in_flight < 1) throw Error(ErrorKind::ConfigError, "restore.max_in_flight: must be >= 1");
}

nlohmann::json RestoreConfig::to_json() const {
  return {{"scale", scale},
          {"method", to_string(method)},
          {"remote_endpoint", remote_endpoint},
          {"timeout", timeout_seconds},
          {"retries", retries},
          {"max_in_flight", max_in_flight}};
}

RestoreConfig RestoreConfig::from_json(const nlohmann::json& j) {
  RestoreConfig c;
  c.scale = j.value("scale", c.scale);
  if (j.contains("method")) c.method = parse_restore_method(j.at("method").get<std::string>());
  c.remote_endpoint = j.value("remote_endpoint", c.remote_endpoint);
  c.timeout_seconds = j.value("timeout", c.timeout_seconds);
  c.retries = j.value("retries", c.retries);
  c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
  return c;
}

ImageBuffer upscale_remote(SuperResolutionService& client, const ImageBuffer& image, int factor) {
  ImageBuffer out = client.upscale(image, factor);
  if (out.width() != image.width() * factor || out.height() != image.height() * factor)
    throw Error(ErrorKind::ProtocolViolation,
                "SR service returned " + std::to_string(out.width()) + "x" +
                    std::to_string(out.height()) + " for a x" + std::to_string(factor) + " request");
  return out;
}

std::unique_ptr<SuperResolutionService> make_sr_service(const RestoreConfig& config) {
  switch (config.method) {
    case RestoreMethod::Nearest: return std::make_unique<NativeSuperResolution>(Kernel::Nearest);
    case RestoreMethod::Bilinear: return std::make_unique<NativeSuperResolution>(Kernel::Bilinear);
    case RestoreMethod::Bicubic: return std::make_unique<NativeSuperResolution>(Kernel::Bicubic);
    case RestoreMethod::Lanczos3: return std::make_unique<NativeSuperResolution>(Kernel::Lanczos3);
    case RestoreMethod::Remote:
      return std::make_unique<HttpSuperResolution>(
          HttpOptions{config.remote_endpoint, config.timeout_seconds, config.retries});
  }
  throw Error(ErrorKind::ConfigError, "unsupported restore method");
}

StageTag restored_stage(StageTag input) {
  switch (input) {
    case StageTag::Raw_LR: return StageTag::Raw_HR;
    case StageTag::Raw_Aug_LR: return StageTag::Raw_Aug_HR;
    case StageTag::T2I: return StageTag::T2I;
    case StageTag::I2I: return StageTag::T2I_Aug_HR;
    default:
      throw Error(ErrorKind::StageError,
                  "cannot restore a " + std::string(to_string(input)) + " manifest");
  }
}

DatasetManifest restore_dataset(const DatasetManifest& manifest, const RestoreConfig& config,
                                const ContentStore& store, const RestoreOptions& options) {
  config.validate();
  const StageTag output_stage = restored_stage(manifest.stage);

  std::unique_ptr<SuperResolutionService> owned;
  SuperResolutionService* service = options.service;
  if (!service) {
    owned = make_sr_service(config);
    service = owned.get();
  }
  const int workers = config.method == RestoreMethod::Remote
                          ? std::min(options.workers, config.max_in_flight)
                          : options.workers;

  const auto& in = manifest.records;
  std::vector<SampleRecord> out(in.size());
  FailureLog failures(in.size());
  const std::string method(to_string(config.method));

  parallel_for(in.size(), workers, [&](std::size_t i) {
    failures.capture(i, [&] {
      const ImageBuffer hr = upscale_remote(*service, store.load(in[i]), config.scale);
      const auto stored = store.put(hr);
      SampleRecord r;
      r.id = stored.id;
      r.fine_label = in[i].fine_label;
      r.tier = Tier::HR;
      r.provenance = provenance::Restored{method, config.scale, in[i].id};
      r.image_path = stored.relative_path;
      r.variant = in[i].variant;
      out[i] = std::move(r);
    });
  });
  failures.raise_if_failed([&](std::size_t i) { return in[i].id.str(); });

  std::set<SampleId> seen;
  std::set<SampleId> repeated;
  for (const auto& r : out)
    if (!seen.insert(r.id).second) repeated.insert(r.id);
  for (auto& r : out) r.collision = repeated.contains(r.id);

  DatasetManifest result;
  result.stage = output_stage;
  result.records = std::move(out);
  result.config_snapshot = manifest.config_snapshot;
  result.config_snapshot["restore"] = config.to_json();
  result.created_at = manifest_timestamp();
  result.normalize();
  return result;
}

}  // namespace flare
