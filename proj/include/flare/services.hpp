#pragma once

#include "flare/image.hpp"
#include "flare/resample.hpp"
#include "flare/taxonomy.hpp"

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>

namespace flare {

/// Super-resolution backend (the LR -> HR map).
class SuperResolutionService {
 public:
  virtual ~SuperResolutionService() = default;
  virtual ImageBuffer upscale(const ImageBuffer& image, int factor) = 0;
};

/// Text-to-image and image-to-image generation backend.
class DiffusionService {
 public:
  virtual ~DiffusionService() = default;
  virtual ImageBuffer t2i(const std::string& prompt, std::uint64_t seed, int width, int height) = 0;
  virtual ImageBuffer i2i(const ImageBuffer& base, std::uint64_t seed, int width, int height) = 0;
};

struct HttpOptions {
  std::string endpoint;  // http://host:port[/prefix]
  double timeout_seconds = 60.0;
  int retries = 2;
};

/// POST {endpoint}/v1/upscale?scale=N with a PNG body; expects PNG of exactly scaled dims.
class HttpSuperResolution final : public SuperResolutionService {
 public:
  explicit HttpSuperResolution(HttpOptions options);
  ImageBuffer upscale(const ImageBuffer& image, int factor) override;
  int attempts() const noexcept { return attempts_; }

 private:
  HttpOptions options_;
  std::atomic<int> attempts_{0};
};

/// POST {endpoint}/v1/t2i and /v1/i2i with JSON bodies; expects PNG responses.
class HttpDiffusion final : public DiffusionService {
 public:
  explicit HttpDiffusion(HttpOptions options);
  ImageBuffer t2i(const std::string& prompt, std::uint64_t seed, int width, int height) override;
  ImageBuffer i2i(const ImageBuffer& base, std::uint64_t seed, int width, int height) override;

 private:
  HttpOptions options_;
};

/// Offline SR stand-in backed by a native kernel.
class NativeSuperResolution final : public SuperResolutionService {
 public:
  explicit NativeSuperResolution(Kernel kernel) : kernel_(kernel) {}
  ImageBuffer upscale(const ImageBuffer& image, int factor) override {
    return upscale_native(image, factor, kernel_);
  }

 private:
  Kernel kernel_;
};

inline constexpr double kMockSaturation = 0.6;
inline constexpr double kMockValue = 180.0;
inline constexpr double kMockT2INoise = 32.0;
inline constexpr double kMockI2INoise = 16.0;
inline constexpr double kMockI2IHueJitter = 5.0;
inline constexpr int kMockNoiseCell = 8;

/// Smooth lattice value noise in [-1, 1], cell size kMockNoiseCell.
PlaneMatrix<double> value_noise(int width, int height, std::uint64_t seed);

/// Deterministic diffusion stand-in. A prompt equal to the rendered template for fine class i
/// gets base hue i * 360 / |classes|; other prompts hash to a hue.
class MockDiffusion final : public DiffusionService {
 public:
  MockDiffusion(ClassTaxonomy taxonomy, std::string prompt_template);
  ImageBuffer t2i(const std::string& prompt, std::uint64_t seed, int width, int height) override;
  ImageBuffer i2i(const ImageBuffer& base, std::uint64_t seed, int width, int height) override;

  double hue_for(const std::string& prompt) const;

 private:
  ClassTaxonomy taxonomy_;
  std::string template_;
};

std::unique_ptr<DiffusionService> make_diffusion_service(const std::string& endpoint,
                                                         const ClassTaxonomy& taxonomy,
                                                         const std::string& prompt_template,
                                                         double timeout_seconds, int retries);

/// Local HTTP server speaking both wire protocols, backed by bicubic SR and MockDiffusion.
class MockServiceServer {
 public:
  struct Faults {
    int scale_override = 0;      // respond as if this scale had been requested
    bool garbage_body = false;   // respond 200 with a non-image body
    int status_override = 0;     // respond with this HTTP status
  };

  MockServiceServer(ClassTaxonomy taxonomy, std::string prompt_template, Faults faults);
  MockServiceServer(ClassTaxonomy taxonomy, std::string prompt_template);
  ~MockServiceServer();
  MockServiceServer(const MockServiceServer&) = delete;
  MockServiceServer& operator=(const MockServiceServer&) = delete;

  /// Binds to 127.0.0.1 on `port` (0 picks a free port) and serves on a background thread.
  void start(int port = 0);
  void stop();
  int port() const noexcept;
  std::string endpoint() const;
  /// Blocks serving on the calling thread.
  void listen(const std::string& host, int port);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace flare
