#include "flare/services.hpp"

#include "flare/codec.hpp"
#include "flare/color.hpp"
#include "flare/core.hpp"
#include "flare/error.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <thread>

namespace flare {

namespace {

struct EndpointParts {
  std::string host;  // scheme://host:port
  std::string prefix;
};

EndpointParts split_endpoint(const std::string& endpoint) {
  const auto scheme = endpoint.find("://");
  if (scheme == std::string::npos)
    throw Error(ErrorKind::ConfigError, "endpoint '" + endpoint + "' lacks a scheme");
  const auto slash = endpoint.find('/', scheme + 3);
  EndpointParts parts{endpoint.substr(0, slash), slash == std::string::npos ? "" : endpoint.substr(slash)};
  while (!parts.prefix.empty() && parts.prefix.back() == '/') parts.prefix.pop_back();
  return parts;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  if (text.size() % 4 != 0) throw Error(ErrorKind::ProtocolViolation, "malformed base64 payload");
  std::vector<std::uint8_t> out(3 * text.size() / 4);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw Error(ErrorKind::ProtocolViolation, "malformed base64 payload");
  std::size_t pad = 0;
  for (auto it = text.rbegin(); it != text.rend() && *it == '='; ++it) ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

bool retryable(int status) { return status == 429 || status >= 500; }

/// Issues a POST with retries; returns the 200 response body.
std::string post_with_retries(const HttpOptions& options, const std::string& path,
                              const std::string& body, const std::string& content_type,
                              std::atomic<int>* attempts) {
  const auto parts = split_endpoint(options.endpoint);
  httplib::Client client(parts.host);
  const auto secs = static_cast<time_t>(options.timeout_seconds);
  const auto usecs = static_cast<time_t>((options.timeout_seconds - secs) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  std::string last_error;
  for (int attempt = 0; attempt <= options.retries; ++attempt) {
    if (attempts) ++*attempts;
    auto res = client.Post(parts.prefix + path, body, content_type);
    if (!res) {
      last_error = httplib::to_string(res.error());
    } else if (res->status == 200) {
      return res->body;
    } else if (retryable(res->status)) {
      last_error = "HTTP " + std::to_string(res->status);
    } else {
      throw Error(ErrorKind::ProtocolViolation,
                  options.endpoint + path + " answered HTTP " + std::to_string(res->status));
    }
    if (attempt < options.retries)
      std::this_thread::sleep_for(std::chrono::milliseconds(50 << attempt));
  }
  throw Error(ErrorKind::ServiceUnavailable, options.endpoint + path + " failed after " +
                                                 std::to_string(options.retries + 1) +
                                                 " attempts: " + last_error);
}

ImageBuffer decode_response(const std::string& body, int width, int height, const char* what) {
  const std::span bytes(reinterpret_cast<const std::uint8_t*>(body.data()), body.size());
  ImageBuffer image;
  try {
    image = decode_image(bytes);
  } catch (const Error&) {
    throw Error(ErrorKind::ProtocolViolation, std::string(what) + " response is not an image");
  }
  if (image.width() != width || image.height() != height)
    throw Error(ErrorKind::ProtocolViolation,
                std::string(what) + " returned " + std::to_string(image.width()) + "x" +
                    std::to_string(image.height()) + ", expected " + std::to_string(width) + "x" +
                    std::to_string(height));
  return image;
}

std::string png_string(const ImageBuffer& image) {
  const auto png = encode_png(image);
  return std::string(png.begin(), png.end());
}

std::uint64_t prefix64(std::span<const std::uint8_t> bytes) {
  const auto digest = sha256(bytes);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | digest[i];
  return v;
}

std::uint64_t prefix64(const std::string& text) {
  return prefix64(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

}  // namespace

HttpSuperResolution::HttpSuperResolution(HttpOptions options) : options_(std::move(options)) {
  split_endpoint(options_.endpoint);
}

ImageBuffer HttpSuperResolution::upscale(const ImageBuffer& image, int factor) {
  const auto body = post_with_retries(options_, "/v1/upscale?scale=" + std::to_string(factor),
                                      png_string(image), "image/png", &attempts_);
  return decode_response(body, image.width() * factor, image.height() * factor, "upscale");
}

HttpDiffusion::HttpDiffusion(HttpOptions options) : options_(std::move(options)) {
  split_endpoint(options_.endpoint);
}

ImageBuffer HttpDiffusion::t2i(const std::string& prompt, std::uint64_t seed, int width,
                               int height) {
  const nlohmann::json req = {{"prompt", prompt}, {"seed", seed}, {"width", width}, {"height", height}};
  const auto body = post_with_retries(options_, "/v1/t2i", req.dump(), "application/json", nullptr);
  return decode_response(body, width, height, "t2i");
}

ImageBuffer HttpDiffusion::i2i(const ImageBuffer& base, std::uint64_t seed, int width, int height) {
  const auto png = encode_png(base);
  const nlohmann::json req = {
      {"image_b64", base64_encode(png)}, {"seed", seed}, {"width", width}, {"height", height}};
  const auto body = post_with_retries(options_, "/v1/i2i", req.dump(), "application/json", nullptr);
  return decode_response(body, width, height, "i2i");
}

PlaneMatrix<double> value_noise(int width, int height, std::uint64_t seed) {
  const int gx = width / kMockNoiseCell + 2;
  const int gy = height / kMockNoiseCell + 2;
  SplitMix64 rng(seed);
  PlaneMatrix<double> lattice(gy, gx);
  for (int y = 0; y < gy; ++y)
    for (int x = 0; x < gx; ++x) lattice(y, x) = rng.uniform(-1.0, 1.0);

  PlaneMatrix<double> noise(height, width);
  for (int y = 0; y < height; ++y) {
    const int cy = y / kMockNoiseCell;
    const double ty = smoothstep(double(y % kMockNoiseCell) / kMockNoiseCell);
    for (int x = 0; x < width; ++x) {
      const int cx = x / kMockNoiseCell;
      const double tx = smoothstep(double(x % kMockNoiseCell) / kMockNoiseCell);
      const double top = lattice(cy, cx) + tx * (lattice(cy, cx + 1) - lattice(cy, cx));
      const double bot = lattice(cy + 1, cx) + tx * (lattice(cy + 1, cx + 1) - lattice(cy + 1, cx));
      noise(y, x) = top + ty * (bot - top);
    }
  }
  return noise;
}

MockDiffusion::MockDiffusion(ClassTaxonomy taxonomy, std::string prompt_template)
    : taxonomy_(std::move(taxonomy)), template_(std::move(prompt_template)) {}

double MockDiffusion::hue_for(const std::string& prompt) const {
  const auto& classes = taxonomy_.fine_classes();
  const auto placeholder = template_.find("{CLS}");
  for (std::size_t i = 0; i < classes.size(); ++i) {
    std::string rendered = template_;
    if (placeholder != std::string::npos) rendered.replace(placeholder, 5, classes[i]);
    if (rendered == prompt) return 360.0 * static_cast<double>(i) / static_cast<double>(classes.size());
  }
  return static_cast<double>(prefix64(prompt) % 360);
}

ImageBuffer MockDiffusion::t2i(const std::string& prompt, std::uint64_t seed, int width,
                               int height) {
  const Rgb base = hsv_to_rgb({hue_for(prompt), kMockSaturation, kMockValue});
  const auto noise = value_noise(width, height, seed ^ prefix64(prompt));
  ImageBuffer out(width, height, 3);
  for (int c = 0; c < 3; ++c)
    store_plane((base[c] + kMockT2INoise * noise.array()).matrix(), out, c);
  return out;
}

ImageBuffer MockDiffusion::i2i(const ImageBuffer& base_in, std::uint64_t seed, int width,
                               int height) {
  ImageBuffer base = to_rgb(base_in);
  if (base.width() != width || base.height() != height) {
    ImageBuffer resized(width, height, 3);
    for (int c = 0; c < 3; ++c)
      store_plane(box_resize<double>(plane_as<double>(base, c), height, width), resized, c);
    base = std::move(resized);
  }
  SplitMix64 rng(seed ^ prefix64(base.pixels()));
  const double hue_shift = rng.uniform(-kMockI2IHueJitter, kMockI2IHueJitter);
  const auto noise = value_noise(width, height, rng.next());

  ImageBuffer out(width, height, 3);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const Rgb rotated =
          rotate_hue({double(base.at(x, y, 0)), double(base.at(x, y, 1)), double(base.at(x, y, 2))},
                     hue_shift);
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = to_byte(rotated[c] + kMockI2INoise * noise(y, x));
    }
  return out;
}

std::unique_ptr<DiffusionService> make_diffusion_service(const std::string& endpoint,
                                                         const ClassTaxonomy& taxonomy,
                                                         const std::string& prompt_template,
                                                         double timeout_seconds, int retries) {
  if (endpoint == "mock") return std::make_unique<MockDiffusion>(taxonomy, prompt_template);
  return std::make_unique<HttpDiffusion>(HttpOptions{endpoint, timeout_seconds, retries});
}

struct MockServiceServer::Impl {
  Impl(ClassTaxonomy taxonomy, std::string prompt_template, Faults f)
      : diffusion(std::move(taxonomy), std::move(prompt_template)), faults(f) {
    server.Post("/v1/upscale", [this](const httplib::Request& req, httplib::Response& res) {
      if (fault(res)) return;
      int scale = req.has_param("scale") ? std::stoi(req.get_param_value("scale")) : 0;
      if (scale < 2) {
        res.status = 400;
        return;
      }
      if (faults.scale_override) scale = faults.scale_override;
      try {
        const auto image = decode_image(
            std::span(reinterpret_cast<const std::uint8_t*>(req.body.data()), req.body.size()));
        res.set_content(png_string(upscale_native(image, scale, Kernel::Bicubic)), "image/png");
      } catch (const Error&) {
        res.status = 400;
      }
    });
    server.Post("/v1/t2i", [this](const httplib::Request& req, httplib::Response& res) {
      if (fault(res)) return;
      try {
        const auto j = nlohmann::json::parse(req.body);
        res.set_content(png_string(diffusion.t2i(j.at("prompt").get<std::string>(),
                                                 j.at("seed").get<std::uint64_t>(),
                                                 j.at("width").get<int>(), j.at("height").get<int>())),
                        "image/png");
      } catch (const std::exception&) {
        res.status = 400;
      }
    });
    server.Post("/v1/i2i", [this](const httplib::Request& req, httplib::Response& res) {
      if (fault(res)) return;
      try {
        const auto j = nlohmann::json::parse(req.body);
        const auto png = base64_decode(j.at("image_b64").get<std::string>());
        res.set_content(png_string(diffusion.i2i(decode_image(png), j.at("seed").get<std::uint64_t>(),
                                                 j.at("width").get<int>(), j.at("height").get<int>())),
                        "image/png");
      } catch (const std::exception&) {
        res.status = 400;
      }
    });
  }

  bool fault(httplib::Response& res) const {
    if (faults.status_override) {
      res.status = faults.status_override;
      return true;
    }
    if (faults.garbage_body) {
      res.set_content("definitely not a png", "text/plain");
      return true;
    }
    return false;
  }

  MockDiffusion diffusion;
  Faults faults;
  httplib::Server server;
  std::thread thread;
  int port = 0;
};

MockServiceServer::MockServiceServer(ClassTaxonomy taxonomy, std::string prompt_template,
                                     Faults faults)
    : impl_(std::make_unique<Impl>(std::move(taxonomy), std::move(prompt_template), faults)) {}

MockServiceServer::MockServiceServer(ClassTaxonomy taxonomy, std::string prompt_template)
    : MockServiceServer(std::move(taxonomy), std::move(prompt_template), Faults{}) {}

MockServiceServer::~MockServiceServer() { stop(); }

void MockServiceServer::start(int port) {
  if (port == 0)
    impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
  else if (impl_->server.bind_to_port("127.0.0.1", port))
    impl_->port = port;
  else
    impl_->port = -1;
  if (impl_->port <= 0) throw Error(ErrorKind::IoError, "mock server could not bind");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void MockServiceServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

int MockServiceServer::port() const noexcept { return impl_->port; }

std::string MockServiceServer::endpoint() const {
  return "http://127.0.0.1:" + std::to_string(impl_->port);
}

void MockServiceServer::listen(const std::string& host, int port) {
  impl_->port = port;
  if (!impl_->server.listen(host, port))
    throw Error(ErrorKind::IoError, "mock server could not listen on " + host + ":" + std::to_string(port));
}

}  // namespace flare
