#pragma once

#include "flare/codec.hpp"
#include "flare/core.hpp"
#include "flare/image.hpp"
#include "flare/manifest.hpp"

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

namespace testing_support {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string pattern = (fs::temp_directory_path() / "flare_test_XXXXXX").string();
    path_ = ::mkdtemp(pattern.data());
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline flare::ImageBuffer random_image(flare::SplitMix64& rng, int w, int h, int channels) {
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * channels);
  for (auto& v : px) v = static_cast<std::uint8_t>(rng.next() >> 56);
  return flare::ImageBuffer(w, h, channels, std::move(px));
}

/// Correlated pair: a = min(255, (x + y) / 2 + U{0..31}), b = clamp(a + U{-32..31}).
inline std::pair<flare::ImageBuffer, flare::ImageBuffer> ssim_pair(std::uint64_t seed, int size,
                                                                   int channels) {
  flare::SplitMix64 rng(seed);
  flare::ImageBuffer a(size, size, channels), b(size, size, channels);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x)
      for (int c = 0; c < channels; ++c) {
        const int av = std::min<int>(255, (x + y) / 2 + static_cast<int>(rng.next() >> 59));
        const int bv = std::clamp<int>(av + static_cast<int>(rng.next() >> 58) - 32, 0, 255);
        a.at(x, y, c) = static_cast<std::uint8_t>(av);
        b.at(x, y, c) = static_cast<std::uint8_t>(bv);
      }
  return {a, b};
}

inline flare::SampleId fake_id(const std::string& key) {
  return flare::content_hash(std::span(reinterpret_cast<const std::uint8_t*>(key.data()), key.size()));
}

inline void write_png(const fs::path& path, const flare::ImageBuffer& image) {
  flare::write_file(path, flare::encode_png(image));
}

/// Stores `image` and returns a raw record for it.
inline flare::SampleRecord store_raw(const flare::ContentStore& store, const flare::ImageBuffer& image,
                                     const std::string& label, flare::Tier tier = flare::Tier::LR) {
  const auto stored = store.put(image);
  flare::SampleRecord r;
  r.id = stored.id;
  r.fine_label = label;
  r.tier = tier;
  r.provenance = flare::provenance::RawIngested{label + "/" + stored.id.str() + ".png"};
  r.image_path = stored.relative_path;
  return r;
}

}  // namespace testing_support
