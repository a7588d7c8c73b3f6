#include "flare/resample.hpp"

#include "flare/error.hpp"

#include <string>

namespace flare {

std::string_view to_string(Kernel kernel) {
  switch (kernel) {
    case Kernel::Nearest: return "nearest";
    case Kernel::Bilinear: return "bilinear";
    case Kernel::Bicubic: return "bicubic";
    case Kernel::Lanczos3: return "lanczos3";
  }
  return "?";
}

Kernel parse_kernel(std::string_view text) {
  for (Kernel k : {Kernel::Nearest, Kernel::Bilinear, Kernel::Bicubic, Kernel::Lanczos3})
    if (to_string(k) == text) return k;
  throw Error(ErrorKind::ConfigError, "unknown resampling kernel '" + std::string(text) + "'");
}

ImageBuffer upscale_native(const ImageBuffer& image, int factor, Kernel kernel) {
  if (factor < 2) throw Error(ErrorKind::InvalidInput, "upscale factor must be >= 2");
  const auto wy = upscale_weights<double>(image.height(), factor, kernel);
  const auto wx = upscale_weights<double>(image.width(), factor, kernel);
  ImageBuffer out(image.width() * factor, image.height() * factor, image.channels());
  for (int c = 0; c < image.channels(); ++c) {
    const PlaneMatrix<double> up = wy * plane_as<double>(image, c) * wx.transpose();
    store_plane(up, out, c);
  }
  return out;
}

ImageBuffer degrade(const ImageBuffer& image, int factor) {
  if (factor < 1) throw Error(ErrorKind::InvalidInput, "degrade factor must be >= 1");
  if (image.width() % factor != 0 || image.height() % factor != 0)
    throw Error(ErrorKind::DimensionError,
                std::to_string(image.width()) + "x" + std::to_string(image.height()) +
                    " is not divisible by " + std::to_string(factor));
  const int w = image.width() / factor;
  const int h = image.height() / factor;
  const double area = static_cast<double>(factor) * factor;
  ImageBuffer out(w, h, image.channels());
  for (int c = 0; c < image.channels(); ++c) {
    const auto src = image.plane(c);
    auto dst = out.plane(c);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const auto block = src.block(y * factor, x * factor, factor, factor).cast<std::int64_t>();
        dst(y, x) = to_byte(static_cast<double>(block.sum()) / area);
      }
  }
  return out;
}

}  // namespace flare
