#include "flare/image.hpp"

#include "flare/error.hpp"

#include <string>

namespace flare {

namespace {

void check_shape(int width, int height, int channels) {
  if (width < 1 || height < 1)
    throw Error(ErrorKind::DimensionError,
                "image dimensions must be positive, got " + std::to_string(width) + "x" +
                    std::to_string(height));
  if (channels != 1 && channels != 3)
    throw Error(ErrorKind::ChannelError,
                "unsupported channel count " + std::to_string(channels));
}

}  // namespace

ImageBuffer::ImageBuffer(int width, int height, int channels, std::uint8_t fill)
    : width_(width), height_(height), channels_(channels) {
  check_shape(width, height, channels);
  pixels_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

ImageBuffer::ImageBuffer(int width, int height, int channels, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), channels_(channels), pixels_(std::move(pixels)) {
  check_shape(width, height, channels);
  if (pixels_.size() != static_cast<std::size_t>(width) * height * channels)
    throw Error(ErrorKind::DimensionError,
                "pixel buffer holds " + std::to_string(pixels_.size()) + " bytes, expected " +
                    std::to_string(static_cast<std::size_t>(width) * height * channels));
}

ImageBuffer::ConstPlane ImageBuffer::plane(int c) const {
  return ConstPlane(pixels_.data() + c, height_, width_,
                    PlaneStride(static_cast<Eigen::Index>(width_) * channels_, channels_));
}

ImageBuffer::Plane ImageBuffer::plane(int c) {
  return Plane(pixels_.data() + c, height_, width_,
               PlaneStride(static_cast<Eigen::Index>(width_) * channels_, channels_));
}

ImageBuffer to_rgb(const ImageBuffer& image) {
  if (image.channels() == 3) return image;
  ImageBuffer out(image.width(), image.height(), 3);
  for (int c = 0; c < 3; ++c) out.plane(c) = image.plane(0);
  return out;
}

}  // namespace flare
