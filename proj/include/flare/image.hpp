#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace flare {

/// 8-bit raster, row-major with interleaved channels (1 = gray, 3 = RGB).
class ImageBuffer {
 public:
  using ByteMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using PlaneStride = Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>;
  using ConstPlane = Eigen::Map<const ByteMatrix, Eigen::Unaligned, PlaneStride>;
  using Plane = Eigen::Map<ByteMatrix, Eigen::Unaligned, PlaneStride>;

  ImageBuffer() = default;
  ImageBuffer(int width, int height, int channels, std::uint8_t fill = 0);
  ImageBuffer(int width, int height, int channels, std::vector<std::uint8_t> pixels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  bool empty() const noexcept { return pixels_.empty(); }

  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
  std::span<std::uint8_t> pixels() noexcept { return pixels_; }

  std::uint8_t at(int x, int y, int c) const { return pixels_[index(x, y, c)]; }
  std::uint8_t& at(int x, int y, int c) { return pixels_[index(x, y, c)]; }

  // Strided view of a single channel as a height x width matrix.
  ConstPlane plane(int c) const;
  Plane plane(int c);

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Round half away from zero, then clamp to the byte range.
inline std::uint8_t to_byte(double v) {
  const double r = std::round(v);
  if (!(r > 0.0)) return 0;
  if (r > 255.0) return 255;
  return static_cast<std::uint8_t>(r);
}

template <typename Scalar>
using PlaneMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
PlaneMatrix<Scalar> plane_as(const ImageBuffer& image, int c) {
  return image.plane(c).template cast<Scalar>();
}

/// Writes a real-valued plane into channel `c`, rounding and clamping.
template <typename Derived>
void store_plane(const Eigen::MatrixBase<Derived>& values, ImageBuffer& image, int c) {
  auto out = image.plane(c);
  for (Eigen::Index y = 0; y < values.rows(); ++y)
    for (Eigen::Index x = 0; x < values.cols(); ++x)
      out(y, x) = to_byte(static_cast<double>(values(y, x)));
}

inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

/// BT.601 luma plane; single-channel images are returned as-is.
template <typename Scalar>
PlaneMatrix<Scalar> luma(const ImageBuffer& image) {
  if (image.channels() == 1) return plane_as<Scalar>(image, 0);
  return Scalar(kLumaR) * plane_as<Scalar>(image, 0) + Scalar(kLumaG) * plane_as<Scalar>(image, 1) +
         Scalar(kLumaB) * plane_as<Scalar>(image, 2);
}

/// Area-weighted box resampling of one plane to out_rows x out_cols.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> box_weights(Eigen::Index in_size,
                                                                  Eigen::Index out_size) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> w =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(out_size, in_size);
  const Scalar step = Scalar(in_size) / Scalar(out_size);
  for (Eigen::Index o = 0; o < out_size; ++o) {
    const Scalar lo = step * Scalar(o);
    const Scalar hi = step * Scalar(o + 1);
    for (Eigen::Index i = static_cast<Eigen::Index>(std::floor(lo)); i < in_size && Scalar(i) < hi;
         ++i) {
      const Scalar cover = std::min(hi, Scalar(i + 1)) - std::max(lo, Scalar(i));
      if (cover > Scalar(0)) w(o, i) = cover / step;
    }
  }
  return w;
}

template <typename Scalar>
PlaneMatrix<Scalar> box_resize(const PlaneMatrix<Scalar>& plane, Eigen::Index out_rows,
                               Eigen::Index out_cols) {
  const auto wy = box_weights<Scalar>(plane.rows(), out_rows);
  const auto wx = box_weights<Scalar>(plane.cols(), out_cols);
  return wy * plane * wx.transpose();
}

/// Gray images are replicated into three channels; RGB passes through.
ImageBuffer to_rgb(const ImageBuffer& image);

}  // namespace flare
