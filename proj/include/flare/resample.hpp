#pragma once

#include "flare/image.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string_view>

namespace flare {

enum class Kernel { Nearest, Bilinear, Bicubic, Lanczos3 };

std::string_view to_string(Kernel kernel);
Kernel parse_kernel(std::string_view text);

inline constexpr double kBicubicA = -0.5;
inline constexpr int kLanczosLobes = 3;

/// Half-width of the kernel's non-zero region in source pixels.
constexpr double kernel_support(Kernel kernel) {
  switch (kernel) {
    case Kernel::Nearest: return 0.5;
    case Kernel::Bilinear: return 1.0;
    case Kernel::Bicubic: return 2.0;
    case Kernel::Lanczos3: return kLanczosLobes;
  }
  return 0.0;
}

template <typename Scalar>
Scalar kernel_weight(Kernel kernel, Scalar x) {
  using std::abs;
  const Scalar ax = abs(x);
  switch (kernel) {
    case Kernel::Nearest:
      return ax < Scalar(0.5) ? Scalar(1) : Scalar(0);
    case Kernel::Bilinear:
      return ax < Scalar(1) ? Scalar(1) - ax : Scalar(0);
    case Kernel::Bicubic: {
      const Scalar a(kBicubicA);
      if (ax <= Scalar(1)) return ((a + 2) * ax - (a + 3)) * ax * ax + 1;
      if (ax < Scalar(2)) return ((a * ax - 5 * a) * ax + 8 * a) * ax - 4 * a;
      return Scalar(0);
    }
    case Kernel::Lanczos3: {
      if (ax == Scalar(0)) return Scalar(1);
      if (ax >= Scalar(kLanczosLobes)) return Scalar(0);
      const Scalar px = Scalar(std::numbers::pi) * x;
      return Scalar(kLanczosLobes) * std::sin(px) * std::sin(px / Scalar(kLanczosLobes)) / (px * px);
    }
  }
  return Scalar(0);
}

using WeightMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>;

/// (in_size * factor) x in_size interpolation matrix with pixel-center alignment,
/// edge-clamped taps and rows normalized to sum 1. Nearest maps dst to floor(dst / factor).
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> upscale_weights(Eigen::Index in_size,
                                                                      int factor, Kernel kernel) {
  const Eigen::Index out_size = in_size * factor;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> w =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(out_size, in_size);
  for (Eigen::Index o = 0; o < out_size; ++o) {
    if (kernel == Kernel::Nearest) {
      w(o, o / factor) = Scalar(1);
      continue;
    }
    const Scalar center = (Scalar(o) + Scalar(0.5)) / Scalar(factor) - Scalar(0.5);
    const Scalar support(kernel_support(kernel));
    const auto first = static_cast<Eigen::Index>(std::floor(center - support)) + 1;
    const auto last = static_cast<Eigen::Index>(std::floor(center + support));
    for (Eigen::Index i = first; i <= last; ++i) {
      const Eigen::Index src = std::clamp<Eigen::Index>(i, 0, in_size - 1);
      w(o, src) += kernel_weight(kernel, center - Scalar(i));
    }
    w.row(o) /= w.row(o).sum();
  }
  return w;
}

/// Separable upscaling by an integer factor; output is rounded half away from zero and clamped.
ImageBuffer upscale_native(const ImageBuffer& image, int factor, Kernel kernel);

/// Non-overlapping factor x factor box average per channel.
ImageBuffer degrade(const ImageBuffer& image, int factor);

}  // namespace flare
