#pragma once

#include <algorithm>
#include <array>
#include <cmath>

namespace flare {

using Rgb = std::array<double, 3>;  // channel values on the 0..255 scale

struct Hsv {
  double h = 0.0;  // degrees in [0, 360)
  double s = 0.0;  // [0, 1]
  double v = 0.0;  // 0..255
};

inline Hsv rgb_to_hsv(const Rgb& rgb) {
  const auto [r, g, b] = rgb;
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double delta = mx - mn;
  Hsv out{0.0, mx > 0.0 ? delta / mx : 0.0, mx};
  if (delta > 0.0) {
    double h;
    if (mx == r)
      h = (g - b) / delta;
    else if (mx == g)
      h = 2.0 + (b - r) / delta;
    else
      h = 4.0 + (r - g) / delta;
    h *= 60.0;
    if (h < 0.0) h += 360.0;
    out.h = h;
  }
  return out;
}

inline Rgb hsv_to_rgb(const Hsv& hsv) {
  const double c = hsv.v * hsv.s;
  const double hp = hsv.h / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  const double m = hsv.v - c;
  Rgb rgb{};
  switch (static_cast<int>(std::floor(hp)) % 6) {
    case 0: rgb = {c, x, 0.0}; break;
    case 1: rgb = {x, c, 0.0}; break;
    case 2: rgb = {0.0, c, x}; break;
    case 3: rgb = {0.0, x, c}; break;
    case 4: rgb = {x, 0.0, c}; break;
    default: rgb = {c, 0.0, x}; break;
  }
  for (double& v : rgb) v += m;
  return rgb;
}

/// Rotates hue by `degrees`, wrapping into [0, 360).
inline Rgb rotate_hue(const Rgb& rgb, double degrees) {
  Hsv hsv = rgb_to_hsv(rgb);
  hsv.h = std::fmod(hsv.h + degrees, 360.0);
  if (hsv.h < 0.0) hsv.h += 360.0;
  return hsv_to_rgb(hsv);
}

}  // namespace flare
