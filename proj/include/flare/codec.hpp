#pragma once

#include "flare/image.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace flare {

/// Deterministic 8-bit PNG encoding (fixed zlib level, no ancillary chunks).
std::vector<std::uint8_t> encode_png(const ImageBuffer& image);

/// Decodes PNG or JPEG bytes; alpha is dropped, palettes and 16-bit samples are expanded
/// to 8-bit gray or RGB.
ImageBuffer decode_image(std::span<const std::uint8_t> bytes);

bool looks_like_image(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace flare
