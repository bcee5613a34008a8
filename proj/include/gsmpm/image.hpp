#pragma once

#include "gsmpm/render.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace gsmpm {

// PNG encode, RGBA8, sRGB-tagged, straight alpha. Fixed encoder settings so
// identical pixels give identical bytes.
std::vector<std::uint8_t> encode_png_rgba8(const ImageRgba8& image);

void write_png_rgba8(const std::filesystem::path& path, const ImageRgba8& image);

}  // namespace gsmpm
