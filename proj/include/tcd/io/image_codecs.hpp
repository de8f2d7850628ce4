// Image file I/O: binary PGM (P5, 8/16-bit), PNG (8-bit gray and RGB), and
// dispatch by extension including the tensor container. Intensities are
// normalized to [0, 1] on load and clamped/quantized on save.
#pragma once

#include <filesystem>

#include "tcd/types.hpp"

namespace tcd {

Image read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Image& img, int bits = 8);

Image read_png(const std::filesystem::path& path);  // 1 or 3 channels
void write_png_gray(const std::filesystem::path& path, const Image& img);
void write_png_rgb(const std::filesystem::path& path, const Image& img);

// Reads .tcd, .pgm or .png by extension.
Image read_image_any(const std::filesystem::path& path);

}  // namespace tcd
