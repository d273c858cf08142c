#pragma once

#include <filesystem>

#include "proad/image.hpp"

namespace proad {

// Reads an 8/16-bit PNG of any color type. Gray images are expanded to the
// requested channel count; alpha is dropped. Throws DataError on failure.
Image read_png(const std::filesystem::path& path, int channels = 3);

// Writes 8-bit gray (1 channel) or RGB (3 channels). Values clamped to [0, 1].
void write_png(const std::filesystem::path& path, const Image& image);
void write_mask_png(const std::filesystem::path& path, const Mask& mask);

}  // namespace proad
