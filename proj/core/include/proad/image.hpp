#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace proad {

// Interleaved float image, values nominally in [0, 1].
struct Image {
  int height = 0;
  int width = 0;
  int channels = 3;
  std::vector<double> pixels;  // row-major, channel-interleaved

  Image() = default;
  Image(int h, int w, int c, double fill = 0.0)
      : height(h), width(w), channels(c), pixels(static_cast<std::size_t>(h) * w * c, fill) {}

  double& at(int y, int x, int c) { return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
  double at(int y, int x, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

// Binary per-pixel mask, 1 = anomalous.
struct Mask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> values;

  Mask() = default;
  Mask(int h, int w) : height(h), width(w), values(static_cast<std::size_t>(h) * w, 0) {}
  std::uint8_t& at(int y, int x) { return values[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
  std::size_t count() const;
};

// Bilinear resampling with half-pixel centers and edge clamping.
Image resize_bilinear(const Image& src, int height, int width);
// Nearest-neighbour resampling on the same pixel-center grid.
Image resize_nearest(const Image& src, int height, int width);
Image center_crop(const Image& src, int height, int width);

// Rounds every value to the nearest multiple of 1/255 after clamping to [0, 1].
void quantize_8bit(Image& image);

}  // namespace proad
