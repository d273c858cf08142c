#include "proad/image.hpp"

#include <algorithm>
#include <cmath>

#include "proad/error.hpp"

namespace proad {

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [](auto v) { return v != 0; }));
}

namespace {
double source_coord(int dst, int dst_size, int src_size) {
  return (dst + 0.5) * static_cast<double>(src_size) / dst_size - 0.5;
}
}  // namespace

Image resize_bilinear(const Image& src, int height, int width) {
  if (height <= 0 || width <= 0) throw DimensionError("resize to non-positive size");
  Image dst(height, width, src.channels);
  for (int y = 0; y < height; ++y) {
    const double sy = std::clamp(source_coord(y, height, src.height), 0.0, src.height - 1.0);
    const int y0 = static_cast<int>(std::floor(sy));
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double fy = sy - y0;
    for (int x = 0; x < width; ++x) {
      const double sx = std::clamp(source_coord(x, width, src.width), 0.0, src.width - 1.0);
      const int x0 = static_cast<int>(std::floor(sx));
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double fx = sx - x0;
      for (int c = 0; c < src.channels; ++c) {
        const double top = src.at(y0, x0, c) * (1.0 - fx) + src.at(y0, x1, c) * fx;
        const double bottom = src.at(y1, x0, c) * (1.0 - fx) + src.at(y1, x1, c) * fx;
        dst.at(y, x, c) = top * (1.0 - fy) + bottom * fy;
      }
    }
  }
  return dst;
}

Image resize_nearest(const Image& src, int height, int width) {
  if (height <= 0 || width <= 0) throw DimensionError("resize to non-positive size");
  Image dst(height, width, src.channels);
  for (int y = 0; y < height; ++y) {
    const int sy = std::clamp(static_cast<int>(std::floor((y + 0.5) * src.height / height)), 0, src.height - 1);
    for (int x = 0; x < width; ++x) {
      const int sx = std::clamp(static_cast<int>(std::floor((x + 0.5) * src.width / width)), 0, src.width - 1);
      for (int c = 0; c < src.channels; ++c) dst.at(y, x, c) = src.at(sy, sx, c);
    }
  }
  return dst;
}

Image center_crop(const Image& src, int height, int width) {
  if (height > src.height || width > src.width) {
    throw DimensionError("center crop " + std::to_string(height) + "x" + std::to_string(width) +
                         " larger than image " + std::to_string(src.height) + "x" + std::to_string(src.width));
  }
  const int top = (src.height - height) / 2;
  const int left = (src.width - width) / 2;
  Image dst(height, width, src.channels);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < src.channels; ++c) dst.at(y, x, c) = src.at(top + y, left + x, c);
  return dst;
}

void quantize_8bit(Image& image) {
  for (auto& v : image.pixels) v = std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
}

}  // namespace proad
