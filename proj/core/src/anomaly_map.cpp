#include "proad/anomaly_map.hpp"

#include <algorithm>
#include <cmath>

#include "proad/error.hpp"
#include "proad/image.hpp"
#include "proad/loss.hpp"
#include "proad/ops.hpp"

namespace proad {

namespace {
int mirror(int i, int n) {
  while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - i - 1;
  return i;
}
}  // namespace

double smoothing_sigma(int image_size) { return 4.0 * image_size / 392.0; }

std::vector<double> gaussian_smooth(std::span<const double> values, int height, int width, double sigma) {
  std::vector<double> out(values.begin(), values.end());
  if (sigma <= 0.0) return out;
  const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  std::vector<double> kernel(2 * radius + 1);
  double total = 0.0;
  for (int k = -radius; k <= radius; ++k) total += kernel[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
  for (auto& k : kernel) k /= total;

  std::vector<double> tmp(out.size());
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * values[y * width + mirror(x + k, width)];
      tmp[y * width + x] = acc;
    }
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * tmp[mirror(y + k, height) * width + x];
      out[y * width + x] = acc;
    }
  return out;
}

AnomalyMap anomaly_map(const DecoderTrace& trace, const FeatureStack& features, const Pairing& pairing,
                       int image_size, int patch_size, double sigma) {
  if (pairing.empty()) throw ConfigError("anomaly map needs at least one layer pair");
  NoGradGuard no_grad;
  AnomalyMap map;
  map.grid_height = map.grid_width = image_size / patch_size;
  const std::size_t n = static_cast<std::size_t>(map.grid_height) * map.grid_width;
  map.grid.assign(n, 0.0);
  for (const auto& pair : pairing) {
    const Tensor d = distance_map(features.per_layer.at(pair.encoder), trace.layers.at(pair.decoder).f_d);
    if (d.numel() != n) throw DimensionError("anomaly map: distance map does not match the patch grid");
    for (std::size_t i = 0; i < n; ++i) map.grid[i] += d.at(i);
  }
  for (auto& v : map.grid) v /= static_cast<double>(pairing.size());

  Image grid(map.grid_height, map.grid_width, 1);
  grid.pixels = map.grid;
  map.height = map.width = image_size;
  map.raw = resize_bilinear(grid, image_size, image_size).pixels;
  map.scores = gaussian_smooth(map.raw, image_size, image_size, sigma);
  for (auto& v : map.scores) v = std::max(v, 0.0);
  map.image_score = *std::max_element(map.scores.begin(), map.scores.end());
  return map;
}

}  // namespace proad
