#pragma once

#include <span>
#include <string>
#include <vector>

#include "proad/decoder.hpp"
#include "proad/encoder.hpp"
#include "proad/model.hpp"

namespace proad {

struct AnomalyMap {
  std::string sample_id;
  int grid_height = 0;
  int grid_width = 0;
  std::vector<double> grid;    // mean over layer pairs of the cosine distance, per patch
  int height = 0;
  int width = 0;
  std::vector<double> raw;     // grid bilinearly upsampled to the image size
  std::vector<double> scores;  // raw after Gaussian smoothing
  double image_score = 0.0;    // max of scores
};

// Smoothing width at a given resolution: 4 px at 392 px, scaled linearly.
double smoothing_sigma(int image_size);

// Separable Gaussian blur, kernel truncated at 4 sigma, mirrored borders.
std::vector<double> gaussian_smooth(std::span<const double> values, int height, int width, double sigma);

AnomalyMap anomaly_map(const DecoderTrace& trace, const FeatureStack& features, const Pairing& pairing,
                       int image_size, int patch_size, double sigma);

}  // namespace proad
