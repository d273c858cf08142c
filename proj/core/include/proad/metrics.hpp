#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "proad/image.hpp"

namespace proad {

// Rank-based (Mann-Whitney U) AUROC with midranks for ties. Needs both
// classes present.
double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels);

// Step-interpolated area under the precision-recall curve: sum over
// distinct thresholds of (R_k - R_{k-1}) * P_k. Needs >= 1 positive.
double average_precision(std::span<const double> scores, std::span<const std::uint8_t> labels);

// Maximum F1 over all distinct-score thresholds. Needs >= 1 positive.
double f1_max(std::span<const double> scores, std::span<const std::uint8_t> labels);

// Connected components (8-connectivity) of a mask. Background is -1,
// regions are numbered from 0 in raster order of their first pixel.
std::vector<int> label_regions(const Mask& mask, int* num_regions = nullptr);

// Area under the per-region-overlap curve against the false-positive rate,
// integrated from 0 to fpr_limit (trapezoids, linear interpolation at the
// limit) and divided by fpr_limit.
double aupro(const std::vector<std::vector<double>>& maps, const std::vector<Mask>& masks, double fpr_limit = 0.3);

}  // namespace proad
