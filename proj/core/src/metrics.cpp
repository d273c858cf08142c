#include "proad/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "proad/error.hpp"

namespace proad {

namespace {

void check_sizes(std::span<const double> scores, std::span<const std::uint8_t> labels, const char* metric) {
  if (scores.size() != labels.size()) {
    throw MetricError(std::string(metric) + ": " + std::to_string(scores.size()) + " scores for " +
                      std::to_string(labels.size()) + " labels");
  }
}

std::size_t count_positives(std::span<const std::uint8_t> labels) {
  return static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](auto l) { return l != 0; }));
}

// Indices sorted by descending score.
std::vector<std::size_t> descending(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
  return order;
}

// Calls visit(tp, fp) after every group of tied scores, highest first.
template <class Visit>
void sweep_thresholds(std::span<const double> scores, std::span<const std::uint8_t> labels, Visit visit) {
  const auto order = descending(scores);
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == s; ++i) (labels[order[i]] ? tp : fp)++;
    visit(tp, fp);
  }
}

}  // namespace

double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  check_sizes(scores, labels, "auroc");
  const std::size_t pos = count_positives(labels);
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw MetricError("auroc needs both positive and negative samples");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1 .. j
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]]) rank_sum += midrank;
    i = j;
  }
  const double p = static_cast<double>(pos), n = static_cast<double>(neg);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

double average_precision(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  check_sizes(scores, labels, "average_precision");
  const std::size_t pos = count_positives(labels);
  if (pos == 0) throw MetricError("average precision needs at least one positive sample");
  double ap = 0.0;
  std::size_t prev_tp = 0;
  sweep_thresholds(scores, labels, [&](std::size_t tp, std::size_t fp) {
    if (tp != prev_tp) {
      const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
      ap += static_cast<double>(tp - prev_tp) / static_cast<double>(pos) * precision;
      prev_tp = tp;
    }
  });
  return ap;
}

double f1_max(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  check_sizes(scores, labels, "f1_max");
  const std::size_t pos = count_positives(labels);
  if (pos == 0) throw MetricError("f1_max needs at least one positive sample");
  double best = 0.0;
  sweep_thresholds(scores, labels, [&](std::size_t tp, std::size_t fp) {
    const double fn = static_cast<double>(pos - tp);
    const double f1 = 2.0 * static_cast<double>(tp) / (2.0 * static_cast<double>(tp) + static_cast<double>(fp) + fn);
    best = std::max(best, f1);
  });
  return best;
}

std::vector<int> label_regions(const Mask& mask, int* num_regions) {
  std::vector<int> labels(mask.values.size(), -1);
  int next = 0;
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * mask.width + x;
      if (!mask.values[idx] || labels[idx] >= 0) continue;
      labels[idx] = next;
      stack.assign(1, {y, x});
      while (!stack.empty()) {
        auto [cy, cx] = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int ny = cy + dy, nx = cx + dx;
            if (ny < 0 || nx < 0 || ny >= mask.height || nx >= mask.width) continue;
            const std::size_t n = static_cast<std::size_t>(ny) * mask.width + nx;
            if (mask.values[n] && labels[n] < 0) {
              labels[n] = next;
              stack.emplace_back(ny, nx);
            }
          }
      }
      ++next;
    }
  }
  if (num_regions) *num_regions = next;
  return labels;
}

double aupro(const std::vector<std::vector<double>>& maps, const std::vector<Mask>& masks, double fpr_limit) {
  if (!(fpr_limit > 0.0 && fpr_limit <= 1.0)) throw MetricError("aupro: fpr_limit must lie in (0, 1]");
  if (maps.size() != masks.size()) throw MetricError("aupro: map and mask counts differ");

  // Flatten to (score, region) with region -1 for normal pixels.
  std::vector<double> scores;
  std::vector<int> region;
  std::vector<double> region_size;
  std::size_t normal_pixels = 0;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    if (maps[i].size() != masks[i].values.size()) throw MetricError("aupro: map/mask size mismatch");
    int count = 0;
    const auto labels = label_regions(masks[i], &count);
    const int offset = static_cast<int>(region_size.size());
    region_size.resize(region_size.size() + count, 0.0);
    for (std::size_t p = 0; p < labels.size(); ++p) {
      scores.push_back(maps[i][p]);
      if (labels[p] >= 0) {
        region.push_back(offset + labels[p]);
        region_size[offset + labels[p]] += 1.0;
      } else {
        region.push_back(-1);
        ++normal_pixels;
      }
    }
  }
  if (region_size.empty()) throw MetricError("aupro needs at least one anomalous region");
  if (normal_pixels == 0) throw MetricError("aupro needs at least one normal pixel");

  const auto order = descending(scores);
  const double num_regions = static_cast<double>(region_size.size());
  double overlap_sum = 0.0;
  std::size_t fp = 0;
  double area = 0.0;
  double prev_fpr = 0.0, prev_pro = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == s; ++i) {
      const int r = region[order[i]];
      if (r < 0) {
        ++fp;
      } else {
        overlap_sum += 1.0 / region_size[r];
      }
    }
    const double fpr = static_cast<double>(fp) / static_cast<double>(normal_pixels);
    const double pro = overlap_sum / num_regions;
    if (fpr >= fpr_limit) {
      const double t = fpr > prev_fpr ? (fpr_limit - prev_fpr) / (fpr - prev_fpr) : 0.0;
      const double pro_at_limit = prev_pro + t * (pro - prev_pro);
      area += 0.5 * (prev_pro + pro_at_limit) * (fpr_limit - prev_fpr);
      return area / fpr_limit;
    }
    area += 0.5 * (prev_pro + pro) * (fpr - prev_fpr);
    prev_fpr = fpr;
    prev_pro = pro;
  }
  return area / fpr_limit;  // unreachable: the last group reaches fpr = 1
}

}  // namespace proad
