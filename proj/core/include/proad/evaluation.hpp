#pragma once

#include <string>
#include <vector>

#include "proad/anomaly_map.hpp"
#include "proad/datagen.hpp"
#include "proad/model.hpp"

namespace proad {

struct ImageMetrics {
  double auroc = 0.0;
  double ap = 0.0;
  double f1_max = 0.0;
};

struct PixelMetrics {
  double auroc = 0.0;
  double ap = 0.0;
  double f1_max = 0.0;
  double aupro = 0.0;
};

struct ClassReport {
  int class_id = 0;
  std::string class_name;
  std::size_t normal_images = 0;
  std::size_t anomalous_images = 0;
  ImageMetrics image;
  PixelMetrics pixel;
};

struct EvalReport {
  ImageMetrics image;
  PixelMetrics pixel;
  std::vector<ClassReport> per_class;
  // Mean pre-smoothing map value on anomalous pixels over that on normal
  // pixels; large when anomalies are not reconstructed.
  double recon_ratio = 0.0;
  std::size_t images = 0;
  std::string config_hash;
  std::string parameter_hash;
};

struct EvalOptions {
  double sigma = -1.0;  // < 0: smoothing_sigma(image_size)
  double fpr_limit = 0.3;
};

struct EvalOutput {
  EvalReport report;
  std::vector<AnomalyMap> maps;  // one per test sample, in input order
};

// Inference with dropout disabled over every test-split sample. Metric
// errors are rethrown with the offending class named.
EvalOutput evaluate(const ProAD& model, const std::vector<ImageSample>& samples, const EvalOptions& options = {});

// key: value lines, aggregate block first, then one block per class.
std::string format_report(const EvalReport& report);

// Anomaly map scaled to [0, 1] per image, for visualization only.
Image map_to_image(const AnomalyMap& map);

}  // namespace proad
