#include "proad/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "proad/error.hpp"
#include "proad/hash.hpp"
#include "proad/metrics.hpp"
#include "proad/ops.hpp"
#include "proad/trainer.hpp"

namespace proad {

namespace {

struct Subset {
  std::vector<double> image_scores;
  std::vector<std::uint8_t> image_labels;
  std::vector<double> pixel_scores;
  std::vector<std::uint8_t> pixel_labels;
  std::vector<std::vector<double>> maps;
  std::vector<Mask> masks;

  void add(const AnomalyMap& map, const ImageSample& s) {
    image_scores.push_back(map.image_score);
    image_labels.push_back(s.label == Label::Anomalous ? 1 : 0);
    pixel_scores.insert(pixel_scores.end(), map.scores.begin(), map.scores.end());
    pixel_labels.insert(pixel_labels.end(), s.mask.values.begin(), s.mask.values.end());
    maps.push_back(map.scores);
    masks.push_back(s.mask);
  }

  void score(ImageMetrics& image, PixelMetrics& pixel, double fpr_limit) const {
    image.auroc = auroc(image_scores, image_labels);
    image.ap = average_precision(image_scores, image_labels);
    image.f1_max = f1_max(image_scores, image_labels);
    pixel.auroc = auroc(pixel_scores, pixel_labels);
    pixel.ap = average_precision(pixel_scores, pixel_labels);
    pixel.f1_max = f1_max(pixel_scores, pixel_labels);
    pixel.aupro = aupro(maps, masks, fpr_limit);
  }
};

void append(std::string& out, const char* key, double value) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s: %.6f\n", key, value);
  out += buf;
}

}  // namespace

EvalOutput evaluate(const ProAD& model, const std::vector<ImageSample>& samples, const EvalOptions& options) {
  const ModelConfig& cfg = model.config();
  const double sigma = options.sigma < 0.0 ? smoothing_sigma(cfg.image_size) : options.sigma;
  NoGradGuard no_grad;
  Rng rng(0);  // unused: every dropout is off in eval mode
  const Tensor p_bn = model.bottleneck_prototypes(rng);

  EvalOutput out;
  Subset all;
  std::map<int, std::pair<std::string, Subset>> classes;
  double anomalous_sum = 0.0, normal_sum = 0.0;
  std::size_t anomalous_px = 0, normal_px = 0;
  for (const auto& s : samples) {
    if (s.split != Split::Test) continue;
    if (s.image.height != cfg.image_size || s.image.width != cfg.image_size) {
      throw ConfigError("test image " + s.id + " is " + std::to_string(s.image.height) + "x" +
                        std::to_string(s.image.width) + " but the model expects image_size " +
                        std::to_string(cfg.image_size));
    }
    const FeatureStack features = model.encode(s.image);
    const DecoderTrace trace = model.forward(features, p_bn, false, rng);
    AnomalyMap map = anomaly_map(trace, features, model.pairing(), cfg.image_size, cfg.encoder.patch_size, sigma);
    map.sample_id = s.id;
    for (std::size_t p = 0; p < map.raw.size(); ++p) {
      if (s.mask.values[p]) {
        anomalous_sum += map.raw[p];
        ++anomalous_px;
      } else {
        normal_sum += map.raw[p];
        ++normal_px;
      }
    }
    all.add(map, s);
    auto& entry = classes[s.class_id];
    entry.first = s.class_name;
    entry.second.add(map, s);
    out.maps.push_back(std::move(map));
  }
  if (out.maps.empty()) throw UsageError("evaluation set has no test samples");

  EvalReport& report = out.report;
  report.images = out.maps.size();
  all.score(report.image, report.pixel, options.fpr_limit);
  for (auto& [id, entry] : classes) {
    ClassReport cr;
    cr.class_id = id;
    cr.class_name = entry.first;
    for (auto l : entry.second.image_labels) (l ? cr.anomalous_images : cr.normal_images)++;
    try {
      entry.second.score(cr.image, cr.pixel, options.fpr_limit);
    } catch (const MetricError& e) {
      throw MetricError("class " + cr.class_name + " (id " + std::to_string(id) + "): " + e.what());
    }
    report.per_class.push_back(cr);
  }
  if (anomalous_px > 0 && normal_px > 0 && normal_sum > 0.0) {
    report.recon_ratio = (anomalous_sum / static_cast<double>(anomalous_px)) / (normal_sum / static_cast<double>(normal_px));
  }
  KeyValues kv;
  cfg.write(kv);
  Fnv1a h;
  h.update(kv.format());
  report.config_hash = hex64(h.digest());
  report.parameter_hash = hex64(parameter_hash(model));
  return out;
}

std::string format_report(const EvalReport& r) {
  std::string out;
  out += "config_hash: " + r.config_hash + "\n";
  out += "parameter_hash: " + r.parameter_hash + "\n";
  out += "images: " + std::to_string(r.images) + "\n";
  append(out, "image_auroc", r.image.auroc);
  append(out, "image_ap", r.image.ap);
  append(out, "image_f1_max", r.image.f1_max);
  append(out, "pixel_auroc", r.pixel.auroc);
  append(out, "pixel_ap", r.pixel.ap);
  append(out, "pixel_f1_max", r.pixel.f1_max);
  append(out, "pixel_aupro", r.pixel.aupro);
  append(out, "recon_ratio", r.recon_ratio);
  for (const auto& c : r.per_class) {
    out += "\n[class " + c.class_name + "]\n";
    out += "class_id: " + std::to_string(c.class_id) + "\n";
    out += "normal_images: " + std::to_string(c.normal_images) + "\n";
    out += "anomalous_images: " + std::to_string(c.anomalous_images) + "\n";
    append(out, "image_auroc", c.image.auroc);
    append(out, "image_ap", c.image.ap);
    append(out, "image_f1_max", c.image.f1_max);
    append(out, "pixel_auroc", c.pixel.auroc);
    append(out, "pixel_ap", c.pixel.ap);
    append(out, "pixel_f1_max", c.pixel.f1_max);
    append(out, "pixel_aupro", c.pixel.aupro);
  }
  return out;
}

Image map_to_image(const AnomalyMap& map) {
  Image img(map.height, map.width, 1);
  const auto [lo, hi] = std::minmax_element(map.scores.begin(), map.scores.end());
  const double range = *hi - *lo;
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    img.pixels[i] = range > 0.0 ? (map.scores[i] - *lo) / range : 0.0;
  }
  return img;
}

}  // namespace proad
