#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "proad/datagen.hpp"
#include "proad/error.hpp"
#include "proad/hash.hpp"
#include "proad/rng.hpp"

namespace proad {

namespace {

using Color = std::array<double, 3>;

enum class PartShape { Disc, Square, Ring };

struct Part {
  PartShape shape;
  double cy, cx;   // pixels
  double radius;   // pixels
  Color color;
};

struct ClassTemplate {
  Color base;
  Color stripe;
  double frequency;  // cycles across the image
  double angle;
  std::vector<Part> parts;
};

struct Scene {
  const ClassTemplate* tmpl;
  double phase;
  std::vector<Part> parts;
};

Color random_color(Rng& rng, double lo, double hi) {
  return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

ClassTemplate make_template(const DatasetSpec& spec, int class_id) {
  Rng rng(derive_seed(spec.seed, {0x7e3, static_cast<std::uint64_t>(class_id)}));
  const double size = spec.image_size;
  ClassTemplate t;
  t.base = random_color(rng, 0.25, 0.6);
  t.stripe = random_color(rng, -0.15, 0.15);
  t.frequency = rng.uniform(2.0, 5.0);
  t.angle = rng.uniform(0.0, std::numbers::pi);
  // Four parts on a jittered 2 x 2 layout.
  for (int k = 0; k < 4; ++k) {
    Part p;
    p.shape = static_cast<PartShape>(rng.integer(0, 2));
    const int gy = k / 2, gx = k % 2;
    p.cy = size * (0.28 + 0.44 * gy) + rng.uniform(-0.04, 0.04) * size;
    p.cx = size * (0.28 + 0.44 * gx) + rng.uniform(-0.04, 0.04) * size;
    p.radius = size * rng.uniform(0.08, 0.12);
    p.color = random_color(rng, 0.0, 1.0);
    t.parts.push_back(p);
  }
  return t;
}

bool inside(const Part& p, double y, double x) {
  const double dy = y - p.cy, dx = x - p.cx;
  switch (p.shape) {
    case PartShape::Disc:
      return dy * dy + dx * dx <= p.radius * p.radius;
    case PartShape::Square:
      return std::abs(dy) <= p.radius * 0.85 && std::abs(dx) <= p.radius * 0.85;
    case PartShape::Ring: {
      const double r2 = dy * dy + dx * dx;
      return r2 <= p.radius * p.radius && r2 >= 0.3 * p.radius * p.radius;
    }
  }
  return false;
}

Image render_scene(const Scene& scene, int size) {
  Image img(size, size, 3);
  const auto& t = *scene.tmpl;
  const double ky = std::sin(t.angle) * 2.0 * std::numbers::pi * t.frequency / size;
  const double kx = std::cos(t.angle) * 2.0 * std::numbers::pi * t.frequency / size;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double wave = std::sin(ky * y + kx * x + scene.phase);
      Color c{t.base[0] + t.stripe[0] * wave, t.base[1] + t.stripe[1] * wave, t.base[2] + t.stripe[2] * wave};
      for (const auto& p : scene.parts) {
        if (inside(p, y + 0.5, x + 0.5)) c = p.color;
      }
      for (int ch = 0; ch < 3; ++ch) img.at(y, x, ch) = c[ch];
    }
  }
  return img;
}

void finish(Image& img, const std::vector<double>& noise) {
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] += noise[i];
  quantize_8bit(img);
}

double segment_distance(double y, double x, double y0, double x0, double y1, double x1) {
  const double vy = y1 - y0, vx = x1 - x0;
  const double len2 = vy * vy + vx * vx;
  double t = len2 > 0 ? ((y - y0) * vy + (x - x0) * vx) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dy = y - (y0 + t * vy), dx = x - (x0 + t * vx);
  return std::sqrt(dy * dy + dx * dx);
}

// Applies one defect to a copy of the scene/image and returns the result
// before noise is added.
Image apply_defect(const Scene& scene, const Image& clean_base, DefectType type, Rng& rng, int size) {
  const double s = size;
  switch (type) {
    case DefectType::Blob: {
      Image img = clean_base;
      const double cy = rng.uniform(0.15, 0.85) * s, cx = rng.uniform(0.15, 0.85) * s;
      const double ry = rng.uniform(0.05, 0.11) * s, rx = rng.uniform(0.05, 0.11) * s;
      const Color c = random_color(rng, 0.0, 1.0);
      for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
          const double dy = (y + 0.5 - cy) / ry, dx = (x + 0.5 - cx) / rx;
          if (dy * dy + dx * dx <= 1.0)
            for (int ch = 0; ch < 3; ++ch) img.at(y, x, ch) = c[ch];
        }
      return img;
    }
    case DefectType::Scratch: {
      Image img = clean_base;
      const double cy = rng.uniform(0.2, 0.8) * s, cx = rng.uniform(0.2, 0.8) * s;
      const double len = rng.uniform(0.2, 0.45) * s;
      const double ang = rng.uniform(0.0, std::numbers::pi);
      const double y0 = cy - 0.5 * len * std::sin(ang), x0 = cx - 0.5 * len * std::cos(ang);
      const double y1 = cy + 0.5 * len * std::sin(ang), x1 = cx + 0.5 * len * std::cos(ang);
      const double half_width = std::max(0.9, 0.015 * s);
      const double shade = rng.uniform() < 0.5 ? 0.03 : 0.97;
      for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
          if (segment_distance(y + 0.5, x + 0.5, y0, x0, y1, x1) <= half_width)
            for (int ch = 0; ch < 3; ++ch) img.at(y, x, ch) = shade;
      return img;
    }
    case DefectType::ColorPatch: {
      Image img = clean_base;
      const int h = static_cast<int>(rng.uniform(0.1, 0.2) * s), w = static_cast<int>(rng.uniform(0.1, 0.2) * s);
      const int top = rng.integer(0, size - h - 1), left = rng.integer(0, size - w - 1);
      for (int y = top; y < top + h; ++y)
        for (int x = left; x < left + w; ++x) {
          const Color c{img.at(y, x, 0), img.at(y, x, 1), img.at(y, x, 2)};
          img.at(y, x, 0) = c[2];
          img.at(y, x, 1) = 1.0 - c[0];
          img.at(y, x, 2) = c[1];
        }
      return img;
    }
    case DefectType::MissingPart: {
      Scene changed = scene;
      changed.parts.erase(changed.parts.begin() + rng.integer(0, static_cast<int>(changed.parts.size()) - 1));
      return render_scene(changed, size);
    }
    case DefectType::Misplacement: {
      Scene changed = scene;
      const int k = rng.integer(0, static_cast<int>(changed.parts.size()) - 1);
      Part& moved = changed.parts[k];
      // Relocate to a spot that overlaps neither the original footprint nor
      // any other part, so the moved part looks locally normal.
      for (int attempt = 0; attempt < 200; ++attempt) {
        const double cy = rng.uniform(moved.radius + 1.0, s - moved.radius - 1.0);
        const double cx = rng.uniform(moved.radius + 1.0, s - moved.radius - 1.0);
        bool clear = true;
        for (const auto& other : scene.parts) {
          const double d = std::hypot(cy - other.cy, cx - other.cx);
          if (d < moved.radius + other.radius + 1.0) clear = false;
        }
        if (clear) {
          moved.cy = cy;
          moved.cx = cx;
          break;
        }
        if (attempt == 199) {
          moved.cy = s - moved.cy;
          moved.cx = s - moved.cx;
        }
      }
      return render_scene(changed, size);
    }
  }
  return clean_base;
}

std::string pad3(int i) {
  std::string s = std::to_string(i);
  return std::string(s.size() < 3 ? 3 - s.size() : 0, '0') + s;
}

std::string class_name(int class_id) { return "class" + pad3(class_id).substr(1); }

}  // namespace

std::string to_string(DefectType type) {
  switch (type) {
    case DefectType::Scratch: return "scratch";
    case DefectType::Blob: return "blob";
    case DefectType::ColorPatch: return "color_patch";
    case DefectType::MissingPart: return "missing_part";
    case DefectType::Misplacement: return "misplacement";
  }
  return "unknown";
}

DefectType defect_from_string(const std::string& name) {
  for (auto t : {DefectType::Scratch, DefectType::Blob, DefectType::ColorPatch, DefectType::MissingPart,
                 DefectType::Misplacement}) {
    if (to_string(t) == name) return t;
  }
  throw ConfigError("unknown defect type '" + name + "'");
}

std::string to_string(Split split) { return split == Split::Train ? "train" : "test"; }

void validate_sample(const ImageSample& s) {
  const bool empty_mask = s.mask.count() == 0;
  if (s.mask.height != s.image.height || s.mask.width != s.image.width) {
    throw DataError(s.id + ": mask size differs from image size");
  }
  if (s.split == Split::Train && (s.label != Label::Normal || !empty_mask)) {
    throw DataError(s.id + ": training samples must be normal with empty masks");
  }
  if ((s.label == Label::Normal) != empty_mask) {
    throw DataError(s.id + ": label and mask disagree");
  }
}

void DatasetSpec::validate() const {
  if (num_classes < 1 || train_per_class < 1 || test_normal_per_class < 1 || test_anomalous_per_class < 1) {
    throw ConfigError("dataset counts must all be >= 1");
  }
  if (patch_size < 1 || image_size < patch_size || image_size % patch_size != 0) {
    throw ConfigError("image size " + std::to_string(image_size) + " is not divisible by patch size " +
                      std::to_string(patch_size));
  }
  if (defect_types.empty()) throw ConfigError("at least one defect type is required");
}

SyntheticRender render_synthetic(const DatasetSpec& spec, int class_id, Split split, int index,
                                 std::optional<DefectType> defect) {
  spec.validate();
  const int size = spec.image_size;
  const ClassTemplate tmpl = make_template(spec, class_id);
  const auto split_tag = static_cast<std::uint64_t>(split == Split::Train ? 1 : (defect ? 3 : 2));
  Rng rng(derive_seed(spec.seed, {0x5ce, static_cast<std::uint64_t>(class_id), split_tag,
                                  static_cast<std::uint64_t>(index)}));

  Scene scene{&tmpl, rng.uniform(-0.3, 0.3), tmpl.parts};
  const double jitter = 0.025 * size;
  for (auto& p : scene.parts) {
    p.cy += rng.uniform(-jitter, jitter);
    p.cx += rng.uniform(-jitter, jitter);
  }
  std::vector<double> noise(static_cast<std::size_t>(size) * size * 3);
  for (auto& v : noise) v = rng.normal(0.0, 0.015);

  const Image base = render_scene(scene, size);
  SyntheticRender out;
  out.clean = base;
  finish(out.clean, noise);
  out.mask = Mask(size, size);
  if (!defect) {
    out.defective = out.clean;
    return out;
  }
  for (int attempt = 0; attempt < 16; ++attempt) {
    out.defective = apply_defect(scene, base, *defect, rng, size);
    finish(out.defective, noise);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        bool changed = false;
        for (int ch = 0; ch < 3; ++ch) changed = changed || out.defective.at(y, x, ch) != out.clean.at(y, x, ch);
        out.mask.at(y, x) = changed ? 1 : 0;
      }
    if (out.mask.count() > 0) return out;
  }
  throw DataError("could not place a visible " + to_string(*defect) + " defect");
}

std::vector<ImageSample> generate_dataset(const DatasetSpec& spec) {
  spec.validate();
  std::vector<ImageSample> samples;
  for (int c = 0; c < spec.num_classes; ++c) {
    for (int i = 0; i < spec.train_per_class; ++i) {
      ImageSample s;
      s.class_id = c;
      s.class_name = class_name(c);
      s.defect = "good";
      s.stem = pad3(i);
      s.split = Split::Train;
      s.label = Label::Normal;
      auto r = render_synthetic(spec, c, Split::Train, i, std::nullopt);
      s.image = std::move(r.clean);
      s.mask = std::move(r.mask);
      s.id = s.class_name + "_train_good_" + s.stem;
      samples.push_back(std::move(s));
    }
  }
  for (int c = 0; c < spec.num_classes; ++c) {
    for (int i = 0; i < spec.test_normal_per_class; ++i) {
      ImageSample s;
      s.class_id = c;
      s.class_name = class_name(c);
      s.defect = "good";
      s.stem = pad3(i);
      s.split = Split::Test;
      auto r = render_synthetic(spec, c, Split::Test, i, std::nullopt);
      s.image = std::move(r.clean);
      s.mask = std::move(r.mask);
      s.id = s.class_name + "_test_good_" + s.stem;
      samples.push_back(std::move(s));
    }
    for (int i = 0; i < spec.test_anomalous_per_class; ++i) {
      const DefectType type = spec.defect_types[static_cast<std::size_t>(i) % spec.defect_types.size()];
      ImageSample s;
      s.class_id = c;
      s.class_name = class_name(c);
      s.defect = to_string(type);
      s.stem = pad3(i);
      s.split = Split::Test;
      s.label = Label::Anomalous;
      auto r = render_synthetic(spec, c, Split::Test, i, type);
      s.image = std::move(r.defective);
      s.mask = std::move(r.mask);
      s.id = s.class_name + "_test_" + s.defect + "_" + s.stem;
      samples.push_back(std::move(s));
    }
  }
  return samples;
}

std::uint64_t dataset_hash(const std::vector<ImageSample>& samples) {
  Fnv1a h;
  for (const auto& s : samples) {
    h.update(s.id);
    h.update(s.image.pixels);
    h.update(s.mask.values.data(), s.mask.values.size());
  }
  return h.digest();
}

}  // namespace proad
