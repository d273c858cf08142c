#include <algorithm>

#include "proad/datagen.hpp"
#include "proad/error.hpp"
#include "proad/png_io.hpp"

namespace fs = std::filesystem;

namespace proad {

namespace {

std::vector<fs::path> sorted_entries(const fs::path& dir, bool directories) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (directories ? e.is_directory() : (e.is_regular_file() && e.path().extension() == ".png")) {
      out.push_back(e.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Image transform_image(const Image& src, int resize_to, int crop_to) {
  return center_crop(resize_bilinear(src, resize_to, resize_to), crop_to, crop_to);
}

// Nonzero source pixels are anomalous.
Mask transform_mask(Image src, int resize_to, int crop_to) {
  for (auto& v : src.pixels) v = v > 0.0 ? 1.0 : 0.0;
  const Image m = center_crop(resize_nearest(src, resize_to, resize_to), crop_to, crop_to);
  Mask out(m.height, m.width);
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = m.pixels[i] >= 0.5 ? 1 : 0;
  return out;
}

}  // namespace

std::vector<ImageSample> load_mvtec_layout(const fs::path& root, int resize_to, int center_crop_to) {
  if (center_crop_to <= 0 || center_crop_to > resize_to) {
    throw ConfigError("center crop size must lie in [1, resize size]");
  }
  if (!fs::is_directory(root)) throw DataError("dataset root " + root.string() + " is not a directory");
  const auto categories = sorted_entries(root, true);
  if (categories.empty()) throw DataError("no categories found under " + root.string());

  std::vector<ImageSample> samples;
  int class_id = 0;
  for (const auto& cat_dir : categories) {
    const std::string category = cat_dir.filename().string();
    for (const auto& file : sorted_entries(cat_dir / "train" / "good", false)) {
      ImageSample s;
      s.class_id = class_id;
      s.class_name = category;
      s.defect = "good";
      s.stem = file.stem().string();
      s.split = Split::Train;
      s.image = transform_image(read_png(file), resize_to, center_crop_to);
      s.mask = Mask(center_crop_to, center_crop_to);
      s.id = category + "_train_good_" + s.stem;
      samples.push_back(std::move(s));
    }
    for (const auto& defect_dir : sorted_entries(cat_dir / "test", true)) {
      const std::string defect = defect_dir.filename().string();
      for (const auto& file : sorted_entries(defect_dir, false)) {
        ImageSample s;
        s.class_id = class_id;
        s.class_name = category;
        s.defect = defect;
        s.stem = file.stem().string();
        s.split = Split::Test;
        s.image = transform_image(read_png(file), resize_to, center_crop_to);
        s.id = category + "_test_" + defect + "_" + s.stem;
        if (defect == "good") {
          s.mask = Mask(center_crop_to, center_crop_to);
        } else {
          const fs::path mask_file = cat_dir / "ground_truth" / defect / (s.stem + "_mask.png");
          if (!fs::exists(mask_file)) {
            throw DataError("missing ground-truth mask " + mask_file.string() + " for " + file.string());
          }
          s.mask = transform_mask(read_png(mask_file, 1), resize_to, center_crop_to);
          s.label = Label::Anomalous;
          if (s.mask.count() == 0) {
            throw DataError("ground-truth mask " + mask_file.string() + " is empty after resize/crop");
          }
        }
        validate_sample(s);
        samples.push_back(std::move(s));
      }
    }
    ++class_id;
  }
  return samples;
}

void write_mvtec_layout(const fs::path& root, const std::vector<ImageSample>& samples) {
  std::error_code ec;
  for (const auto& s : samples) {
    const fs::path cat = root / s.class_name;
    fs::path image_path;
    if (s.split == Split::Train) {
      image_path = cat / "train" / "good" / (s.stem + ".png");
    } else {
      image_path = cat / "test" / s.defect / (s.stem + ".png");
    }
    fs::create_directories(image_path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + image_path.parent_path().string() + ": " + ec.message());
    write_png(image_path, s.image);
    if (s.label == Label::Anomalous) {
      const fs::path mask_path = cat / "ground_truth" / s.defect / (s.stem + "_mask.png");
      fs::create_directories(mask_path.parent_path(), ec);
      if (ec) throw IoError("cannot create " + mask_path.parent_path().string() + ": " + ec.message());
      write_mask_png(mask_path, s.mask);
    }
  }
}

}  // namespace proad
