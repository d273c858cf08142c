#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "proad/image.hpp"

namespace proad {

enum class Label { Normal, Anomalous };
enum class Split { Train, Test };
enum class DefectType { Scratch, Blob, ColorPatch, MissingPart, Misplacement };

std::string to_string(DefectType type);
DefectType defect_from_string(const std::string& name);
std::string to_string(Split split);

struct ImageSample {
  std::string id;          // unique, filesystem-safe
  std::string class_name;  // category directory name
  std::string defect;      // "good" for normal samples
  std::string stem;        // file stem inside its directory
  Image image;             // H x W x 3, values in [0, 1]
  Mask mask;               // H x W, 1 = anomalous
  Label label = Label::Normal;
  int class_id = 0;
  Split split = Split::Train;
};

// Throws DataError when a sample violates the split/label/mask contract.
void validate_sample(const ImageSample& sample);

struct DatasetSpec {
  int num_classes = 2;
  int train_per_class = 32;
  int test_normal_per_class = 8;
  int test_anomalous_per_class = 12;
  int image_size = 64;
  int patch_size = 8;
  std::vector<DefectType> defect_types{DefectType::Blob, DefectType::Scratch, DefectType::Misplacement};
  std::uint64_t seed = 0;

  void validate() const;
};

// Clean and defective renders of the same seeded scene. `mask` marks exactly
// the pixels where the two differ.
struct SyntheticRender {
  Image clean;
  Image defective;
  Mask mask;
};

SyntheticRender render_synthetic(const DatasetSpec& spec, int class_id, Split split, int index,
                                 std::optional<DefectType> defect);

// Train samples first (class-major), then test samples per class: normals,
// then anomalies cycling through spec.defect_types.
std::vector<ImageSample> generate_dataset(const DatasetSpec& spec);

// <root>/<category>/{train/good, test/<defect>, ground_truth/<defect>/*_mask.png}.
// Images are bilinearly resized to resize_to x resize_to, then center-cropped;
// masks use nearest-neighbour resampling and are binarized at 0.5.
std::vector<ImageSample> load_mvtec_layout(const std::filesystem::path& root, int resize_to, int center_crop_to);

void write_mvtec_layout(const std::filesystem::path& root, const std::vector<ImageSample>& samples);

// Seeded per-epoch shuffling into index batches. The last batch may be short.
class BatchIterator {
 public:
  BatchIterator(std::size_t num_samples, std::size_t batch_size, std::uint64_t shuffle_seed);

  std::vector<std::vector<std::size_t>> epoch(std::size_t epoch_index) const;
  std::size_t batches_per_epoch() const { return (num_samples_ + batch_size_ - 1) / batch_size_; }

 private:
  std::size_t num_samples_;
  std::size_t batch_size_;
  std::uint64_t seed_;
};

// Order-sensitive hash of every pixel and mask of a dataset.
std::uint64_t dataset_hash(const std::vector<ImageSample>& samples);

}  // namespace proad
