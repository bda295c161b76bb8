#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sea/data/dataset.hpp"
#include "sea/types.hpp"

namespace sea::data {

// Configuration for the offline synthetic dataset: object classes are
// rendered shapes, action classes pick the anchor region the shape lands in,
// and ground truth is a Gaussian blob on the shape center.
struct SyntheticConfig {
  int n_actions = 4;  // 2..9 (3x3 anchor grid)
  int n_objects = 4;  // 2..8 (distinct shape kinds)
  int samples_per_pair = 5;
  int image_h = 64;
  int image_w = 64;
  int k_exo = 3;  // lower bound on the exocentric pool per pair
  std::uint64_t seed = 7;
  double blob_sigma = 6.0;
  Setting setting = Setting::seen;

  void validate() const;  // throws ConfigError
};

struct DatasetManifest {
  std::vector<AnnotationRecord> records;  // annotation-file order
  std::vector<std::string> actions;
  std::vector<std::string> objects;
  int train_samples = 0;  // egocentric train records
  int test_samples = 0;   // egocentric test records
  int exo_images = 0;
  std::uint64_t annotations_hash = 0;  // FNV-1a of annotations.jsonl bytes
};

// Writes a complete dataset in the canonical layout under out_root.
// Byte-identical output for identical configs.
DatasetManifest generate_synthetic(const SyntheticConfig& cfg,
                                   const std::filesystem::path& out_root);

}  // namespace sea::data
