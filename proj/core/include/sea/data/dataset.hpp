#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "sea/data/vocabulary.hpp"
#include "sea/image.hpp"
#include "sea/types.hpp"

namespace sea::data {

// One line of <root>/annotations.jsonl.
struct AnnotationRecord {
  std::string image;  // path relative to the dataset root
  std::string view;   // "exocentric" | "egocentric"
  std::string action;
  std::string object;
  std::string caption;
  Split split = Split::train;
  Setting setting = Setting::seen;
};

// An egocentric record joined with its exocentric pool. Image pixels are
// loaded on demand; the struct itself is immutable after load_dataset.
struct Sample {
  std::string id;        // relative ego path, stable across runs
  std::string ego_path;  // absolute
  std::shared_ptr<const std::vector<std::string>> exo_pool;  // absolute paths
  int action_id = -1;
  int object_id = -1;
  std::string caption;
  std::string gt_path;  // absolute; empty when the split has no ground truth
  Split split = Split::train;
  Setting setting = Setting::seen;

  Image load_ego() const { return load_image(ego_path); }
  // [0,1] heatmap; throws SchemaError when missing or all-zero.
  Matrix load_gt() const;
};

VocabPair load_vocabularies(const std::filesystem::path& root);

// Loads every sample of (setting, split) under the canonical layout. Errors:
// missing annotations.jsonl -> LoadError; a record with labels outside the
// vocabulary, a caption not containing its labels, or a test record without
// ground truth -> SchemaError naming the record.
std::vector<Sample> load_dataset(const std::filesystem::path& root,
                                 Setting setting, Split split,
                                 const VocabPair& vocab);

// Draws k exocentric paths for the sample's (action, object) pool:
// distinct draws when the pool has at least k images, with replacement
// otherwise. Deterministic in rng_seed.
std::vector<std::string> sample_exocentrics(const Sample& sample, int k,
                                            std::uint64_t rng_seed);

}  // namespace sea::data
