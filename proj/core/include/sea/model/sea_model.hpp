#pragma once

#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "sea/affordance/affordance.hpp"
#include "sea/config.hpp"
#include "sea/data/dataset.hpp"
#include "sea/encoders/encoder.hpp"
#include "sea/losses/losses.hpp"
#include "sea/metrics/metrics.hpp"
#include "sea/model/explain.hpp"
#include "sea/model/pff.hpp"

namespace sea::model {

struct PredictionBundle {
  Matrix heatmap;  // final stage, canonical resolution, values in [0,1]
  std::optional<Matrix> exo_heatmap;  // first exo image, when provided
  std::vector<double> action_probs;
  std::vector<double> object_probs;
  std::vector<int> action_ranking;
  std::vector<int> object_ranking;
  std::string action;   // top-1
  std::string object;   // top-1
  std::string caption;  // rendered from the configured template
};

// One training example as fed to the batch graph. Keys identify images in
// the frozen-feature cache; leave them empty to bypass caching.
struct TrainItem {
  const data::Sample* sample = nullptr;
  Image ego;
  std::vector<Image> exo;
  std::string ego_key;
  std::vector<std::string> exo_keys;
};

struct BatchLossNodes {
  nn::Node* total;
  nn::Node* cos;
  nn::Node* con;
  nn::Node* ce_action;
  nn::Node* ce_object;
};

// The full system: frozen encoders, the shared fusion former, the
// self-explain former with classification heads, and the
// vision-language affordance head.
class SeaModel {
 public:
  SeaModel(const RunConfig& cfg, data::VocabPair vocab);

  // Builds the weakly-supervised training objective for a batch. Exocentric
  // images are required for every item.
  BatchLossNodes build_batch_graph(nn::Tape& t,
                                   const std::vector<TrainItem>& batch,
                                   Rng& aux_rng, bool training = true);

  // Ego-only (or ego+exo) inference; deterministic.
  PredictionBundle predict(const Image& ego,
                           const std::vector<Image>& exo = {}) const;

  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }
  const enc::EncoderSet& encoders() const { return encoders_; }
  const FusionFormer& fusion() const { return *pff_; }
  const ExplainFormer& explainer() const { return *explain_; }
  const ClassifierHeads& heads() const { return *heads_; }
  const data::VocabPair& vocab() const { return vocab_; }
  const RunConfig& config() const { return cfg_; }
  const aff::AffordanceConfig& affordance_config() const { return aff_cfg_; }
  const loss::LossWeights& loss_weights() const { return weights_; }

  void clear_feature_cache() const { feature_cache_.clear(); }

 private:
  struct EncodedPair {
    enc::FeatureMap pure;
    enc::FeatureMap mm;
  };
  const EncodedPair& encode_cached(const std::string& key, const Image& img,
                                   enc::Domain domain) const;

  RunConfig cfg_;
  data::VocabPair vocab_;
  enc::EncoderSet encoders_;
  nn::ParamStore params_;
  std::unique_ptr<FusionFormer> pff_;
  std::unique_ptr<ExplainFormer> explain_;
  std::unique_ptr<ClassifierHeads> heads_;
  aff::AffordanceConfig aff_cfg_;
  loss::LossWeights weights_;
  // Encoders are frozen, so per-image features are reusable across epochs.
  // Single-writer: the training loop owns this model.
  mutable std::unordered_map<std::string, EncodedPair> feature_cache_;
};

// Ego-only evaluation of a test split through met::evaluate_split.
met::MetricReport evaluate_model(const SeaModel& model,
                                 const std::vector<data::Sample>& samples,
                                 const met::HeatmapMetricConfig& cfg = {});

}  // namespace sea::model
