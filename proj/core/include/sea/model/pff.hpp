#pragma once

#include <optional>
#include <vector>

#include "sea/encoders/encoder.hpp"
#include "sea/nn/layers.hpp"

namespace sea::model {

struct PffConfig {
  int layers = 2;
  int heads = 4;
  int model_dim = 64;
  int ffn_dim = 256;
  double dropout = 0.0;
};

// Pixel-level fusion former: one stack of transformer blocks refines every
// stream (exo/ego x pure/multimodal) with the same parameters. When a
// family's encoder dim differs from model_dim, that family gets a linear
// projection into model_dim at the entry and back out at the exit, so fused
// maps keep their stream's native dimensionality.
class FusionFormer {
 public:
  FusionFormer(nn::ParamStore& store, const PffConfig& cfg, int pure_dim,
               int mm_dim, Rng& rng);

  nn::Node* fuse(nn::Tape& t, nn::Node* tokens, enc::Family family,
                 Rng* drop_rng = nullptr, bool training = false) const;
  enc::FeatureMap fuse(const enc::FeatureMap& in) const;

  const PffConfig& config() const { return cfg_; }

 private:
  struct StreamProj {
    int dim = 0;  // the family's native dim
    std::optional<nn::LinearLayer> in, out;
  };
  const StreamProj& proj_for(enc::Family family) const;

  PffConfig cfg_;
  std::vector<nn::TransformerBlock> blocks_;
  StreamProj pure_, mm_;
};

}  // namespace sea::model
