#pragma once

#include <optional>
#include <string>
#include <utility>

#include "sea/nn/layers.hpp"

namespace sea::model {

// The three self-explain module flavors: a feed-forward head over pooled
// domain means, plain concatenate-and-average-pool, and the full per-domain
// self-attention + cross-domain attention former.
enum class ExplainVariant { ffn_softmax, concat_avgpool, transformer };

ExplainVariant explain_variant_from_string(const std::string& s);
std::string to_string(ExplainVariant v);

struct ExplainConfig {
  ExplainVariant variant = ExplainVariant::transformer;
  int heads = 4;
  int dim = 64;      // token dim of the fused pure-visual stream
  int ffn_dim = 256; // hidden width of the former's FFNs
};

// Produces the classification feature f_cls from fused pure-visual tokens.
// Exocentric tokens are required during training; inference may pass null,
// in which case attention runs over egocentric tokens only.
class ExplainFormer {
 public:
  ExplainFormer(nn::ParamStore& store, const ExplainConfig& cfg, Rng& rng);

  nn::Node* forward(nn::Tape& t, nn::Node* exo_tokens,
                    nn::Node* ego_tokens) const;

  // Variant "transformer" internals, exposed for direct testing. Per-domain
  // self-attention: exo tokens never attend to ego tokens or vice versa.
  std::pair<nn::Node*, nn::Node*> self_attend(nn::Tape& t, nn::Node* exo_tokens,
                                              nn::Node* ego_tokens) const;
  // [CLS] queries the union of refined tokens, then an FFN yields f_cls.
  nn::Node* cross_domain_attend(nn::Tape& t, nn::Node* exo_refined,
                                nn::Node* ego_refined) const;

  const ExplainConfig& config() const { return cfg_; }
  const nn::ParamPtr& cls_token() const { return cls_; }

 private:
  ExplainConfig cfg_;
  // variant transformer
  std::optional<nn::TransformerBlock> mhsa_;
  std::optional<nn::TransformerBlock> mhca_;
  nn::ParamPtr cls_;
  // variant ffn_softmax
  std::optional<nn::LinearLayer> ffn_in_, ffn_out_;
};

// Two independent linear heads over f_cls.
struct ClassifierHeads {
  nn::LinearLayer action;
  nn::LinearLayer object;

  ClassifierHeads(nn::ParamStore& store, int dim, int n_actions, int n_objects,
                  Rng& rng);
  // (action_logits, object_logits), both 1 x |V|.
  std::pair<nn::Node*, nn::Node*> operator()(nn::Tape& t, nn::Node* f_cls) const;
};

}  // namespace sea::model
