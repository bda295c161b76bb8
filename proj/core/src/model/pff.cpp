#include "sea/model/pff.hpp"

#include "sea/errors.hpp"

namespace sea::model {

using nn::Node;
using nn::Tape;

FusionFormer::FusionFormer(nn::ParamStore& store, const PffConfig& cfg,
                           int pure_dim, int mm_dim, Rng& rng)
    : cfg_(cfg) {
  if (cfg.model_dim <= 0 || cfg.heads <= 0 || cfg.model_dim % cfg.heads != 0)
    throw ConfigError("pff: model_dim must be a positive multiple of heads");
  pure_.dim = pure_dim;
  mm_.dim = mm_dim;
  auto make_proj = [&](StreamProj& p, const std::string& name) {
    if (p.dim == cfg.model_dim) return;
    p.in = nn::LinearLayer::create(store, "pff." + name + ".in_proj", p.dim,
                                   cfg.model_dim, rng);
    p.out = nn::LinearLayer::create(store, "pff." + name + ".out_proj",
                                    cfg.model_dim, p.dim, rng);
  };
  make_proj(pure_, "pure");
  make_proj(mm_, "mm");
  blocks_.reserve(static_cast<std::size_t>(cfg.layers));
  for (int i = 0; i < cfg.layers; ++i)
    blocks_.push_back(nn::TransformerBlock::create(
        store, "pff.block" + std::to_string(i), cfg.model_dim, cfg.heads,
        cfg.ffn_dim, cfg.dropout, rng));
}

const FusionFormer::StreamProj& FusionFormer::proj_for(
    enc::Family family) const {
  switch (family) {
    case enc::Family::pure_visual:
      return pure_;
    case enc::Family::multimodal_visual:
      return mm_;
    default:
      throw ShapeError("pff: text features cannot be fused");
  }
}

Node* FusionFormer::fuse(Tape& t, Node* tokens, enc::Family family,
                         Rng* drop_rng, bool training) const {
  const StreamProj& p = proj_for(family);
  if (tokens->value.cols() != p.dim)
    throw ShapeError("pff: stream dim " + std::to_string(tokens->value.cols()) +
                     " does not match configured dim " + std::to_string(p.dim));
  Node* x = p.in ? (*p.in)(t, tokens) : tokens;
  for (const auto& block : blocks_) x = block(t, x, drop_rng, training);
  return p.out ? (*p.out)(t, x) : x;
}

enc::FeatureMap FusionFormer::fuse(const enc::FeatureMap& in) const {
  nn::Tape t;
  Node* out = fuse(t, t.constant(in.tokens), in.origin);
  enc::FeatureMap fm = in;
  fm.tokens = out->value;
  fm.source = enc::Source::fused;
  return fm;
}

}  // namespace sea::model
