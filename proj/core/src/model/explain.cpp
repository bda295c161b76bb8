#include "sea/model/explain.hpp"

#include <cmath>

#include "sea/errors.hpp"

namespace sea::model {

using nn::Matrix;
using nn::Node;
using nn::Tape;

ExplainVariant explain_variant_from_string(const std::string& s) {
  if (s == "ffn_softmax") return ExplainVariant::ffn_softmax;
  if (s == "concat_avgpool") return ExplainVariant::concat_avgpool;
  if (s == "transformer") return ExplainVariant::transformer;
  throw ConfigError("unknown explain variant: '" + s + "'");
}

std::string to_string(ExplainVariant v) {
  switch (v) {
    case ExplainVariant::ffn_softmax: return "ffn_softmax";
    case ExplainVariant::concat_avgpool: return "concat_avgpool";
    case ExplainVariant::transformer: return "transformer";
  }
  return "?";
}

ExplainFormer::ExplainFormer(nn::ParamStore& store, const ExplainConfig& cfg,
                             Rng& rng)
    : cfg_(cfg) {
  if (cfg.dim <= 0) throw ConfigError("explain: dim must be positive");
  switch (cfg.variant) {
    case ExplainVariant::transformer:
      if (cfg.heads <= 0 || cfg.dim % cfg.heads != 0)
        throw ConfigError("explain: dim must be divisible by heads");
      // Live residuals and uniform step-0 attention: the classification
      // path starts as a mean-pooling featurizer (which trains reliably)
      // and sharpens its attention from there.
      mhsa_ = nn::TransformerBlock::create(store, "explain.mhsa", cfg.dim,
                                           cfg.heads, cfg.ffn_dim, 0.0, rng,
                                           /*gate_init=*/1.0,
                                           /*uniform_attention_init=*/true);
      mhca_ = nn::TransformerBlock::create(store, "explain.mhca", cfg.dim,
                                           cfg.heads, cfg.ffn_dim, 0.0, rng,
                                           /*gate_init=*/1.0,
                                           /*uniform_attention_init=*/true);
      cls_ = store.create("explain.cls_token", [&] {
        Matrix m(1, cfg.dim);
        for (int i = 0; i < cfg.dim; ++i)
          m(0, i) = rng.normal() / std::sqrt(static_cast<double>(cfg.dim));
        return m;
      }());
      break;
    case ExplainVariant::ffn_softmax:
      ffn_in_ = nn::LinearLayer::create(store, "explain.ffn_in", 2 * cfg.dim,
                                        cfg.ffn_dim, rng);
      ffn_out_ = nn::LinearLayer::create(store, "explain.ffn_out", cfg.ffn_dim,
                                         cfg.dim, rng);
      break;
    case ExplainVariant::concat_avgpool:
      break;  // parameter-free
  }
}

std::pair<Node*, Node*> ExplainFormer::self_attend(Tape& t, Node* exo_tokens,
                                                   Node* ego_tokens) const {
  if (cfg_.variant != ExplainVariant::transformer)
    throw ConfigError("self_attend is only defined for the transformer variant");
  if (!exo_tokens || exo_tokens->value.rows() == 0)
    throw InputError("self_attend: empty exocentric token set");
  // Running the shared block per domain IS the domain mask: no cross terms
  // exist in the graph at all.
  Node* exo = (*mhsa_)(t, exo_tokens);
  Node* ego = (*mhsa_)(t, ego_tokens);
  return {exo, ego};
}

Node* ExplainFormer::cross_domain_attend(Tape& t, Node* exo_refined,
                                         Node* ego_refined) const {
  if (cfg_.variant != ExplainVariant::transformer)
    throw ConfigError(
        "cross_domain_attend is only defined for the transformer variant");
  Node* kv = exo_refined
                 ? nn::concat_rows(t, {exo_refined, ego_refined})
                 : ego_refined;
  if (kv->value.cols() != cfg_.dim)
    throw ShapeError("cross_domain_attend: token dim mismatch");
  return mhca_->cross(t, t.param(cls_), kv);
}

Node* ExplainFormer::forward(Tape& t, Node* exo_tokens,
                             Node* ego_tokens) const {
  switch (cfg_.variant) {
    case ExplainVariant::transformer: {
      if (exo_tokens) {
        auto [exo, ego] = self_attend(t, exo_tokens, ego_tokens);
        return cross_domain_attend(t, exo, ego);
      }
      Node* ego = (*mhsa_)(t, ego_tokens);
      return cross_domain_attend(t, nullptr, ego);
    }
    case ExplainVariant::ffn_softmax: {
      Node* exo_mean = exo_tokens
                           ? nn::mean_rows(t, exo_tokens)
                           : t.constant(Matrix::Zero(1, cfg_.dim));
      Node* ego_mean = nn::mean_rows(t, ego_tokens);
      Node* cat = nn::concat_cols(t, {exo_mean, ego_mean});
      return (*ffn_out_)(t, nn::gelu(t, (*ffn_in_)(t, cat)));
    }
    case ExplainVariant::concat_avgpool: {
      Node* all = exo_tokens ? nn::concat_rows(t, {exo_tokens, ego_tokens})
                             : ego_tokens;
      return nn::mean_rows(t, all);
    }
  }
  throw ConfigError("unreachable explain variant");
}

ClassifierHeads::ClassifierHeads(nn::ParamStore& store, int dim, int n_actions,
                                 int n_objects, Rng& rng)
    : action(nn::LinearLayer::create(store, "heads.action", dim, n_actions, rng)),
      object(nn::LinearLayer::create(store, "heads.object", dim, n_objects, rng)) {}

std::pair<Node*, Node*> ClassifierHeads::operator()(Tape& t,
                                                    Node* f_cls) const {
  if (!f_cls->value.allFinite())
    throw InputError("classify: non-finite classification feature");
  return {action(t, f_cls), object(t, f_cls)};
}

}  // namespace sea::model
