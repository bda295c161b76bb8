#include "sea/affordance/affordance.hpp"

#include "sea/caption.hpp"
#include "sea/errors.hpp"

namespace sea::aff {

using nn::Node;
using nn::Tape;

Node* similarity_grid(Tape& t, Node* tokens, const Eigen::RowVectorXd& text,
                      int h, int w, int img_h, int img_w) {
  if (tokens->value.rows() != static_cast<Eigen::Index>(h) * w)
    throw ShapeError("similarity_grid: token count does not match grid");
  Node* cosines = nn::cosine_rows_const(t, tokens, text);
  Node* grid = nn::reshape(t, cosines, h, w);
  if (img_h == h && img_w == w) return grid;
  return nn::bilinear_upsample(t, grid, img_h, img_w);
}

Node* normalize_and_filter(Tape& t, Node* grid, const ThresholdConfig& cfg) {
  return nn::minmax_filter(t, grid, cfg.beta, cfg.eps_norm);
}

AffordanceHeatmap similarity_heatmap(const enc::TextEmbedding& text,
                                     const enc::FeatureMap& feats) {
  if (feats.origin != enc::Family::multimodal_visual)
    throw ShapeError(
        "similarity_heatmap: needs features from the multimodal stream");
  if (text.vec.cols() != feats.tokens.cols())
    throw ShapeError("similarity_heatmap: text dim " +
                     std::to_string(text.vec.cols()) + " != feature dim " +
                     std::to_string(feats.tokens.cols()));
  Tape t;
  Node* out = similarity_grid(t, t.constant(feats.tokens), text.vec, feats.h,
                              feats.w, feats.img_h, feats.img_w);
  return AffordanceHeatmap{out->value, Stage::raw, feats.domain};
}

AffordanceHeatmap normalize_and_filter(const AffordanceHeatmap& raw,
                                       const ThresholdConfig& cfg) {
  if (raw.stage != Stage::raw)
    throw InputError("normalize_and_filter: expects a raw heatmap");
  Tape t;
  Node* out = normalize_and_filter(t, t.constant(raw.grid), cfg);
  return AffordanceHeatmap{out->value, Stage::final, raw.domain};
}

std::string build_prompt(const std::string& action, const std::string& object,
                         const AffordanceConfig& cfg) {
  if (cfg.prompt_style == "pair") return action + " " + object;
  if (cfg.prompt_style == "template")
    return render_caption(action, object, cfg.caption_template);
  throw ConfigError("unknown prompt style: '" + cfg.prompt_style + "'");
}

LocalizeResult localize(const std::string& action, const std::string& object,
                        const enc::TextEncoder& text_encoder,
                        const enc::FeatureMap& ego_feats,
                        const enc::FeatureMap* exo_feats,
                        const AffordanceConfig& cfg) {
  const enc::TextEmbedding text =
      text_encoder.encode(build_prompt(action, object, cfg));
  LocalizeResult out{
      normalize_and_filter(similarity_heatmap(text, ego_feats), cfg.threshold),
      std::nullopt};
  if (exo_feats)
    out.exo = normalize_and_filter(similarity_heatmap(text, *exo_feats),
                                   cfg.threshold);
  return out;
}

}  // namespace sea::aff
