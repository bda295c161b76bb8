#include "sea/model/sea_model.hpp"

#include <cmath>

#include "sea/caption.hpp"
#include "sea/errors.hpp"

namespace sea::model {

using nn::Matrix;
using nn::Node;
using nn::Tape;

SeaModel::SeaModel(const RunConfig& cfg, data::VocabPair vocab)
    : cfg_(cfg), vocab_(std::move(vocab)) {
  cfg_.validate();
  if (vocab_.actions.size() < 1 || vocab_.objects.size() < 1)
    throw ConfigError("model needs non-empty vocabularies");
  encoders_ = enc::EncoderSet::from_config(cfg_);

  Rng rng(mix_seed(cfg_.seed, 0x5EEDULL));
  pff_ = std::make_unique<FusionFormer>(
      params_,
      PffConfig{cfg_.pff_layers, cfg_.pff_heads, cfg_.pff_model_dim,
                cfg_.pff_ffn_dim, cfg_.pff_dropout},
      cfg_.pure.dim, cfg_.multimodal.dim, rng);

  ExplainConfig ec;
  ec.variant = explain_variant_from_string(cfg_.explain_variant);
  ec.heads = cfg_.explain_heads;
  ec.dim = cfg_.pure.dim;
  ec.ffn_dim = 4 * cfg_.pure.dim;
  explain_ = std::make_unique<ExplainFormer>(params_, ec, rng);

  heads_ = std::make_unique<ClassifierHeads>(params_, cfg_.pure.dim,
                                             vocab_.actions.size(),
                                             vocab_.objects.size(), rng);

  aff_cfg_ = aff::AffordanceConfig{{cfg_.beta, cfg_.eps_norm},
                                   cfg_.prompt_style, cfg_.caption_template};
  weights_ = loss::LossWeights{cfg_.w_cos,      cfg_.w_con, cfg_.w_ce_action,
                               cfg_.w_ce_object, cfg_.alpha, cfg_.loss_eps,
                               cfg_.tau};
  weights_.validate();
}

const SeaModel::EncodedPair& SeaModel::encode_cached(const std::string& key,
                                                     const Image& img,
                                                     enc::Domain domain) const {
  if (!key.empty()) {
    auto it = feature_cache_.find(key);
    if (it != feature_cache_.end()) return it->second;
  }
  EncodedPair pair{encoders_.pure->encode(img, domain),
                   encoders_.multimodal->encode(img, domain)};
  if (key.empty()) {
    static thread_local EncodedPair scratch;
    scratch = std::move(pair);
    return scratch;
  }
  return feature_cache_.emplace(key, std::move(pair)).first->second;
}

namespace {

int argmax_row(const Matrix& row) {
  int best = 0;
  for (Eigen::Index j = 1; j < row.cols(); ++j)
    if (row(0, j) > row(0, best)) best = static_cast<int>(j);
  return best;
}

std::vector<double> softmax_row(const Matrix& logits) {
  Eigen::ArrayXd z = logits.row(0).transpose().array();
  z -= z.maxCoeff();
  Eigen::ArrayXd e = z.exp();
  e /= e.sum();
  return {e.data(), e.data() + e.size()};
}

}  // namespace

BatchLossNodes SeaModel::build_batch_graph(Tape& t,
                                           const std::vector<TrainItem>& batch,
                                           Rng& aux_rng, bool training) {
  if (batch.empty()) throw InputError("build_batch_graph: empty batch");
  const int n = static_cast<int>(batch.size());
  const bool teacher_forcing = cfg_.prompt_labels == "gt";

  std::vector<Node*> action_logit_rows, object_logit_rows;
  std::vector<Node*> ego_embeddings, exo_embeddings, cos_losses;
  std::vector<int> action_labels, object_labels;
  Matrix text_rows(n, cfg_.multimodal.dim);

  for (int i = 0; i < n; ++i) {
    const TrainItem& item = batch[static_cast<std::size_t>(i)];
    if (!item.sample) throw InputError("train item has no sample");
    if (item.exo.empty())
      throw InputError("training requires at least one exocentric image: " +
                       item.sample->id);

    const EncodedPair& ego_enc =
        encode_cached(item.ego_key, item.ego, enc::Domain::ego);
    const int grid_h = ego_enc.pure.h, grid_w = ego_enc.pure.w;
    const int img_h = ego_enc.pure.img_h, img_w = ego_enc.pure.img_w;
    const int factor = img_h / grid_h;

    // Fusion former over all four stream kinds; one parameter set.
    Node* ego_pure = pff_->fuse(t, t.constant(ego_enc.pure.tokens),
                                enc::Family::pure_visual, &aux_rng, training);
    Node* ego_mm = pff_->fuse(t, t.constant(ego_enc.mm.tokens),
                              enc::Family::multimodal_visual, &aux_rng,
                              training);
    std::vector<Node*> exo_pure_maps, exo_mm_maps;
    for (std::size_t j = 0; j < item.exo.size(); ++j) {
      const std::string key =
          j < item.exo_keys.size() ? item.exo_keys[j] : std::string();
      const EncodedPair& exo_enc =
          encode_cached(key, item.exo[j], enc::Domain::exo);
      exo_pure_maps.push_back(pff_->fuse(t, t.constant(exo_enc.pure.tokens),
                                         enc::Family::pure_visual, &aux_rng,
                                         training));
      exo_mm_maps.push_back(pff_->fuse(t, t.constant(exo_enc.mm.tokens),
                                       enc::Family::multimodal_visual,
                                       &aux_rng, training));
    }

    // Self-explain former + heads on the pure stream.
    Node* exo_tokens = nn::concat_rows(t, exo_pure_maps);
    Node* f_cls = explain_->forward(t, exo_tokens, ego_pure);
    auto [a_logits, o_logits] = (*heads_)(t, f_cls);
    action_logit_rows.push_back(a_logits);
    object_logit_rows.push_back(o_logits);
    action_labels.push_back(item.sample->action_id);
    object_labels.push_back(item.sample->object_id);

    // Prompt: ground-truth labels under teacher forcing, else the current
    // top-1 prediction.
    const std::string action_label =
        teacher_forcing ? vocab_.actions.label(item.sample->action_id)
                        : vocab_.actions.label(argmax_row(a_logits->value));
    const std::string object_label =
        teacher_forcing ? vocab_.objects.label(item.sample->object_id)
                        : vocab_.objects.label(argmax_row(o_logits->value));
    const enc::TextEmbedding text = encoders_.text->encode(
        aff::build_prompt(action_label, object_label, aff_cfg_));
    text_rows.row(i) = text.vec;

    // VL affordance heatmaps and pooled embeddings, ego branch.
    auto pooled = [&](Node* mm_tokens) {
      Node* raw = aff::similarity_grid(t, mm_tokens, text.vec, grid_h, grid_w,
                                       img_h, img_w);
      Node* final_map = aff::normalize_and_filter(t, raw, aff_cfg_.threshold);
      Node* weights = nn::block_mean_downsample(t, final_map, factor);
      Node* wcol = nn::reshape(t, weights, grid_h * grid_w, 1);
      return nn::rows_weighted_mean(t, mm_tokens, wcol);
    };
    Node* e_ego = pooled(ego_mm);
    Node* exo_sum = nullptr;
    for (Node* mm : exo_mm_maps) {
      Node* e = pooled(mm);
      exo_sum = exo_sum ? nn::add(t, exo_sum, e) : e;
    }
    Node* e_exo =
        nn::scale(t, exo_sum, 1.0 / static_cast<double>(exo_mm_maps.size()));
    ego_embeddings.push_back(e_ego);
    exo_embeddings.push_back(e_exo);

    // Cosine-margin alignment across domains.
    Node* c = nn::cosine_pair(t, e_exo, e_ego);
    cos_losses.push_back(
        nn::relu(t, nn::affine(t, c, -1.0, 1.0 - weights_.alpha)));
  }

  // Mean cosine loss over the batch.
  Node* cos_sum = cos_losses.front();
  for (std::size_t i = 1; i < cos_losses.size(); ++i)
    cos_sum = nn::add(t, cos_sum, cos_losses[i]);
  Node* l_cos = nn::scale(t, cos_sum, 1.0 / n);

  // Classification cross-entropies.
  Node* l_ce_a = nn::cross_entropy_mean(t, nn::concat_rows(t, action_logit_rows),
                                        action_labels);
  Node* l_ce_o = nn::cross_entropy_mean(t, nn::concat_rows(t, object_logit_rows),
                                        object_labels);

  // Vision-language contrastive loss; matched entries are every pair that
  // shares the same (action, object), so duplicate captions in a batch are
  // not treated as negatives.
  Matrix q = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      q(i, j) = (action_labels[static_cast<std::size_t>(i)] ==
                     action_labels[static_cast<std::size_t>(j)] &&
                 object_labels[static_cast<std::size_t>(i)] ==
                     object_labels[static_cast<std::size_t>(j)])
                    ? 1.0
                    : 0.0;
  auto contrastive_of = [&](const std::vector<Node*>& embs) {
    Node* v = nn::concat_rows(t, embs);
    Node* cosm = nn::cosine_matrix_const(t, v, text_rows);
    Node* p = nn::row_softmax(t, nn::scale(t, cosm, 1.0 / weights_.tau));
    return nn::kl_match_mean(t, p, q, weights_.eps);
  };
  Node* l_con = contrastive_of(ego_embeddings);
  if (cfg_.include_exo_contrastive)
    l_con = nn::scale(
        t, nn::add(t, l_con, contrastive_of(exo_embeddings)), 0.5);

  Node* total = nn::scale(t, l_cos, weights_.cos);
  total = nn::add(t, total, nn::scale(t, l_con, weights_.con));
  total = nn::add(t, total, nn::scale(t, l_ce_a, weights_.ce_action));
  total = nn::add(t, total, nn::scale(t, l_ce_o, weights_.ce_object));
  return BatchLossNodes{total, l_cos, l_con, l_ce_a, l_ce_o};
}

PredictionBundle SeaModel::predict(const Image& ego,
                                   const std::vector<Image>& exo) const {
  enc::FeatureMap ego_pure = encoders_.pure->encode(ego, enc::Domain::ego);
  enc::FeatureMap ego_mm = encoders_.multimodal->encode(ego, enc::Domain::ego);
  enc::FeatureMap ego_pure_fused = pff_->fuse(ego_pure);
  enc::FeatureMap ego_mm_fused = pff_->fuse(ego_mm);

  std::vector<enc::FeatureMap> exo_pure_fused;
  std::optional<enc::FeatureMap> first_exo_mm_fused;
  for (std::size_t j = 0; j < exo.size(); ++j) {
    exo_pure_fused.push_back(
        pff_->fuse(encoders_.pure->encode(exo[j], enc::Domain::exo)));
    if (j == 0)
      first_exo_mm_fused =
          pff_->fuse(encoders_.multimodal->encode(exo[j], enc::Domain::exo));
  }

  Tape t;
  Node* ego_tokens = t.constant(ego_pure_fused.tokens);
  Node* exo_tokens = nullptr;
  if (!exo_pure_fused.empty()) {
    std::vector<Node*> parts;
    for (const auto& fm : exo_pure_fused) parts.push_back(t.constant(fm.tokens));
    exo_tokens = nn::concat_rows(t, parts);
  }
  Node* f_cls = explain_->forward(t, exo_tokens, ego_tokens);
  auto [a_logits, o_logits] = (*heads_)(t, f_cls);

  PredictionBundle out;
  out.action_probs = softmax_row(a_logits->value);
  out.object_probs = softmax_row(o_logits->value);
  out.action_ranking = met::ranking_from_probs(out.action_probs);
  out.object_ranking = met::ranking_from_probs(out.object_probs);
  out.action = vocab_.actions.label(out.action_ranking.front());
  out.object = vocab_.objects.label(out.object_ranking.front());
  out.caption = render_caption(out.action, out.object, cfg_.caption_template);

  const aff::LocalizeResult loc = aff::localize(
      out.action, out.object, *encoders_.text, ego_mm_fused,
      first_exo_mm_fused ? &*first_exo_mm_fused : nullptr, aff_cfg_);
  out.heatmap = loc.ego.grid;
  if (loc.exo) out.exo_heatmap = loc.exo->grid;
  return out;
}

met::MetricReport evaluate_model(const SeaModel& model,
                                 const std::vector<data::Sample>& samples,
                                 const met::HeatmapMetricConfig& cfg) {
  return met::evaluate_split(
      samples,
      [&](const data::Sample& s) {
        PredictionBundle b = model.predict(s.load_ego());
        return met::SamplePrediction{
            std::move(b.heatmap),
            met::RankedPrediction{std::move(b.action_ranking),
                                  std::move(b.object_ranking)}};
      },
      model.vocab(), cfg);
}

}  // namespace sea::model
