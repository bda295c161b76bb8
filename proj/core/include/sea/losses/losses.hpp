#pragma once

#include <Eigen/Dense>

#include "sea/encoders/encoder.hpp"

namespace sea::loss {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

struct LossWeights {
  double cos = 1.0;
  double con = 1.0;
  double ce_action = 1.0;
  double ce_object = 1.0;
  double alpha = 0.1;  // cosine-margin slack
  double eps = 1e-8;   // contrastive numerical floor
  double tau = 0.07;   // similarity temperature
  void validate() const;  // throws ConfigError
};

// Heatmap-weighted mean of the feature grid: e = mean_ij(h[i,j] * f[i,j]).
// The heatmap may be at the feature grid's resolution or an integer multiple
// of it (it is then area-averaged down).
RowVector pooled_embedding(const enc::FeatureMap& feats, const Matrix& heatmap);

// max(0, 1 - alpha - cos(e_exo, e_ego)); zero-norm embeddings score cosine 0.
double cosine_margin_loss(const RowVector& e_exo, const RowVector& e_ego,
                          double alpha);

// p_ij = softmax_j(cos(v_i, t_j) / tau); rows sum to 1.
Matrix batch_similarity(const Matrix& visual, const Matrix& text, double tau);

// (1/n) sum_i sum_j p_ij log(p_ij / (q_ij + eps)) with binary Q.
double contrastive_loss(const Matrix& p, const Matrix& q, double eps);

// Negative log-softmax at the label index.
double classification_loss(const RowVector& logits, int label);

struct LossComponents {
  double cos = 0.0;
  double con = 0.0;
  double ce_action = 0.0;
  double ce_object = 0.0;
};

double total_loss(const LossComponents& c, const LossWeights& w);

}  // namespace sea::loss
