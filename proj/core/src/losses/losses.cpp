#include "sea/losses/losses.hpp"

#include <cmath>

#include "sea/errors.hpp"

namespace sea::loss {

namespace {
constexpr double kTinyNorm = 1e-30;
}

void LossWeights::validate() const {
  if (cos < 0 || con < 0 || ce_action < 0 || ce_object < 0)
    throw ConfigError("loss weights must be non-negative");
  if (cos + con + ce_action + ce_object <= 0.0)
    throw ConfigError("at least one loss weight must be positive");
  if (alpha < 0.0 || alpha > 1.0) throw ConfigError("alpha must be in [0,1]");
  if (eps <= 0.0) throw ConfigError("eps must be positive");
  if (tau <= 0.0) throw ConfigError("tau must be positive");
}

RowVector pooled_embedding(const enc::FeatureMap& feats, const Matrix& heatmap) {
  Matrix weights;
  if (heatmap.rows() == feats.h && heatmap.cols() == feats.w) {
    weights = heatmap;
  } else if (feats.h > 0 && heatmap.rows() % feats.h == 0 &&
             heatmap.cols() % feats.w == 0 &&
             heatmap.rows() / feats.h == heatmap.cols() / feats.w) {
    const Eigen::Index f = heatmap.rows() / feats.h;
    weights = Matrix(feats.h, feats.w);
    for (int i = 0; i < feats.h; ++i)
      for (int j = 0; j < feats.w; ++j)
        weights(i, j) =
            heatmap.block(i * f, j * f, f, f).mean();
  } else {
    throw ShapeError("pooled_embedding: heatmap " +
                     std::to_string(heatmap.rows()) + "x" +
                     std::to_string(heatmap.cols()) +
                     " does not reduce to feature grid " +
                     std::to_string(feats.h) + "x" + std::to_string(feats.w));
  }
  RowVector e = RowVector::Zero(feats.tokens.cols());
  for (int i = 0; i < feats.h; ++i)
    for (int j = 0; j < feats.w; ++j)
      e += weights(i, j) * feats.tokens.row(i * feats.w + j);
  return e / static_cast<double>(feats.count());
}

double cosine_margin_loss(const RowVector& e_exo, const RowVector& e_ego,
                          double alpha) {
  const double n1 = e_exo.norm(), n2 = e_ego.norm();
  const double c =
      (n1 < kTinyNorm || n2 < kTinyNorm) ? 0.0 : e_exo.dot(e_ego) / (n1 * n2);
  return std::max(0.0, 1.0 - alpha - c);
}

Matrix batch_similarity(const Matrix& visual, const Matrix& text, double tau) {
  if (visual.rows() < 1) throw InputError("batch_similarity: empty batch");
  if (visual.rows() != text.rows() || visual.cols() != text.cols())
    throw ShapeError("batch_similarity: embedding shapes differ");
  const Eigen::Index n = visual.rows();
  Matrix p(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double nv = visual.row(i).norm();
    Eigen::ArrayXd row(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double nt = text.row(j).norm();
      const double c = (nv < kTinyNorm || nt < kTinyNorm)
                           ? 0.0
                           : visual.row(i).dot(text.row(j)) / (nv * nt);
      row(j) = c / tau;
    }
    row -= row.maxCoeff();
    Eigen::ArrayXd e = row.exp();
    p.row(i) = (e / e.sum()).matrix().transpose();
  }
  return p;
}

double contrastive_loss(const Matrix& p, const Matrix& q, double eps) {
  if (p.rows() != q.rows() || p.cols() != q.cols())
    throw ShapeError("contrastive_loss: P and Q shapes differ");
  if (p.rows() < 1) throw InputError("contrastive_loss: empty batch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      const double pij = std::max(p(i, j), 1e-300);
      total += pij * std::log(pij / (q(i, j) + eps));
    }
  return total / static_cast<double>(p.rows());
}

double classification_loss(const RowVector& logits, int label) {
  if (label < 0 || label >= logits.cols())
    throw Error("classification_loss: label " + std::to_string(label) +
                " out of range for " + std::to_string(logits.cols()) +
                " classes");
  Eigen::ArrayXd z = logits.transpose().array();
  const double m = z.maxCoeff();
  const double lse = m + std::log((z - m).exp().sum());
  return lse - logits(label);
}

double total_loss(const LossComponents& c, const LossWeights& w) {
  w.validate();
  const double parts[] = {c.cos, c.con, c.ce_action, c.ce_object};
  for (double v : parts)
    if (!std::isfinite(v))
      throw Error("total_loss: non-finite loss component");
  return w.cos * c.cos + w.con * c.con + w.ce_action * c.ce_action +
         w.ce_object * c.ce_object;
}

}  // namespace sea::loss
