#pragma once

#include <utility>
#include <vector>

#include "sea/nn/param.hpp"
#include "sea/nn/tape.hpp"

namespace sea::nn {

struct SgdConfig {
  double lr = 1e-3;
  double weight_decay = 5e-4;
  double momentum = 0.9;
  double grad_clip = 0.0;  // global-norm clip; 0 disables
};

// Classic SGD: g <- grad + wd * w; v <- mu * v + g; w <- w - lr * v.
class SgdOptimizer {
 public:
  explicit SgdOptimizer(SgdConfig cfg) : cfg_(cfg) {}

  void step(const std::vector<std::pair<ParamPtr, Node*>>& grads) const {
    double scale = 1.0;
    if (cfg_.grad_clip > 0.0) {
      double sq = 0.0;
      for (const auto& [p, n] : grads)
        if (n->grad.size() != 0) sq += n->grad.squaredNorm();
      const double norm = std::sqrt(sq);
      if (norm > cfg_.grad_clip) scale = cfg_.grad_clip / norm;
    }
    for (const auto& [p, n] : grads) {
      Matrix g = n->grad.size() == 0
                     ? Matrix::Zero(p->value.rows(), p->value.cols())
                     : Matrix(n->grad * scale);
      g += cfg_.weight_decay * p->value;
      p->velocity = cfg_.momentum * p->velocity + g;
      p->value -= cfg_.lr * p->velocity;
    }
  }

  void set_lr(double lr) { cfg_.lr = lr; }
  const SgdConfig& config() const { return cfg_; }

 private:
  SgdConfig cfg_;
};

}  // namespace sea::nn
