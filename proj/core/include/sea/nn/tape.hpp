#pragma once

#include <functional>
#include <memory>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sea/nn/param.hpp"
#include "sea/rng.hpp"

namespace sea::nn {

// Reverse-mode autodiff over Eigen matrices. One Tape per forward pass;
// nodes are created in topological order, backward() walks them in reverse.
struct Node {
  Matrix value;
  Matrix grad;  // allocated lazily on first accumulation
  bool requires_grad = false;
  std::function<void()> backward;  // accumulates into parents

  void add_grad(const Matrix& g) {
    if (grad.size() == 0) grad = Matrix::Zero(value.rows(), value.cols());
    grad += g;
  }
  Matrix& grad_ref() {
    if (grad.size() == 0) grad = Matrix::Zero(value.rows(), value.cols());
    return grad;
  }
};

class Tape {
 public:
  Node* constant(Matrix v);
  // One node per Param per tape: reuse makes shared-parameter gradients
  // accumulate naturally (the PFF relies on this).
  Node* param(const ParamPtr& p);
  Node* make(Matrix v, bool requires_grad, std::function<void()> back = {});

  // Root must be 1x1. May be called once per tape.
  void backward(Node* root);

  const std::vector<std::pair<ParamPtr, Node*>>& param_nodes() const {
    return param_nodes_;
  }
  std::size_t size() const { return nodes_.size(); }

 private:
  std::vector<std::unique_ptr<Node>> nodes_;
  std::vector<std::pair<ParamPtr, Node*>> param_nodes_;
  std::unordered_map<const Param*, Node*> param_map_;
  bool ran_backward_ = false;
};

// ---------------------------------------------------------------------------
// Ops. All return a node owned by the tape.
// ---------------------------------------------------------------------------

Node* add(Tape& t, Node* a, Node* b);
Node* sub(Tape& t, Node* a, Node* b);
Node* hadamard(Tape& t, Node* a, Node* b);
Node* scale(Tape& t, Node* a, double c);
// y = c0 * x + c1 elementwise.
Node* affine(Tape& t, Node* a, double c0, double c1);
Node* matmul(Tape& t, Node* a, Node* b);     // A * B
Node* matmul_nt(Tape& t, Node* a, Node* b);  // A * B^T
Node* relu(Tape& t, Node* a);
Node* gelu(Tape& t, Node* a);  // tanh approximation

Node* slice_rows(Tape& t, Node* a, int r0, int n);
Node* slice_cols(Tape& t, Node* a, int c0, int n);
Node* concat_rows(Tape& t, const std::vector<Node*>& parts);
Node* concat_cols(Tape& t, const std::vector<Node*>& parts);
// Row-major reshape to (rows, cols); element count must match.
Node* reshape(Tape& t, Node* a, int rows, int cols);

Node* add_row_broadcast(Tape& t, Node* x, Node* bias);  // bias is 1 x D
Node* row_softmax(Tape& t, Node* a);
Node* layer_norm(Tape& t, Node* x, Node* gain, Node* bias, double eps = 1e-5);
Node* mean_rows(Tape& t, Node* a);  // N x D -> 1 x D
Node* sum_all(Tape& t, Node* a);    // -> 1 x 1
Node* scale_by_gate(Tape& t, Node* x, Node* gate);  // gate is 1 x 1

// cos(a, b) for two row vectors; zero-norm inputs give 0 with zero gradient.
Node* cosine_pair(Tape& t, Node* a, Node* b);
// Per-row cosine against a constant row vector: N x d -> N x 1.
Node* cosine_rows_const(Tape& t, Node* feats, const Matrix& text);
// cos(v_i, t_j) for all pairs: (n x d, n x d const) -> n x n.
Node* cosine_matrix_const(Tape& t, Node* v, const Matrix& texts);

// Mean over rows of -log softmax(logits)[label]: N x V -> 1 x 1.
Node* cross_entropy_mean(Tape& t, Node* logits, const std::vector<int>& labels);
// Mean over rows of sum_j p_ij * log(p_ij / (q_ij + eps)): n x n -> 1 x 1.
Node* kl_match_mean(Tape& t, Node* p, const Matrix& q, double eps);

// Min-max normalize over all entries with +eps in the denominator, then zero
// values below beta. A constant input comes out all-zero.
Node* minmax_filter(Tape& t, Node* m, double beta, double eps);
Node* bilinear_upsample(Tape& t, Node* m, int out_h, int out_w);
Node* block_mean_downsample(Tape& t, Node* m, int factor);
// (1/N) * sum_i w_i * f_i for f: N x d, w: N x 1 -> 1 x d.
Node* rows_weighted_mean(Tape& t, Node* feats, Node* weights);

// Inverted dropout; identity when p == 0 or !training.
Node* dropout(Tape& t, Node* a, double p, Rng& rng, bool training);

}  // namespace sea::nn
