#pragma once

#include <string>

#include "sea/nn/tape.hpp"

namespace sea::nn {

// y = x * W^T + b for x: N x in. W rows are output units.
struct LinearLayer {
  ParamPtr W;  // out x in
  ParamPtr b;  // 1 x out
  static LinearLayer create(ParamStore& store, const std::string& name, int in,
                            int out, Rng& rng);
  static LinearLayer create_zero(ParamStore& store, const std::string& name,
                                 int in, int out);
  Node* operator()(Tape& t, Node* x) const;
  int in_dim() const { return static_cast<int>(W->value.cols()); }
  int out_dim() const { return static_cast<int>(W->value.rows()); }
};

struct LayerNormLayer {
  ParamPtr gain;  // 1 x d, ones
  ParamPtr bias;  // 1 x d, zeros
  double eps = 1e-5;
  static LayerNormLayer create(ParamStore& store, const std::string& name,
                               int d);
  Node* operator()(Tape& t, Node* x) const;
};

// Multi-head attention. Query and key/value inputs may differ (cross
// attention); all projections are d -> d with d divisible by heads.
// uniform_init zeroes the query projection, which makes step-0 attention an
// exact mean over the value tokens; the weights stay fully trainable.
struct AttentionLayer {
  LinearLayer q, k, v, o;
  int heads = 1;
  static AttentionLayer create(ParamStore& store, const std::string& name,
                               int d, int heads, Rng& rng,
                               bool uniform_init = false);
  Node* operator()(Tape& t, Node* query_in, Node* kv_in) const;
};

struct FeedForwardLayer {
  LinearLayer fc1, fc2;
  static FeedForwardLayer create(ParamStore& store, const std::string& name,
                                 int d, int hidden, Rng& rng);
  Node* operator()(Tape& t, Node* x) const;
};

// Pre-norm block with learned scalar residual gates. With gate_init == 0 a
// fresh block is the identity map (the fusion former relies on this); with
// gate_init == 1 it behaves like a standard residual block from step 0.
struct TransformerBlock {
  LayerNormLayer ln_att, ln_ffn;
  AttentionLayer att;
  FeedForwardLayer ffn;
  ParamPtr gate_att, gate_ffn;  // 1x1
  double dropout_p = 0.0;

  static TransformerBlock create(ParamStore& store, const std::string& name,
                                 int d, int heads, int ffn_hidden, double dropout,
                                 Rng& rng, double gate_init = 0.0,
                                 bool uniform_attention_init = false);
  // Self-attention over x's rows.
  Node* operator()(Tape& t, Node* x, Rng* drop_rng = nullptr,
                   bool training = false) const;
  // Cross attention: residual path follows the query tokens.
  Node* cross(Tape& t, Node* q_tokens, Node* kv_tokens, Rng* drop_rng = nullptr,
              bool training = false) const;
};

}  // namespace sea::nn
