#include "sea/nn/layers.hpp"

#include <cmath>

#include "sea/errors.hpp"

namespace sea::nn {

static Matrix normal_matrix(int rows, int cols, double stddev, Rng& rng) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal() * stddev;
  return m;
}

LinearLayer LinearLayer::create(ParamStore& store, const std::string& name,
                                int in, int out, Rng& rng) {
  LinearLayer l;
  l.W = store.create(name + ".w",
                     normal_matrix(out, in, 1.0 / std::sqrt(in), rng));
  l.b = store.create(name + ".b", Matrix::Zero(1, out));
  return l;
}

LinearLayer LinearLayer::create_zero(ParamStore& store, const std::string& name,
                                     int in, int out) {
  LinearLayer l;
  l.W = store.create(name + ".w", Matrix::Zero(out, in));
  l.b = store.create(name + ".b", Matrix::Zero(1, out));
  return l;
}

Node* LinearLayer::operator()(Tape& t, Node* x) const {
  if (x->value.cols() != W->value.cols())
    throw ShapeError("linear '" + W->name + "': input dim " +
                     std::to_string(x->value.cols()) + " != " +
                     std::to_string(W->value.cols()));
  return add_row_broadcast(t, matmul_nt(t, x, t.param(W)), t.param(b));
}

LayerNormLayer LayerNormLayer::create(ParamStore& store,
                                      const std::string& name, int d) {
  LayerNormLayer l;
  l.gain = store.create(name + ".gain", Matrix::Ones(1, d));
  l.bias = store.create(name + ".bias", Matrix::Zero(1, d));
  return l;
}

Node* LayerNormLayer::operator()(Tape& t, Node* x) const {
  return layer_norm(t, x, t.param(gain), t.param(bias), eps);
}

AttentionLayer AttentionLayer::create(ParamStore& store,
                                      const std::string& name, int d,
                                      int heads, Rng& rng, bool uniform_init) {
  if (heads <= 0 || d % heads != 0)
    throw ConfigError("attention '" + name + "': dim " + std::to_string(d) +
                      " not divisible by heads " + std::to_string(heads));
  AttentionLayer a;
  a.q = uniform_init ? LinearLayer::create_zero(store, name + ".q", d, d)
                     : LinearLayer::create(store, name + ".q", d, d, rng);
  a.k = LinearLayer::create(store, name + ".k", d, d, rng);
  a.v = LinearLayer::create(store, name + ".v", d, d, rng);
  a.o = LinearLayer::create(store, name + ".o", d, d, rng);
  a.heads = heads;
  return a;
}

Node* AttentionLayer::operator()(Tape& t, Node* query_in, Node* kv_in) const {
  const int d = q.out_dim();
  const int dh = d / heads;
  Node* Q = q(t, query_in);
  Node* K = k(t, kv_in);
  Node* V = v(t, kv_in);
  std::vector<Node*> head_outs;
  head_outs.reserve(static_cast<std::size_t>(heads));
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  for (int h = 0; h < heads; ++h) {
    Node* Qh = slice_cols(t, Q, h * dh, dh);
    Node* Kh = slice_cols(t, K, h * dh, dh);
    Node* Vh = slice_cols(t, V, h * dh, dh);
    Node* scores = scale(t, matmul_nt(t, Qh, Kh), inv_sqrt);
    Node* attn = row_softmax(t, scores);
    head_outs.push_back(matmul(t, attn, Vh));
  }
  return o(t, concat_cols(t, head_outs));
}

FeedForwardLayer FeedForwardLayer::create(ParamStore& store,
                                          const std::string& name, int d,
                                          int hidden, Rng& rng) {
  FeedForwardLayer f;
  f.fc1 = LinearLayer::create(store, name + ".fc1", d, hidden, rng);
  f.fc2 = LinearLayer::create(store, name + ".fc2", hidden, d, rng);
  return f;
}

Node* FeedForwardLayer::operator()(Tape& t, Node* x) const {
  return fc2(t, gelu(t, fc1(t, x)));
}

TransformerBlock TransformerBlock::create(ParamStore& store,
                                          const std::string& name, int d,
                                          int heads, int ffn_hidden,
                                          double dropout, Rng& rng,
                                          double gate_init,
                                          bool uniform_attention_init) {
  TransformerBlock b;
  b.ln_att = LayerNormLayer::create(store, name + ".ln_att", d);
  b.ln_ffn = LayerNormLayer::create(store, name + ".ln_ffn", d);
  b.att = AttentionLayer::create(store, name + ".att", d, heads, rng,
                                 uniform_attention_init);
  b.ffn = FeedForwardLayer::create(store, name + ".ffn", d, ffn_hidden, rng);
  b.gate_att = store.create(name + ".gate_att",
                            Matrix::Constant(1, 1, gate_init));
  b.gate_ffn = store.create(name + ".gate_ffn",
                            Matrix::Constant(1, 1, gate_init));
  b.dropout_p = dropout;
  return b;
}

Node* TransformerBlock::operator()(Tape& t, Node* x, Rng* drop_rng,
                                   bool training) const {
  return cross(t, x, x, drop_rng, training);
}

Node* TransformerBlock::cross(Tape& t, Node* q_tokens, Node* kv_tokens,
                              Rng* drop_rng, bool training) const {
  const bool drop = training && drop_rng && dropout_p > 0.0;
  Node* qn = ln_att(t, q_tokens);
  Node* kvn = q_tokens == kv_tokens ? qn : ln_att(t, kv_tokens);
  Node* a = att(t, qn, kvn);
  if (drop) a = dropout(t, a, dropout_p, *drop_rng, true);
  Node* x1 = add(t, q_tokens, scale_by_gate(t, a, t.param(gate_att)));
  Node* f = ffn(t, ln_ffn(t, x1));
  if (drop) f = dropout(t, f, dropout_p, *drop_rng, true);
  return add(t, x1, scale_by_gate(t, f, t.param(gate_ffn)));
}

}  // namespace sea::nn
