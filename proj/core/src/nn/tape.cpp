#include "sea/nn/tape.hpp"

#include <algorithm>
#include <cmath>

#include "sea/errors.hpp"
#include "sea/image.hpp"

namespace sea::nn {

namespace {
constexpr double kTinyNorm = 1e-30;
}

Node* Tape::constant(Matrix v) { return make(std::move(v), false); }

Node* Tape::param(const ParamPtr& p) {
  auto it = param_map_.find(p.get());
  if (it != param_map_.end()) return it->second;
  Node* n = make(p->value, true);
  param_map_[p.get()] = n;
  param_nodes_.emplace_back(p, n);
  return n;
}

Node* Tape::make(Matrix v, bool requires_grad, std::function<void()> back) {
  auto node = std::make_unique<Node>();
  node->value = std::move(v);
  node->requires_grad = requires_grad;
  node->backward = std::move(back);
  nodes_.push_back(std::move(node));
  return nodes_.back().get();
}

void Tape::backward(Node* root) {
  if (ran_backward_) throw Error("Tape::backward called twice");
  ran_backward_ = true;
  if (root->value.rows() != 1 || root->value.cols() != 1)
    throw ShapeError("backward root must be 1x1");
  if (!root->requires_grad) return;
  root->add_grad(Matrix::Ones(1, 1));
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    Node* n = it->get();
    if (!n->requires_grad || !n->backward) continue;
    if (n->grad.size() == 0) continue;  // not on the path to the root
    n->backward();
  }
}

// ---------------------------------------------------------------------------

static bool any_grad(std::initializer_list<Node*> ns) {
  for (Node* n : ns)
    if (n && n->requires_grad) return true;
  return false;
}

Node* add(Tape& t, Node* a, Node* b) {
  if (a->value.rows() != b->value.rows() || a->value.cols() != b->value.cols())
    throw ShapeError("add: shape mismatch");
  Node* out = t.make(a->value + b->value, any_grad({a, b}));
  if (out->requires_grad)
    out->backward = [out, a, b] {
      if (a->requires_grad) a->add_grad(out->grad);
      if (b->requires_grad) b->add_grad(out->grad);
    };
  return out;
}

Node* sub(Tape& t, Node* a, Node* b) {
  if (a->value.rows() != b->value.rows() || a->value.cols() != b->value.cols())
    throw ShapeError("sub: shape mismatch");
  Node* out = t.make(a->value - b->value, any_grad({a, b}));
  if (out->requires_grad)
    out->backward = [out, a, b] {
      if (a->requires_grad) a->add_grad(out->grad);
      if (b->requires_grad) b->add_grad(-out->grad);
    };
  return out;
}

Node* hadamard(Tape& t, Node* a, Node* b) {
  if (a->value.rows() != b->value.rows() || a->value.cols() != b->value.cols())
    throw ShapeError("hadamard: shape mismatch");
  Node* out =
      t.make(a->value.cwiseProduct(b->value), any_grad({a, b}));
  if (out->requires_grad)
    out->backward = [out, a, b] {
      if (a->requires_grad) a->add_grad(out->grad.cwiseProduct(b->value));
      if (b->requires_grad) b->add_grad(out->grad.cwiseProduct(a->value));
    };
  return out;
}

Node* scale(Tape& t, Node* a, double c) { return affine(t, a, c, 0.0); }

Node* affine(Tape& t, Node* a, double c0, double c1) {
  Node* out = t.make((a->value.array() * c0 + c1).matrix(), a->requires_grad);
  if (out->requires_grad)
    out->backward = [out, a, c0] { a->add_grad(c0 * out->grad); };
  return out;
}

Node* matmul(Tape& t, Node* a, Node* b) {
  if (a->value.cols() != b->value.rows()) throw ShapeError("matmul: inner dims");
  Node* out = t.make(a->value * b->value, any_grad({a, b}));
  if (out->requires_grad)
    out->backward = [out, a, b] {
      if (a->requires_grad) a->add_grad(out->grad * b->value.transpose());
      if (b->requires_grad) b->add_grad(a->value.transpose() * out->grad);
    };
  return out;
}

Node* matmul_nt(Tape& t, Node* a, Node* b) {
  if (a->value.cols() != b->value.cols())
    throw ShapeError("matmul_nt: inner dims");
  Node* out = t.make(a->value * b->value.transpose(), any_grad({a, b}));
  if (out->requires_grad)
    out->backward = [out, a, b] {
      if (a->requires_grad) a->add_grad(out->grad * b->value);
      if (b->requires_grad) b->add_grad(out->grad.transpose() * a->value);
    };
  return out;
}

Node* relu(Tape& t, Node* a) {
  Node* out = t.make(a->value.cwiseMax(0.0), a->requires_grad);
  if (out->requires_grad)
    out->backward = [out, a] {
      a->add_grad(
          out->grad.cwiseProduct((a->value.array() > 0.0).cast<double>().matrix()));
    };
  return out;
}

Node* gelu(Tape& t, Node* a) {
  const double k = std::sqrt(2.0 / M_PI);
  Eigen::ArrayXXd x = a->value.array();
  Eigen::ArrayXXd u = k * (x + 0.044715 * x.cube());
  Eigen::ArrayXXd th = u.tanh();
  Node* out = t.make((0.5 * x * (1.0 + th)).matrix(), a->requires_grad);
  if (out->requires_grad)
    out->backward = [out, a, k] {
      Eigen::ArrayXXd x = a->value.array();
      Eigen::ArrayXXd u = k * (x + 0.044715 * x.cube());
      Eigen::ArrayXXd th = u.tanh();
      Eigen::ArrayXXd sech2 = 1.0 - th.square();
      Eigen::ArrayXXd du = k * (1.0 + 3.0 * 0.044715 * x.square());
      Eigen::ArrayXXd d = 0.5 * (1.0 + th) + 0.5 * x * sech2 * du;
      a->add_grad((out->grad.array() * d).matrix());
    };
  return out;
}

Node* slice_rows(Tape& t, Node* a, int r0, int n) {
  if (r0 < 0 || n <= 0 || r0 + n > a->value.rows())
    throw ShapeError("slice_rows: out of range");
  Node* out = t.make(a->value.middleRows(r0, n), a->requires_grad);
  if (out->requires_grad)
    out->backward = [out, a, r0, n] {
      a->grad_ref().middleRows(r0, n) += out->grad;
    };
  return out;
}

Node* slice_cols(Tape& t, Node* a, int c0, int n) {
  if (c0 < 0 || n <= 0 || c0 + n > a->value.cols())
    throw ShapeError("slice_cols: out of range");
  Node* out = t.make(a->value.middleCols(c0, n), a->requires_grad);
  if (out->requires_grad)
    out->backward = [out, a, c0, n] {
      a->grad_ref().middleCols(c0, n) += out->grad;
    };
  return out;
}

Node* concat_rows(Tape& t, const std::vector<Node*>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: empty");
  Eigen::Index cols = parts[0]->value.cols();
  Eigen::Index rows = 0;
  bool req = false;
  for (Node* p : parts) {
    if (p->value.cols() != cols) throw ShapeError("concat_rows: col mismatch");
    rows += p->value.rows();
    req = req || p->requires_grad;
  }
  Matrix v(rows, cols);
  Eigen::Index r = 0;
  for (Node* p : parts) {
    v.middleRows(r, p->value.rows()) = p->value;
    r += p->value.rows();
  }
  Node* out = t.make(std::move(v), req);
  if (req) {
    std::vector<Node*> ps = parts;
    out->backward = [out, ps] {
      Eigen::Index r = 0;
      for (Node* p : ps) {
        if (p->requires_grad)
          p->grad_ref() += out->grad.middleRows(r, p->value.rows());
        r += p->value.rows();
      }
    };
  }
  return out;
}

Node* concat_cols(Tape& t, const std::vector<Node*>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: empty");
  Eigen::Index rows = parts[0]->value.rows();
  Eigen::Index cols = 0;
  bool req = false;
  for (Node* p : parts) {
    if (p->value.rows() != rows) throw ShapeError("concat_cols: row mismatch");
    cols += p->value.cols();
    req = req || p->requires_grad;
  }
  Matrix v(rows, cols);
  Eigen::Index c = 0;
  for (Node* p : parts) {
    v.middleCols(c, p->value.cols()) = p->value;
    c += p->value.cols();
  }
  Node* out = t.make(std::move(v), req);
  if (req) {
    std::vector<Node*> ps = parts;
    out->backward = [out, ps] {
      Eigen::Index c = 0;
      for (Node* p : ps) {
        if (p->requires_grad)
          p->grad_ref() += out->grad.middleCols(c, p->value.cols());
        c += p->value.cols();
      }
    };
  }
  return out;
}

Node* reshape(Tape& t, Node* a, int rows, int cols) {
  if (a->value.size() != static_cast<Eigen::Index>(rows) * cols)
    throw ShapeError("reshape: element count mismatch");
  const int in_cols = static_cast<int>(a->value.cols());
  Matrix v(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const int k = i * cols + j;
      v(i, j) = a->value(k / in_cols, k % in_cols);
    }
  Node* out = t.make(std::move(v), a->requires_grad);
  if (out->requires_grad)
    out->backward = [out, a, rows, cols, in_cols] {
      Matrix& g = a->grad_ref();
      for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
          const int k = i * cols + j;
          g(k / in_cols, k % in_cols) += out->grad(i, j);
        }
    };
  return out;
}

Node* add_row_broadcast(Tape& t, Node* x, Node* bias) {
  if (bias->value.rows() != 1 || bias->value.cols() != x->value.cols())
    throw ShapeError("add_row_broadcast: bias must be 1 x cols(x)");
  Node* out = t.make(x->value.rowwise() + bias->value.row(0),
                     any_grad({x, bias}));
  if (out->requires_grad)
    out->backward = [out, x, bias] {
      if (x->requires_grad) x->add_grad(out->grad);
      if (bias->requires_grad) bias->add_grad(out->grad.colwise().sum());
    };
  return out;
}

Node* row_softmax(Tape& t, Node* a) {
  Matrix y(a->value.rows(), a->value.cols());
  for (Eigen::Index i = 0; i < a->value.rows(); ++i) {
    Eigen::ArrayXd row = a->value.row(i).array();
    row -= row.maxCoeff();
    Eigen::ArrayXd e = row.exp();
    y.row(i) = (e / e.sum()).matrix();
  }
  Node* out = t.make(std::move(y), a->requires_grad);
  if (out->requires_grad)
    out->backward = [out, a] {
      Matrix g(out->value.rows(), out->value.cols());
      for (Eigen::Index i = 0; i < out->value.rows(); ++i) {
        const double s = out->grad.row(i).dot(out->value.row(i));
        g.row(i) =
            out->value.row(i).cwiseProduct(out->grad.row(i) -
                                           Eigen::RowVectorXd::Constant(
                                               out->value.cols(), s));
      }
      a->add_grad(g);
    };
  return out;
}

Node* layer_norm(Tape& t, Node* x, Node* gain, Node* bias, double eps) {
  const Eigen::Index n = x->value.rows(), d = x->value.cols();
  if (gain->value.rows() != 1 || gain->value.cols() != d ||
      bias->value.rows() != 1 || bias->value.cols() != d)
    throw ShapeError("layer_norm: gain/bias must be 1 x cols(x)");
  Matrix xhat(n, d), y(n, d);
  Eigen::VectorXd inv_sigma(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu = x->value.row(i).mean();
    const double var =
        (x->value.row(i).array() - mu).square().sum() / static_cast<double>(d);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_sigma(i) = is;
    xhat.row(i) = (x->value.row(i).array() - mu).matrix() * is;
    y.row(i) = xhat.row(i).cwiseProduct(gain->value.row(0)) + bias->value.row(0);
  }
  Node* out = t.make(std::move(y), any_grad({x, gain, bias}));
  if (out->requires_grad)
    out->backward = [out, x, gain, bias, xhat, inv_sigma] {
      const Eigen::Index n = x->value.rows(), d = x->value.cols();
      if (gain->requires_grad) {
        Eigen::RowVectorXd dg = Eigen::RowVectorXd::Zero(d);
        for (Eigen::Index i = 0; i < n; ++i)
          dg += out->grad.row(i).cwiseProduct(xhat.row(i));
        gain->add_grad(dg);
      }
      if (bias->requires_grad) bias->add_grad(out->grad.colwise().sum());
      if (x->requires_grad) {
        Matrix dx(n, d);
        for (Eigen::Index i = 0; i < n; ++i) {
          Eigen::RowVectorXd h = out->grad.row(i).cwiseProduct(gain->value.row(0));
          const double mh = h.mean();
          const double mhx = h.cwiseProduct(xhat.row(i)).mean();
          dx.row(i) = (h.array() - mh - xhat.row(i).array() * mhx).matrix() *
                      inv_sigma(i);
        }
        x->add_grad(dx);
      }
    };
  return out;
}

Node* mean_rows(Tape& t, Node* a) {
  const double n = static_cast<double>(a->value.rows());
  Node* out = t.make(a->value.colwise().mean(), a->requires_grad);
  if (out->requires_grad)
    out->backward = [out, a, n] {
      a->add_grad(Eigen::VectorXd::Ones(a->value.rows()) * (out->grad / n));
    };
  return out;
}

Node* sum_all(Tape& t, Node* a) {
  Matrix v(1, 1);
  v(0, 0) = a->value.sum();
  Node* out = t.make(std::move(v), a->requires_grad);
  if (out->requires_grad)
    out->backward = [out, a] {
      a->add_grad(Matrix::Constant(a->value.rows(), a->value.cols(),
                                   out->grad(0, 0)));
    };
  return out;
}

Node* scale_by_gate(Tape& t, Node* x, Node* gate) {
  if (gate->value.rows() != 1 || gate->value.cols() != 1)
    throw ShapeError("scale_by_gate: gate must be 1x1");
  const double s = gate->value(0, 0);
  Node* out = t.make(x->value * s, any_grad({x, gate}));
  if (out->requires_grad)
    out->backward = [out, x, gate, s] {
      if (x->requires_grad) x->add_grad(out->grad * s);
      if (gate->requires_grad) {
        Matrix g(1, 1);
        g(0, 0) = out->grad.cwiseProduct(x->value).sum();
        gate->add_grad(g);
      }
    };
  return out;
}

Node* cosine_pair(Tape& t, Node* a, Node* b) {
  if (a->value.rows() != 1 || b->value.rows() != 1 ||
      a->value.cols() != b->value.cols())
    throw ShapeError("cosine_pair: expects matching row vectors");
  const double na = a->value.norm(), nb = b->value.norm();
  Matrix v(1, 1);
  const bool degenerate = na < kTinyNorm || nb < kTinyNorm;
  v(0, 0) = degenerate ? 0.0 : a->value.row(0).dot(b->value.row(0)) / (na * nb);
  Node* out = t.make(std::move(v), !degenerate && any_grad({a, b}));
  if (out->requires_grad) {
    const double c = out->value(0, 0);
    out->backward = [out, a, b, na, nb, c] {
      const double g = out->grad(0, 0);
      if (a->requires_grad)
        a->add_grad(g * (b->value / (na * nb) - c * a->value / (na * na)));
      if (b->requires_grad)
        b->add_grad(g * (a->value / (na * nb) - c * b->value / (nb * nb)));
    };
  }
  return out;
}

Node* cosine_rows_const(Tape& t, Node* feats, const Matrix& text) {
  if (text.rows() != 1 || text.cols() != feats->value.cols())
    throw ShapeError("cosine_rows_const: text must be 1 x cols(feats)");
  const Eigen::Index n = feats->value.rows();
  const double nt = text.norm();
  Matrix y(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double nf = feats->value.row(i).norm();
    y(i, 0) = (nt < kTinyNorm || nf < kTinyNorm)
                  ? 0.0
                  : feats->value.row(i).dot(text.row(0)) / (nf * nt);
  }
  Node* out = t.make(std::move(y), feats->requires_grad && nt >= kTinyNorm);
  if (out->requires_grad)
    out->backward = [out, feats, text, nt] {
      Matrix g = Matrix::Zero(feats->value.rows(), feats->value.cols());
      for (Eigen::Index i = 0; i < feats->value.rows(); ++i) {
        const double nf = feats->value.row(i).norm();
        if (nf < kTinyNorm) continue;
        const double c = out->value(i, 0);
        g.row(i) = out->grad(i, 0) * (text.row(0) / (nf * nt) -
                                      c * feats->value.row(i) / (nf * nf));
      }
      feats->add_grad(g);
    };
  return out;
}

Node* cosine_matrix_const(Tape& t, Node* v, const Matrix& texts) {
  if (texts.cols() != v->value.cols())
    throw ShapeError("cosine_matrix_const: dim mismatch");
  const Eigen::Index n = v->value.rows(), m = texts.rows();
  Matrix y(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double nv = v->value.row(i).norm();
    for (Eigen::Index j = 0; j < m; ++j) {
      const double nt = texts.row(j).norm();
      y(i, j) = (nv < kTinyNorm || nt < kTinyNorm)
                    ? 0.0
                    : v->value.row(i).dot(texts.row(j)) / (nv * nt);
    }
  }
  Node* out = t.make(std::move(y), v->requires_grad);
  if (out->requires_grad)
    out->backward = [out, v, texts] {
      Matrix g = Matrix::Zero(v->value.rows(), v->value.cols());
      for (Eigen::Index i = 0; i < v->value.rows(); ++i) {
        const double nv = v->value.row(i).norm();
        if (nv < kTinyNorm) continue;
        for (Eigen::Index j = 0; j < texts.rows(); ++j) {
          const double nt = texts.row(j).norm();
          if (nt < kTinyNorm) continue;
          const double c = out->value(i, j);
          g.row(i) += out->grad(i, j) * (texts.row(j) / (nv * nt) -
                                         c * v->value.row(i) / (nv * nv));
        }
      }
      v->add_grad(g);
    };
  return out;
}

Node* cross_entropy_mean(Tape& t, Node* logits, const std::vector<int>& labels) {
  const Eigen::Index n = logits->value.rows(), vsz = logits->value.cols();
  if (static_cast<Eigen::Index>(labels.size()) != n)
    throw ShapeError("cross_entropy_mean: label count mismatch");
  for (int l : labels)
    if (l < 0 || l >= vsz)
      throw Error("cross_entropy_mean: label out of range: " + std::to_string(l));
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::ArrayXd row = logits->value.row(i).array();
    const double m = row.maxCoeff();
    const double lse = m + std::log((row - m).exp().sum());
    total += lse - logits->value(i, labels[static_cast<std::size_t>(i)]);
  }
  Matrix v(1, 1);
  v(0, 0) = total / static_cast<double>(n);
  Node* out = t.make(std::move(v), logits->requires_grad);
  if (out->requires_grad)
    out->backward = [out, logits, labels] {
      const Eigen::Index n = logits->value.rows();
      const double g = out->grad(0, 0) / static_cast<double>(n);
      Matrix dz(n, logits->value.cols());
      for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::ArrayXd row = logits->value.row(i).array();
        row -= row.maxCoeff();
        Eigen::ArrayXd p = row.exp();
        p /= p.sum();
        dz.row(i) = p.matrix().transpose() * g;
        dz(i, labels[static_cast<std::size_t>(i)]) -= g;
      }
      logits->add_grad(dz);
    };
  return out;
}

Node* kl_match_mean(Tape& t, Node* p, const Matrix& q, double eps) {
  if (p->value.rows() != q.rows() || p->value.cols() != q.cols())
    throw ShapeError("kl_match_mean: P and Q shapes differ");
  const Eigen::Index n = p->value.rows();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p->value.cols(); ++j) {
      const double pij = std::max(p->value(i, j), 1e-300);
      total += pij * std::log(pij / (q(i, j) + eps));
    }
  Matrix v(1, 1);
  v(0, 0) = total / static_cast<double>(n);
  Node* out = t.make(std::move(v), p->requires_grad);
  if (out->requires_grad)
    out->backward = [out, p, q, eps, n] {
      const double g = out->grad(0, 0) / static_cast<double>(n);
      Matrix dp(p->value.rows(), p->value.cols());
      for (Eigen::Index i = 0; i < p->value.rows(); ++i)
        for (Eigen::Index j = 0; j < p->value.cols(); ++j) {
          const double pij = std::max(p->value(i, j), 1e-300);
          dp(i, j) = g * (std::log(pij / (q(i, j) + eps)) + 1.0);
        }
      p->add_grad(dp);
    };
  return out;
}

Node* minmax_filter(Tape& t, Node* m, double beta, double eps) {
  const Eigen::Index rows = m->value.rows(), cols = m->value.cols();
  // Row-major first occurrence for min/max, so the pivot choice is stable.
  Eigen::Index min_i = 0, min_j = 0, max_i = 0, max_j = 0;
  double lo = m->value(0, 0), hi = m->value(0, 0);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double x = m->value(i, j);
      if (x < lo) { lo = x; min_i = i; min_j = j; }
      if (x > hi) { hi = x; max_i = i; max_j = j; }
    }
  const double range = hi - lo + eps;
  Matrix y(rows, cols);
  Eigen::ArrayXXd kept(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double v = (m->value(i, j) - lo) / range;
      const bool keep = v >= beta;
      y(i, j) = keep ? v : 0.0;
      kept(i, j) = keep ? 1.0 : 0.0;
    }
  Node* out = t.make(std::move(y), m->requires_grad);
  if (out->requires_grad)
    out->backward = [out, m, kept, lo, range, min_i, min_j, max_i, max_j] {
      Matrix g = Matrix::Zero(m->value.rows(), m->value.cols());
      double s1 = 0.0, s2 = 0.0;
      for (Eigen::Index i = 0; i < m->value.rows(); ++i)
        for (Eigen::Index j = 0; j < m->value.cols(); ++j) {
          if (kept(i, j) == 0.0) continue;
          const double gij = out->grad(i, j);
          g(i, j) += gij / range;
          s1 += gij;
          s2 += gij * (m->value(i, j) - lo);
        }
      g(min_i, min_j) += -s1 / range + s2 / (range * range);
      g(max_i, max_j) += -s2 / (range * range);
      m->add_grad(g);
    };
  return out;
}

namespace {
struct LerpIndex {
  int i0, i1;
  double w;  // weight of i1
};

LerpIndex lerp_index(int out_idx, int in_size, int out_size) {
  double f = (out_idx + 0.5) * (static_cast<double>(in_size) / out_size) - 0.5;
  f = std::clamp(f, 0.0, static_cast<double>(in_size - 1));
  LerpIndex li;
  li.i0 = static_cast<int>(f);
  li.i1 = std::min(li.i0 + 1, in_size - 1);
  li.w = f - li.i0;
  return li;
}
}  // namespace

Node* bilinear_upsample(Tape& t, Node* m, int out_h, int out_w) {
  const int in_h = static_cast<int>(m->value.rows());
  const int in_w = static_cast<int>(m->value.cols());
  Node* out = t.make(sea::resize_bilinear(m->value, out_h, out_w),
                     m->requires_grad);
  if (out->requires_grad)
    out->backward = [out, m, in_h, in_w, out_h, out_w] {
      Matrix g = Matrix::Zero(in_h, in_w);
      for (int y = 0; y < out_h; ++y) {
        const LerpIndex ly = lerp_index(y, in_h, out_h);
        for (int x = 0; x < out_w; ++x) {
          const LerpIndex lx = lerp_index(x, in_w, out_w);
          const double go = out->grad(y, x);
          g(ly.i0, lx.i0) += (1 - ly.w) * (1 - lx.w) * go;
          g(ly.i0, lx.i1) += (1 - ly.w) * lx.w * go;
          g(ly.i1, lx.i0) += ly.w * (1 - lx.w) * go;
          g(ly.i1, lx.i1) += ly.w * lx.w * go;
        }
      }
      m->add_grad(g);
    };
  return out;
}

Node* block_mean_downsample(Tape& t, Node* m, int factor) {
  const Eigen::Index h = m->value.rows(), w = m->value.cols();
  if (factor <= 0 || h % factor != 0 || w % factor != 0)
    throw ShapeError("block_mean_downsample: size not divisible by factor");
  const Eigen::Index oh = h / factor, ow = w / factor;
  Matrix y(oh, ow);
  const double inv = 1.0 / (static_cast<double>(factor) * factor);
  for (Eigen::Index i = 0; i < oh; ++i)
    for (Eigen::Index j = 0; j < ow; ++j)
      y(i, j) = m->value.block(i * factor, j * factor, factor, factor).sum() * inv;
  Node* out = t.make(std::move(y), m->requires_grad);
  if (out->requires_grad)
    out->backward = [out, m, factor, inv] {
      Matrix g = Matrix::Zero(m->value.rows(), m->value.cols());
      for (Eigen::Index i = 0; i < out->value.rows(); ++i)
        for (Eigen::Index j = 0; j < out->value.cols(); ++j)
          g.block(i * factor, j * factor, factor, factor).array() +=
              out->grad(i, j) * inv;
      m->add_grad(g);
    };
  return out;
}

Node* rows_weighted_mean(Tape& t, Node* feats, Node* weights) {
  const Eigen::Index n = feats->value.rows();
  if (weights->value.rows() != n || weights->value.cols() != 1)
    throw ShapeError("rows_weighted_mean: weights must be N x 1");
  const double inv_n = 1.0 / static_cast<double>(n);
  Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(feats->value.cols());
  for (Eigen::Index i = 0; i < n; ++i)
    e += weights->value(i, 0) * feats->value.row(i);
  Node* out = t.make(e * inv_n, any_grad({feats, weights}));
  if (out->requires_grad)
    out->backward = [out, feats, weights, inv_n] {
      if (feats->requires_grad) {
        Matrix g(feats->value.rows(), feats->value.cols());
        for (Eigen::Index i = 0; i < feats->value.rows(); ++i)
          g.row(i) = weights->value(i, 0) * inv_n * out->grad.row(0);
        feats->add_grad(g);
      }
      if (weights->requires_grad) {
        Matrix g(weights->value.rows(), 1);
        for (Eigen::Index i = 0; i < feats->value.rows(); ++i)
          g(i, 0) = inv_n * out->grad.row(0).dot(feats->value.row(i));
        weights->add_grad(g);
      }
    };
  return out;
}

Node* dropout(Tape& t, Node* a, double p, Rng& rng, bool training) {
  if (!training || p <= 0.0) return a;
  if (p >= 1.0) throw ConfigError("dropout probability must be < 1");
  const double keep_scale = 1.0 / (1.0 - p);
  Eigen::ArrayXXd mask(a->value.rows(), a->value.cols());
  for (Eigen::Index i = 0; i < a->value.rows(); ++i)
    for (Eigen::Index j = 0; j < a->value.cols(); ++j)
      mask(i, j) = rng.uniform() < p ? 0.0 : keep_scale;
  Node* out = t.make((a->value.array() * mask).matrix(), a->requires_grad);
  if (out->requires_grad)
    out->backward = [out, a, mask] {
      a->add_grad((out->grad.array() * mask).matrix());
    };
  return out;
}

}  // namespace sea::nn
