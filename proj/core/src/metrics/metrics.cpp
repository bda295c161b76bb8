#include "sea/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numeric>

#include "sea/errors.hpp"
#include "sea/image.hpp"

namespace sea::met {

namespace {

void check_same_shape(const Matrix& pred, const Matrix& gt, const char* op) {
  if (pred.rows() != gt.rows() || pred.cols() != gt.cols())
    throw ShapeError(std::string(op) + ": pred and gt shapes differ");
}

// Sum-normalize; an all-zero map stays all-zero.
Matrix sum_normalize(const Matrix& m) {
  const double s = m.sum();
  if (s <= 0.0) return Matrix::Zero(m.rows(), m.cols());
  return m / s;
}

}  // namespace

double kld(const Matrix& pred, const Matrix& gt, double eps_m) {
  check_same_shape(pred, gt, "kld");
  if (gt.sum() <= 0.0) throw MetricError("kld: ground truth is all-zero");
  const Matrix g = sum_normalize(gt);
  const Matrix p = sum_normalize(pred);
  double out = 0.0;
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      const double gi = g(i, j);
      if (gi <= 0.0) continue;
      out += gi * std::log(eps_m + gi / (p(i, j) + eps_m));
    }
  return out;
}

double sim(const Matrix& pred, const Matrix& gt) {
  check_same_shape(pred, gt, "sim");
  if (gt.sum() <= 0.0) throw MetricError("sim: ground truth is all-zero");
  const Matrix g = sum_normalize(gt);
  const Matrix p = sum_normalize(pred);
  return p.cwiseMin(g).sum();
}

double nss(const Matrix& pred, const Matrix& gt) {
  check_same_shape(pred, gt, "nss");
  const Eigen::Index n = pred.size();
  std::size_t fixations = 0;
  for (Eigen::Index i = 0; i < gt.size(); ++i)
    if (gt.reshaped()(i) > 0.0) ++fixations;
  if (fixations == 0) throw MetricError("nss: ground truth has no positive pixel");
  const double mu = pred.mean();
  const double sigma =
      std::sqrt((pred.array() - mu).square().sum() / static_cast<double>(n));
  if (sigma == 0.0) return 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < gt.rows(); ++i)
    for (Eigen::Index j = 0; j < gt.cols(); ++j)
      if (gt(i, j) > 0.0) acc += (pred(i, j) - mu) / sigma;
  return acc / static_cast<double>(fixations);
}

std::vector<int> ranking_from_probs(const std::vector<double>& probs) {
  std::vector<int> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return probs[static_cast<std::size_t>(a)] > probs[static_cast<std::size_t>(b)];
  });
  return order;
}

namespace {

void check_permutation(const std::vector<int>& ranking) {
  std::vector<bool> seen(ranking.size(), false);
  for (int id : ranking) {
    if (id < 0 || id >= static_cast<int>(ranking.size()) ||
        seen[static_cast<std::size_t>(id)])
      throw Error("ranking is not a permutation of the vocabulary");
    seen[static_cast<std::size_t>(id)] = true;
  }
}

}  // namespace

double topk_accuracy(const std::vector<RankedPrediction>& preds,
                     const std::vector<int>& labels, int k, LabelKind kind) {
  if (k < 1) throw InputError("topk_accuracy: k must be >= 1");
  if (preds.size() != labels.size())
    throw ShapeError("topk_accuracy: prediction/label count mismatch");
  if (preds.empty()) throw InputError("topk_accuracy: empty prediction list");
  int hits = 0;
  bool warned = false;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto& ranking = kind == LabelKind::action ? preds[i].action_ranking
                                                    : preds[i].object_ranking;
    check_permutation(ranking);
    int kk = k;
    if (kk > static_cast<int>(ranking.size())) {
      if (!warned) {
        std::cerr << "warning: top-" << k << " clamped to vocabulary size "
                  << ranking.size() << "\n";
        warned = true;
      }
      kk = static_cast<int>(ranking.size());
    }
    const auto end = ranking.begin() + kk;
    if (std::find(ranking.begin(), end, labels[i]) != end) ++hits;
  }
  return 100.0 * hits / static_cast<double>(preds.size());
}

double MetricReport::aggregate(const std::string& name) const {
  for (const auto& [k, v] : aggregates)
    if (k == name) return v;
  throw Error("no aggregate named '" + name + "'");
}

Json MetricReport::to_json() const {
  Json j;
  j["schema"] = "sea.metric_report.v1";
  j["setting"] = setting;
  j["split"] = split;
  j["n_samples"] = n_samples;
  Json agg;
  for (const auto& [k, v] : aggregates) agg[k] = v;
  j["aggregates"] = agg;
  Json samples = Json::array();
  for (const auto& r : rows) {
    Json s;
    s["id"] = r.id;
    s["kld"] = r.kld;
    s["sim"] = r.sim;
    s["nss"] = r.nss;
    s["action_top1"] = r.action_top1;
    s["object_top1"] = r.object_top1;
    s["a_at1"] = r.a_at1;
    s["a_at5"] = r.a_at5;
    s["o_at1"] = r.o_at1;
    s["o_at5"] = r.o_at5;
    samples.push_back(std::move(s));
  }
  j["samples"] = std::move(samples);
  return j;
}

std::string MetricReport::to_table() const {
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof(buf), "%-10s %-6s samples=%d\n", setting.c_str(),
                split.c_str(), n_samples);
  out += buf;
  for (const auto& [k, v] : aggregates) {
    std::snprintf(buf, sizeof(buf), "  %-10s %10.4f\n", k.c_str(), v);
    out += buf;
  }
  return out;
}

MetricReport evaluate_split(const std::vector<data::Sample>& samples,
                            const PredictFn& predict,
                            const data::VocabPair& vocab,
                            const HeatmapMetricConfig& cfg) {
  if (samples.empty()) throw InputError("evaluate_split: no samples");
  MetricReport report;
  report.setting = to_string(samples.front().setting);
  report.split = to_string(samples.front().split);
  report.n_samples = static_cast<int>(samples.size());

  std::vector<RankedPrediction> rankings;
  std::vector<int> action_labels, object_labels;
  std::vector<double> klds, sims, nsss;
  rankings.reserve(samples.size());

  for (const auto& s : samples) {
    const SamplePrediction pred = predict(s);
    const Matrix gt = s.load_gt();
    Matrix heat = pred.heatmap;
    if (heat.rows() != gt.rows() || heat.cols() != gt.cols())
      heat = resize_bilinear(heat, static_cast<int>(gt.rows()),
                             static_cast<int>(gt.cols()));
    SampleRow row;
    row.id = s.id;
    row.kld = kld(heat, gt, cfg.eps_m);
    row.sim = sim(heat, gt);
    row.nss = nss(heat, gt);
    const auto& ar = pred.ranking.action_ranking;
    const auto& obr = pred.ranking.object_ranking;
    check_permutation(ar);
    check_permutation(obr);
    row.action_top1 = vocab.actions.label(ar.front());
    row.object_top1 = vocab.objects.label(obr.front());
    auto hit = [](const std::vector<int>& r, int label, int k) {
      const int kk = std::min<int>(k, static_cast<int>(r.size()));
      return std::find(r.begin(), r.begin() + kk, label) != r.begin() + kk;
    };
    row.a_at1 = hit(ar, s.action_id, 1);
    row.a_at5 = hit(ar, s.action_id, 5);
    row.o_at1 = hit(obr, s.object_id, 1);
    row.o_at5 = hit(obr, s.object_id, 5);

    klds.push_back(row.kld);
    sims.push_back(row.sim);
    nsss.push_back(row.nss);
    rankings.push_back(pred.ranking);
    action_labels.push_back(s.action_id);
    object_labels.push_back(s.object_id);
    report.rows.push_back(std::move(row));
  }

  auto mean_of = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto std_of = [&](const std::vector<double>& v, double mu) {
    double s = 0.0;
    for (double x : v) s += (x - mu) * (x - mu);
    return std::sqrt(s / static_cast<double>(v.size()));
  };
  const double km = mean_of(klds), sm = mean_of(sims), nm = mean_of(nsss);
  report.aggregates = {
      {"kld_mean", km},
      {"kld_std", std_of(klds, km)},
      {"sim_mean", sm},
      {"sim_std", std_of(sims, sm)},
      {"nss_mean", nm},
      {"nss_std", std_of(nsss, nm)},
      {"T_a@1", topk_accuracy(rankings, action_labels, 1, LabelKind::action)},
      {"T_a@5", topk_accuracy(rankings, action_labels, 5, LabelKind::action)},
      {"T_o@1", topk_accuracy(rankings, object_labels, 1, LabelKind::object)},
      {"T_o@5", topk_accuracy(rankings, object_labels, 5, LabelKind::object)},
  };
  return report;
}

}  // namespace sea::met
