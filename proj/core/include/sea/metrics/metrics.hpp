#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sea/config.hpp"
#include "sea/data/dataset.hpp"

namespace sea::met {

struct HeatmapMetricConfig {
  double eps_m = 1e-12;
};

// KL(GT || pred) after sum-normalizing both maps:
// sum_i G_i * ln(eps_m + G_i / (P_i + eps_m)). Lower is better. An all-zero
// GT is a MetricError; an all-zero prediction yields a large finite value.
double kld(const Matrix& pred, const Matrix& gt, double eps_m = 1e-12);

// Histogram intersection of the sum-normalized maps, in [0,1].
double sim(const Matrix& pred, const Matrix& gt);

// Mean of the z-scored prediction over the strictly positive GT pixels.
// A constant prediction scores 0.
double nss(const Matrix& pred, const Matrix& gt);

// Full descending-probability orderings of both label spaces.
struct RankedPrediction {
  std::vector<int> action_ranking;
  std::vector<int> object_ranking;
};

enum class LabelKind { action, object };

// Stable argsort by descending probability (ties keep the lower id first).
std::vector<int> ranking_from_probs(const std::vector<double>& probs);

// Percentage of samples whose true label appears in the first k entries.
// k larger than the vocabulary clamps with a warning on stderr.
double topk_accuracy(const std::vector<RankedPrediction>& preds,
                     const std::vector<int>& labels, int k, LabelKind kind);

struct SampleRow {
  std::string id;
  double kld = 0, sim = 0, nss = 0;
  std::string action_top1, object_top1;
  bool a_at1 = false, a_at5 = false, o_at1 = false, o_at5 = false;
};

struct MetricReport {
  std::string setting;
  std::string split;
  int n_samples = 0;
  // Exactly kld/sim/nss mean+std plus T_a@{1,5} and T_o@{1,5}, in this order.
  std::vector<std::pair<std::string, double>> aggregates;
  std::vector<SampleRow> rows;

  double aggregate(const std::string& name) const;
  Json to_json() const;
  std::string to_table() const;
};

// What the model produced for one evaluation sample.
struct SamplePrediction {
  Matrix heatmap;  // final stage, any resolution
  RankedPrediction ranking;
};

using PredictFn = std::function<SamplePrediction(const data::Sample&)>;

// Ego-only evaluation: per sample, resize the predicted heatmap bilinearly to
// the GT shape, compute kld/sim/nss, and score top-k hits for both heads.
MetricReport evaluate_split(const std::vector<data::Sample>& samples,
                            const PredictFn& predict,
                            const data::VocabPair& vocab,
                            const HeatmapMetricConfig& cfg = {});

}  // namespace sea::met
