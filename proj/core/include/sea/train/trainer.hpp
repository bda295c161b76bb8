#pragma once

#include <filesystem>
#include <unordered_map>
#include <vector>

#include "sea/model/sea_model.hpp"
#include "sea/nn/sgd.hpp"

namespace sea::train {

struct TrainConfig {
  int batch_size = 16;
  int epochs = 20;
  double lr = 1e-3;
  double weight_decay = 5e-4;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  int eval_every = 5;
  double grad_clip = 0.0;
  int k_exo = 3;
  std::string lr_schedule = "constant";  // constant | cosine

  static TrainConfig from_run_config(const RunConfig& cfg);
  void validate() const;  // throws ConfigError
};

struct StepLosses {
  double total = 0, cos = 0, con = 0, ce_action = 0, ce_object = 0;
  bool finite() const;
};

struct EpochLog {
  int epoch = 0;
  StepLosses mean;
};

struct FitResult {
  std::filesystem::path best_checkpoint;  // base path, no extension
  std::filesystem::path last_checkpoint;
  std::vector<met::MetricReport> evals;
  std::vector<EpochLog> history;
  double best_kld = 0.0;
  int best_epoch = -1;
};

// Checkpoint = <base>.params parameter blob + <base>.json manifest carrying
// the config echo, vocabulary, epoch and last eval summary.
void save_checkpoint(const model::SeaModel& model,
                     const std::filesystem::path& base, int epoch,
                     const met::MetricReport* eval, std::uint64_t rng_state);
model::SeaModel load_checkpoint(const std::filesystem::path& base);
Json read_checkpoint_manifest(const std::filesystem::path& base);

class Trainer {
 public:
  Trainer(model::SeaModel& model, TrainConfig cfg,
          std::filesystem::path out_dir);

  // One SGD step over the given samples. Exocentric images are drawn from
  // each sample's pool with a seed derived from step_seed and the sample id.
  // A non-finite loss aborts with a TrainError naming the batch.
  StepLosses train_step(const std::vector<const data::Sample*>& batch,
                        std::uint64_t step_seed);

  // Full recipe: shuffled epochs, periodic evaluation, best-by-KLD and last
  // checkpoints under out_dir. Checkpoints already written survive an abort.
  FitResult fit(const std::vector<data::Sample>& train_set,
                const std::vector<data::Sample>& eval_set);

  const TrainConfig& config() const { return cfg_; }

 private:
  std::vector<model::TrainItem> make_items(
      const std::vector<const data::Sample*>& batch, std::uint64_t seed);
  const Image& cached_image(const std::string& path);

  model::SeaModel& model_;
  TrainConfig cfg_;
  nn::SgdOptimizer opt_;
  std::filesystem::path out_dir_;
  std::unordered_map<std::string, Image> image_cache_;
  Rng aux_rng_;
};

}  // namespace sea::train
