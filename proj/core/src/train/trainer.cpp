#include "sea/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "sea/errors.hpp"
#include "sea/hash.hpp"

namespace sea::train {

namespace fs = std::filesystem;

TrainConfig TrainConfig::from_run_config(const RunConfig& cfg) {
  TrainConfig t;
  t.batch_size = cfg.batch_size;
  t.epochs = cfg.epochs;
  t.lr = cfg.lr;
  t.weight_decay = cfg.weight_decay;
  t.momentum = cfg.momentum;
  t.seed = cfg.seed;
  t.eval_every = cfg.eval_every;
  t.grad_clip = cfg.grad_clip;
  t.k_exo = cfg.k_exo;
  t.lr_schedule = cfg.lr_schedule;
  return t;
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (lr <= 0) throw ConfigError("lr must be > 0");
  if (weight_decay < 0) throw ConfigError("weight_decay must be >= 0");
  if (momentum < 0 || momentum >= 1) throw ConfigError("momentum must be in [0,1)");
  if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
  if (grad_clip < 0) throw ConfigError("grad_clip must be >= 0");
  if (k_exo < 1) throw ConfigError("k_exo must be >= 1");
}

bool StepLosses::finite() const {
  return std::isfinite(total) && std::isfinite(cos) && std::isfinite(con) &&
         std::isfinite(ce_action) && std::isfinite(ce_object);
}

void save_checkpoint(const model::SeaModel& model, const fs::path& base,
                     int epoch, const met::MetricReport* eval,
                     std::uint64_t rng_state) {
  fs::create_directories(base.parent_path().empty() ? "." : base.parent_path());
  fs::path params_path = base;
  params_path += ".params";
  model.params().save(params_path);

  Json manifest;
  manifest["format"] = "sea.checkpoint.v1";
  manifest["epoch"] = epoch;
  manifest["config"] = model.config().to_json();
  manifest["vocab"] = {{"actions", model.vocab().actions.labels()},
                       {"objects", model.vocab().objects.labels()}};
  manifest["rng_state"] = hex64(rng_state);
  manifest["param_checksum"] = hex64(model.params().checksum());
  if (eval) {
    Json agg;
    for (const auto& [k, v] : eval->aggregates) agg[k] = v;
    manifest["metrics"] = agg;
  } else {
    manifest["metrics"] = nullptr;
  }
  fs::path manifest_path = base;
  manifest_path += ".json";
  std::ofstream os(manifest_path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot write checkpoint manifest: " +
                         manifest_path.string());
  os << manifest.dump(2) << "\n";
}

Json read_checkpoint_manifest(const fs::path& base) {
  fs::path manifest_path = base;
  manifest_path += ".json";
  std::ifstream is(manifest_path);
  if (!is)
    throw IoError("cannot read checkpoint manifest: " + manifest_path.string());
  try {
    return Json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad checkpoint manifest: " + std::string(e.what()));
  }
}

model::SeaModel load_checkpoint(const fs::path& base) {
  const Json manifest = read_checkpoint_manifest(base);
  if (!manifest.contains("format") ||
      manifest["format"] != "sea.checkpoint.v1")
    throw IoError("unsupported checkpoint format");
  RunConfig cfg = RunConfig::from_json(manifest.at("config"));
  data::VocabPair vocab{
      data::Vocabulary::from_labels(
          data::Vocabulary::Kind::action,
          manifest.at("vocab").at("actions").get<std::vector<std::string>>()),
      data::Vocabulary::from_labels(
          data::Vocabulary::Kind::object,
          manifest.at("vocab").at("objects").get<std::vector<std::string>>())};
  model::SeaModel model(cfg, std::move(vocab));
  fs::path params_path = base;
  params_path += ".params";
  model.params().load(params_path);
  const std::string expect = manifest.at("param_checksum").get<std::string>();
  if (hex64(model.params().checksum()) != expect)
    throw IoError("checkpoint parameter checksum mismatch");
  return model;
}

Trainer::Trainer(model::SeaModel& model, TrainConfig cfg, fs::path out_dir)
    : model_(model),
      cfg_(cfg),
      opt_(nn::SgdConfig{cfg.lr, cfg.weight_decay, cfg.momentum, cfg.grad_clip}),
      out_dir_(std::move(out_dir)),
      aux_rng_(mix_seed(cfg.seed, 0xD809ULL)) {
  cfg_.validate();
  fs::create_directories(out_dir_);
}

const Image& Trainer::cached_image(const std::string& path) {
  auto it = image_cache_.find(path);
  if (it != image_cache_.end()) return it->second;
  return image_cache_.emplace(path, load_image(path)).first->second;
}

std::vector<model::TrainItem> Trainer::make_items(
    const std::vector<const data::Sample*>& batch, std::uint64_t seed) {
  std::vector<model::TrainItem> items;
  items.reserve(batch.size());
  for (const data::Sample* s : batch) {
    model::TrainItem item;
    item.sample = s;
    item.ego = cached_image(s->ego_path);
    item.ego_key = s->ego_path;
    const auto exo_paths =
        data::sample_exocentrics(*s, cfg_.k_exo, mix_seed(seed, fnv1a(s->id)));
    for (const auto& p : exo_paths) {
      item.exo.push_back(cached_image(p));
      item.exo_keys.push_back(p);
    }
    items.push_back(std::move(item));
  }
  return items;
}

StepLosses Trainer::train_step(const std::vector<const data::Sample*>& batch,
                               std::uint64_t step_seed) {
  auto items = make_items(batch, step_seed);
  nn::Tape tape;
  model::BatchLossNodes losses =
      model_.build_batch_graph(tape, items, aux_rng_, true);
  StepLosses out{losses.total->value(0, 0), losses.cos->value(0, 0),
                 losses.con->value(0, 0), losses.ce_action->value(0, 0),
                 losses.ce_object->value(0, 0)};
  if (!out.finite()) {
    std::string ids;
    for (const data::Sample* s : batch) ids += " " + s->id;
    throw TrainError("non-finite loss; batch ids:" + ids);
  }
  tape.backward(losses.total);
  opt_.step(tape.param_nodes());
  return out;
}

FitResult Trainer::fit(const std::vector<data::Sample>& train_set,
                       const std::vector<data::Sample>& eval_set) {
  if (train_set.empty()) throw InputError("fit: empty training set");
  FitResult result;
  result.best_kld = std::numeric_limits<double>::infinity();
  const fs::path best_base = out_dir_ / "checkpoint_best";
  const fs::path last_base = out_dir_ / "checkpoint_last";

  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= cfg_.epochs; ++epoch) {
    if (cfg_.lr_schedule == "cosine")
      opt_.set_lr(cfg_.lr * 0.5 *
                  (1.0 + std::cos(M_PI * (epoch - 1) /
                                  static_cast<double>(cfg_.epochs))));
    // Fresh exocentric pairings every epoch.
    const std::uint64_t epoch_seed = mix_seed(cfg_.seed, 1000003ULL * epoch);
    Rng shuffle_rng(mix_seed(epoch_seed, 0x5117FFULL));
    shuffle_rng.shuffle(order);

    StepLosses acc;
    int steps = 0;
    for (std::size_t off = 0; off < order.size();
         off += static_cast<std::size_t>(cfg_.batch_size)) {
      std::vector<const data::Sample*> batch;
      const std::size_t end = std::min(
          order.size(), off + static_cast<std::size_t>(cfg_.batch_size));
      for (std::size_t i = off; i < end; ++i)
        batch.push_back(&train_set[order[i]]);
      const StepLosses l = train_step(batch, epoch_seed);
      acc.total += l.total;
      acc.cos += l.cos;
      acc.con += l.con;
      acc.ce_action += l.ce_action;
      acc.ce_object += l.ce_object;
      ++steps;
    }
    const double inv = 1.0 / std::max(1, steps);
    EpochLog log{epoch, StepLosses{acc.total * inv, acc.cos * inv,
                                   acc.con * inv, acc.ce_action * inv,
                                   acc.ce_object * inv}};
    result.history.push_back(log);
    std::printf(
        "epoch %3d/%d  total=%.4f cos=%.4f con=%.4f ce_a=%.4f ce_o=%.4f\n",
        epoch, cfg_.epochs, log.mean.total, log.mean.cos, log.mean.con,
        log.mean.ce_action, log.mean.ce_object);
    std::fflush(stdout);

    const bool eval_now =
        !eval_set.empty() &&
        (epoch % cfg_.eval_every == 0 || epoch == cfg_.epochs);
    if (eval_now) {
      met::MetricReport report = model::evaluate_model(model_, eval_set);
      std::fputs(report.to_table().c_str(), stdout);
      std::fflush(stdout);
      const double k = report.aggregate("kld_mean");
      if (k < result.best_kld) {
        result.best_kld = k;
        result.best_epoch = epoch;
        save_checkpoint(model_, best_base, epoch, &report, aux_rng_.state());
      }
      save_checkpoint(model_, last_base, epoch, &report, aux_rng_.state());
      result.evals.push_back(std::move(report));
    } else if (epoch == cfg_.epochs) {
      save_checkpoint(model_, last_base, epoch, nullptr, aux_rng_.state());
    }
  }
  if (result.best_epoch < 0) {
    // No evaluation ran; make both names point at the final state.
    save_checkpoint(model_, best_base, cfg_.epochs, nullptr, aux_rng_.state());
  }
  result.best_checkpoint = best_base;
  result.last_checkpoint = last_base;
  return result;
}

}  // namespace sea::train
