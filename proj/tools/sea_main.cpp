// sea: dataset generation, training, evaluation and single-image prediction
// for self-explainable affordance learning.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "sea/data/synthetic.hpp"
#include "sea/errors.hpp"
#include "sea/hash.hpp"
#include "sea/model/sea_model.hpp"
#include "sea/train/trainer.hpp"

namespace fs = std::filesystem;
using namespace sea;

namespace {

RunConfig load_config(const std::string& config_path,
                      const std::vector<std::string>& overrides) {
  RunConfig cfg = config_path.empty() ? RunConfig{}
                                      : RunConfig::from_file(config_path);
  for (const auto& o : overrides) cfg.apply_override(o);
  cfg.validate();
  return cfg;
}

std::string timestamp_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
  return buf;
}

fs::path default_run_dir(const RunConfig& cfg) {
  return fs::path("runs") /
         (timestamp_now() + "-" + hex64(cfg.hash()).substr(0, 8));
}

int cmd_generate(const std::string& config_path, const std::string& out,
                 const std::vector<std::string>& overrides) {
  RunConfig cfg = load_config(config_path, overrides);
  data::SyntheticConfig scfg;
  scfg.n_actions = cfg.synthetic.n_actions;
  scfg.n_objects = cfg.synthetic.n_objects;
  scfg.samples_per_pair = cfg.synthetic.samples_per_pair;
  scfg.image_h = cfg.synthetic.image_h;
  scfg.image_w = cfg.synthetic.image_w;
  scfg.k_exo = cfg.synthetic.k_exo;
  scfg.seed = cfg.synthetic.seed;
  scfg.blob_sigma = cfg.synthetic.blob_sigma;
  scfg.setting = cfg.setting;

  const data::DatasetManifest mf = data::generate_synthetic(scfg, out);
  std::printf("dataset root:     %s\n", out.c_str());
  std::printf("setting:          %s\n", to_string(scfg.setting).c_str());
  std::printf("actions:          %d\n", static_cast<int>(mf.actions.size()));
  std::printf("objects:          %d\n", static_cast<int>(mf.objects.size()));
  std::printf("train samples:    %d\n", mf.train_samples);
  std::printf("test samples:     %d\n", mf.test_samples);
  std::printf("exo images:       %d\n", mf.exo_images);
  std::printf("annotations_hash: %s\n", hex64(mf.annotations_hash).c_str());
  return 0;
}

int cmd_train(const std::string& config_path, std::string out,
              const std::vector<std::string>& overrides) {
  RunConfig cfg = load_config(config_path, overrides);
  const fs::path root = cfg.resolved_data_root();
  const data::VocabPair vocab = data::load_vocabularies(root);
  auto train_set = data::load_dataset(root, cfg.setting, Split::train, vocab);
  auto test_set = data::load_dataset(root, cfg.setting, Split::test, vocab);

  if (out.empty()) out = default_run_dir(cfg).string();
  fs::create_directories(out);
  {
    std::ofstream os(fs::path(out) / "config.json");
    os << cfg.to_json().dump(2) << "\n";
  }
  std::printf("run dir: %s\n", out.c_str());
  std::printf("train samples: %zu, eval samples: %zu\n", train_set.size(),
              test_set.size());

  model::SeaModel model(cfg, vocab);
  train::Trainer trainer(model, train::TrainConfig::from_run_config(cfg), out);
  const train::FitResult result = trainer.fit(train_set, test_set);

  if (!result.evals.empty()) {
    std::ofstream os(fs::path(out) / "metric_report.json",
                     std::ios::binary | std::ios::trunc);
    os << result.evals.back().to_json().dump(2) << "\n";
  }
  std::printf("best checkpoint: %s (epoch %d)\n",
              result.best_checkpoint.string().c_str(), result.best_epoch);
  std::printf("last checkpoint: %s\n", result.last_checkpoint.string().c_str());
  return 0;
}

std::string sanitize_id(const std::string& id) {
  std::string s = id;
  for (char& c : s)
    if (c == '/' || c == '\\') c = '_';
  return s;
}

int cmd_eval(const std::string& config_path, const std::string& checkpoint,
             const std::string& out, bool save_heatmaps, bool float_heatmaps,
             const std::vector<std::string>& overrides) {
  RunConfig cfg = load_config(config_path, overrides);
  model::SeaModel model = train::load_checkpoint(checkpoint);

  const fs::path root = cfg.resolved_data_root();
  const data::VocabPair vocab = data::load_vocabularies(root);
  if (vocab.actions.labels() != model.vocab().actions.labels() ||
      vocab.objects.labels() != model.vocab().objects.labels())
    throw Error(
        "checkpoint vocabulary does not match the dataset vocabulary under " +
        root.string());
  auto test_set = data::load_dataset(root, cfg.setting, Split::test, vocab);

  fs::create_directories(out);
  const fs::path heat_dir = fs::path(out) / "heatmaps";
  if (save_heatmaps) fs::create_directories(heat_dir);

  std::ofstream pred_os(fs::path(out) / "predictions.jsonl",
                        std::ios::binary | std::ios::trunc);
  const met::MetricReport report = met::evaluate_split(
      test_set,
      [&](const data::Sample& s) {
        model::PredictionBundle b = model.predict(s.load_ego());
        const int topn = std::min<int>(5, model.vocab().actions.size());
        const int topo = std::min<int>(5, model.vocab().objects.size());
        Json rec;
        rec["id"] = s.id;
        Json a = Json::array(), o = Json::array();
        for (int i = 0; i < topn; ++i)
          a.push_back(model.vocab().actions.label(b.action_ranking[i]));
        for (int i = 0; i < topo; ++i)
          o.push_back(model.vocab().objects.label(b.object_ranking[i]));
        rec["action_topk"] = a;
        rec["object_topk"] = o;
        std::string heat_rel;
        if (save_heatmaps) {
          heat_rel = "heatmaps/" + sanitize_id(s.id) + ".png";
          save_gray_png(fs::path(out) / heat_rel, unit_to_gray(b.heatmap));
        }
        rec["heatmap_path"] = heat_rel;
        if (float_heatmaps) {
          Json rows = Json::array();
          for (Eigen::Index y = 0; y < b.heatmap.rows(); ++y) {
            Json row = Json::array();
            for (Eigen::Index x = 0; x < b.heatmap.cols(); ++x)
              row.push_back(b.heatmap(y, x));
            rows.push_back(std::move(row));
          }
          rec["heatmap"] = std::move(rows);
        }
        pred_os << rec.dump() << "\n";
        return met::SamplePrediction{
            std::move(b.heatmap),
            met::RankedPrediction{std::move(b.action_ranking),
                                  std::move(b.object_ranking)}};
      },
      vocab);

  {
    std::ofstream os(fs::path(out) / "metric_report.json",
                     std::ios::binary | std::ios::trunc);
    os << report.to_json().dump(2) << "\n";
  }
  {
    std::ofstream os(fs::path(out) / "metric_report.txt",
                     std::ios::binary | std::ios::trunc);
    os << report.to_table();
  }
  std::fputs(report.to_table().c_str(), stdout);
  return 0;
}

int cmd_predict(const std::string& checkpoint, const std::string& image_path,
                const std::string& exo_dir, const std::string& out,
                const std::vector<std::string>& overrides) {
  model::SeaModel model = [&] {
    model::SeaModel m = train::load_checkpoint(checkpoint);
    if (overrides.empty()) return m;
    RunConfig cfg = m.config();
    for (const auto& o : overrides) cfg.apply_override(o);
    cfg.validate();
    model::SeaModel patched(cfg, m.vocab());
    // Reuse the trained parameters under the patched runtime options.
    for (const auto& p : m.params().all()) {
      auto dst = patched.params().find(p->name);
      if (!dst || dst->value.rows() != p->value.rows() ||
          dst->value.cols() != p->value.cols())
        throw ConfigError(
            "override changes the architecture; only runtime keys (e.g. "
            "affordance.*) may be overridden at predict time");
      dst->value = p->value;
    }
    return patched;
  }();

  Image ego;
  try {
    ego = load_image(image_path);
  } catch (const IoError& e) {
    throw Error(e.what());  // runtime failure -> exit 1
  }

  std::vector<Image> exo;
  if (!exo_dir.empty()) {
    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(exo_dir)) {
      const std::string ext = entry.path().extension().string();
      if (ext == ".jpg" || ext == ".jpeg" || ext == ".png")
        paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());
    for (const auto& p : paths) exo.push_back(load_image(p));
  }

  const model::PredictionBundle b = model.predict(ego, exo);
  std::printf("caption: %s\n", b.caption.c_str());

  // Joint top-5 (action, object) pairs under the independent heads.
  struct Pair {
    double p;
    int a, o;
  };
  std::vector<Pair> pairs;
  for (std::size_t a = 0; a < b.action_probs.size(); ++a)
    for (std::size_t o = 0; o < b.object_probs.size(); ++o)
      pairs.push_back(Pair{b.action_probs[a] * b.object_probs[o],
                           static_cast<int>(a), static_cast<int>(o)});
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const Pair& x, const Pair& y) { return x.p > y.p; });
  const int n_pairs = std::min<std::size_t>(5, pairs.size());
  for (int i = 0; i < n_pairs; ++i)
    std::printf("  %d. (%s, %s) p=%.4f\n", i + 1,
                model.vocab().actions.label(pairs[i].a).c_str(),
                model.vocab().objects.label(pairs[i].o).c_str(), pairs[i].p);

  fs::create_directories(out.empty() ? "." : out);
  const fs::path out_dir = out.empty() ? "." : out;
  const Matrix heat = resize_bilinear(b.heatmap, ego.h, ego.w);
  save_gray_png(out_dir / "heatmap.png", unit_to_gray(heat));
  save_png(out_dir / "overlay.png", overlay_heatmap(ego, heat, 0.6));
  std::printf("wrote %s and %s\n", (out_dir / "heatmap.png").string().c_str(),
              (out_dir / "overlay.png").string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"self-explainable affordance learning toolkit"};
  app.require_subcommand(1);

  std::string config_path, out, checkpoint, image_path, exo_dir;
  std::vector<std::string> overrides;
  bool save_heatmaps = true, float_heatmaps = false;

  auto add_common = [&](CLI::App* sub, bool with_config = true) {
    if (with_config)
      sub->add_option("--config", config_path, "run config JSON file");
    sub->add_option("--set", overrides,
                    "override a config key, e.g. --set train.epochs=5");
  };

  CLI::App* gen = app.add_subcommand("generate", "write a synthetic dataset");
  add_common(gen);
  gen->add_option("--out", out, "output dataset root")->required();

  CLI::App* train = app.add_subcommand("train", "train a model");
  add_common(train);
  train->add_option("--out", out, "run directory (default runs/<stamp>-<hash>)");

  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(eval);
  eval->add_option("--checkpoint", checkpoint, "checkpoint base path")
      ->required();
  eval->add_option("--out", out, "report directory")->required();
  eval->add_flag("--save-heatmaps,!--no-save-heatmaps", save_heatmaps,
                 "write per-sample heatmap PNGs (default on)");
  eval->add_flag("--float-heatmaps", float_heatmaps,
                 "embed float heatmaps in predictions.jsonl");

  CLI::App* predict =
      app.add_subcommand("predict", "caption + heatmap for one image");
  add_common(predict, /*with_config=*/false);
  predict->add_option("--checkpoint", checkpoint, "checkpoint base path")
      ->required();
  predict->add_option("--image", image_path, "egocentric image")->required();
  predict->add_option("--exo", exo_dir, "directory of exocentric images");
  predict->add_option("--out", out, "output directory (default .)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp")
      return app.exit(e);
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_generate(config_path, out, overrides);
    if (train->parsed()) return cmd_train(config_path, out, overrides);
    if (eval->parsed())
      return cmd_eval(config_path, checkpoint, out, save_heatmaps,
                      float_heatmaps, overrides);
    if (predict->parsed())
      return cmd_predict(checkpoint, image_path, exo_dir, out, overrides);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
