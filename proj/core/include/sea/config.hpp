#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "sea/types.hpp"

namespace sea {

using Json = nlohmann::ordered_json;

struct EncoderSection {
  std::string kind = "toy";  // toy | pretrained
  int dim = 64;
  std::string weights;  // required for kind == pretrained
};

struct SyntheticSection {
  int n_actions = 4;
  int n_objects = 4;
  int samples_per_pair = 5;
  int image_h = 64;
  int image_w = 64;
  int k_exo = 3;
  std::uint64_t seed = 7;
  double blob_sigma = 6.0;
};

// The full declarative run configuration. Every key has a default except
// data.root; unknown keys in a config file are rejected.
struct RunConfig {
  // data.*
  std::string data_root;  // empty = unset; SEA_DATA_ROOT env is the fallback
  Setting setting = Setting::seen;
  int k_exo = 3;
  SyntheticSection synthetic;

  // encoder.*
  EncoderSection pure;
  EncoderSection multimodal;
  std::string text_kind = "toy";
  std::string text_weights;
  int patch = 16;
  int input_size = 224;
  std::uint64_t encoder_seed = 1234;

  // model.pff.*
  int pff_layers = 2;
  int pff_heads = 4;
  int pff_model_dim = 64;
  int pff_ffn_dim = 256;
  double pff_dropout = 0.0;

  // model.explain.*
  std::string explain_variant = "transformer";  // ffn_softmax | concat_avgpool | transformer
  int explain_heads = 4;

  // caption.*
  std::string caption_template = "I will [action] [object]";

  // affordance.*
  double beta = 0.5;
  std::string prompt_style = "pair";  // pair | template
  double eps_norm = 1e-12;

  // loss.*
  double alpha = 0.1;
  double loss_eps = 1e-8;
  double tau = 0.07;
  double w_cos = 1.0;
  double w_con = 1.0;
  double w_ce_action = 1.0;
  double w_ce_object = 1.0;
  bool include_exo_contrastive = false;

  // train.*
  int batch_size = 16;
  int epochs = 20;
  double lr = 1e-3;
  double weight_decay = 5e-4;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  int eval_every = 5;
  double grad_clip = 0.0;
  std::string lr_schedule = "constant";  // constant | cosine
  std::string prompt_labels = "gt";  // gt | predicted

  static Json default_json();
  static RunConfig from_json(const Json& j);  // merges over defaults
  static RunConfig from_file(const std::filesystem::path& path);

  // "a.b.c=value"; the value is parsed as JSON when possible, else taken as
  // a string. Overrides win over the file.
  void apply_override(const std::string& assignment);

  void validate() const;      // throws ConfigError
  Json to_json() const;       // full canonical echo
  std::uint64_t hash() const; // of the canonical echo

  // data_root with the SEA_DATA_ROOT fallback applied; throws ConfigError
  // when neither is set.
  std::filesystem::path resolved_data_root() const;
};

}  // namespace sea
