#include "sea/config.hpp"

#include <cstdlib>
#include <fstream>

#include "sea/caption.hpp"
#include "sea/errors.hpp"
#include "sea/hash.hpp"

namespace sea {

Json RunConfig::default_json() { return RunConfig{}.to_json(); }

Json RunConfig::to_json() const {
  Json j;
  j["data"] = {
      {"root", data_root},
      {"setting", to_string(setting)},
      {"k_exo", k_exo},
      {"synthetic",
       {{"n_actions", synthetic.n_actions},
        {"n_objects", synthetic.n_objects},
        {"samples_per_pair", synthetic.samples_per_pair},
        {"image_h", synthetic.image_h},
        {"image_w", synthetic.image_w},
        {"k_exo", synthetic.k_exo},
        {"seed", synthetic.seed},
        {"blob_sigma", synthetic.blob_sigma}}},
  };
  j["encoder"] = {
      {"pure", {{"kind", pure.kind}, {"dim", pure.dim}, {"weights", pure.weights}}},
      {"multimodal",
       {{"kind", multimodal.kind},
        {"dim", multimodal.dim},
        {"weights", multimodal.weights}}},
      {"text", {{"kind", text_kind}, {"weights", text_weights}}},
      {"patch", patch},
      {"input_size", input_size},
      {"seed", encoder_seed},
  };
  j["model"] = {
      {"pff",
       {{"layers", pff_layers},
        {"heads", pff_heads},
        {"model_dim", pff_model_dim},
        {"ffn_dim", pff_ffn_dim},
        {"dropout", pff_dropout}}},
      {"explain", {{"variant", explain_variant}, {"heads", explain_heads}}},
  };
  j["caption"] = {{"template", caption_template}};
  j["affordance"] = {
      {"beta", beta}, {"prompt_style", prompt_style}, {"eps_norm", eps_norm}};
  j["loss"] = {
      {"alpha", alpha},
      {"eps", loss_eps},
      {"tau", tau},
      {"weights",
       {{"cos", w_cos},
        {"con", w_con},
        {"ce_action", w_ce_action},
        {"ce_object", w_ce_object}}},
      {"include_exo_contrastive", include_exo_contrastive},
  };
  j["train"] = {
      {"batch_size", batch_size},
      {"epochs", epochs},
      {"lr", lr},
      {"weight_decay", weight_decay},
      {"momentum", momentum},
      {"seed", seed},
      {"eval_every", eval_every},
      {"grad_clip", grad_clip},
      {"lr_schedule", lr_schedule},
      {"prompt_labels", prompt_labels},
  };
  return j;
}

namespace {

// Recursive merge of `user` over `base`; any key absent from `base` is
// rejected so typos surface immediately.
void merge_checked(Json& base, const Json& user, const std::string& prefix) {
  if (!user.is_object())
    throw ConfigError("config section '" + (prefix.empty() ? "<root>" : prefix) +
                      "' must be an object");
  for (const auto& [key, val] : user.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!base.contains(key)) throw ConfigError("unknown config key: " + path);
    if (base[key].is_object()) {
      merge_checked(base[key], val, path);
    } else {
      base[key] = val;
    }
  }
}

template <typename T>
T get(const Json& j, const std::string& dotted) {
  const Json* cur = &j;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot - start);
    if (!cur->contains(key)) throw ConfigError("missing config key: " + dotted);
    cur = &(*cur)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  try {
    return cur->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config key has wrong type: " + dotted);
  }
}

}  // namespace

RunConfig RunConfig::from_json(const Json& user) {
  Json j = default_json();
  merge_checked(j, user, "");

  RunConfig c;
  c.data_root = get<std::string>(j, "data.root");
  c.setting = setting_from_string(get<std::string>(j, "data.setting"));
  c.k_exo = get<int>(j, "data.k_exo");
  c.synthetic.n_actions = get<int>(j, "data.synthetic.n_actions");
  c.synthetic.n_objects = get<int>(j, "data.synthetic.n_objects");
  c.synthetic.samples_per_pair = get<int>(j, "data.synthetic.samples_per_pair");
  c.synthetic.image_h = get<int>(j, "data.synthetic.image_h");
  c.synthetic.image_w = get<int>(j, "data.synthetic.image_w");
  c.synthetic.k_exo = get<int>(j, "data.synthetic.k_exo");
  c.synthetic.seed = get<std::uint64_t>(j, "data.synthetic.seed");
  c.synthetic.blob_sigma = get<double>(j, "data.synthetic.blob_sigma");

  c.pure.kind = get<std::string>(j, "encoder.pure.kind");
  c.pure.dim = get<int>(j, "encoder.pure.dim");
  c.pure.weights = get<std::string>(j, "encoder.pure.weights");
  c.multimodal.kind = get<std::string>(j, "encoder.multimodal.kind");
  c.multimodal.dim = get<int>(j, "encoder.multimodal.dim");
  c.multimodal.weights = get<std::string>(j, "encoder.multimodal.weights");
  c.text_kind = get<std::string>(j, "encoder.text.kind");
  c.text_weights = get<std::string>(j, "encoder.text.weights");
  c.patch = get<int>(j, "encoder.patch");
  c.input_size = get<int>(j, "encoder.input_size");
  c.encoder_seed = get<std::uint64_t>(j, "encoder.seed");

  c.pff_layers = get<int>(j, "model.pff.layers");
  c.pff_heads = get<int>(j, "model.pff.heads");
  c.pff_model_dim = get<int>(j, "model.pff.model_dim");
  c.pff_ffn_dim = get<int>(j, "model.pff.ffn_dim");
  c.pff_dropout = get<double>(j, "model.pff.dropout");
  c.explain_variant = get<std::string>(j, "model.explain.variant");
  c.explain_heads = get<int>(j, "model.explain.heads");

  c.caption_template = get<std::string>(j, "caption.template");

  c.beta = get<double>(j, "affordance.beta");
  c.prompt_style = get<std::string>(j, "affordance.prompt_style");
  c.eps_norm = get<double>(j, "affordance.eps_norm");

  c.alpha = get<double>(j, "loss.alpha");
  c.loss_eps = get<double>(j, "loss.eps");
  c.tau = get<double>(j, "loss.tau");
  c.w_cos = get<double>(j, "loss.weights.cos");
  c.w_con = get<double>(j, "loss.weights.con");
  c.w_ce_action = get<double>(j, "loss.weights.ce_action");
  c.w_ce_object = get<double>(j, "loss.weights.ce_object");
  c.include_exo_contrastive = get<bool>(j, "loss.include_exo_contrastive");

  c.batch_size = get<int>(j, "train.batch_size");
  c.epochs = get<int>(j, "train.epochs");
  c.lr = get<double>(j, "train.lr");
  c.weight_decay = get<double>(j, "train.weight_decay");
  c.momentum = get<double>(j, "train.momentum");
  c.seed = get<std::uint64_t>(j, "train.seed");
  c.eval_every = get<int>(j, "train.eval_every");
  c.grad_clip = get<double>(j, "train.grad_clip");
  c.lr_schedule = get<std::string>(j, "train.lr_schedule");
  c.prompt_labels = get<std::string>(j, "train.prompt_labels");
  return c;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path.string());
  Json j;
  try {
    j = Json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file is not valid JSON: " + path.string() + ": " +
                      e.what());
  }
  return from_json(j);
}

void RunConfig::apply_override(const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override must look like key.path=value: '" + assignment +
                      "'");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  Json val;
  try {
    val = Json::parse(raw);
  } catch (const nlohmann::json::exception&) {
    val = raw;  // unquoted strings are fine on the command line
  }
  // Rebuild the nested object {a:{b:{c:val}}} and merge it.
  Json patch = val;
  std::size_t pos = key.size();
  while (true) {
    const std::size_t dot = key.rfind('.', pos - 1);
    const std::string part =
        key.substr(dot == std::string::npos ? 0 : dot + 1,
                   pos - (dot == std::string::npos ? 0 : dot + 1));
    Json wrap;
    wrap[part] = patch;
    patch = wrap;
    if (dot == std::string::npos) break;
    pos = dot;
  }
  Json full = to_json();
  merge_checked(full, patch, "");
  *this = from_json(full);
}

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(setting == Setting::seen || setting == Setting::unseen, "bad setting");
  require(k_exo >= 1, "data.k_exo must be >= 1");
  require(synthetic.n_actions >= 2, "data.synthetic.n_actions must be >= 2");
  require(synthetic.n_objects >= 2, "data.synthetic.n_objects must be >= 2");
  require(synthetic.samples_per_pair >= 1,
          "data.synthetic.samples_per_pair must be >= 1");
  require(synthetic.image_h > 0 && synthetic.image_w > 0,
          "synthetic image size must be positive");
  require(synthetic.k_exo >= 1, "data.synthetic.k_exo must be >= 1");
  require(synthetic.blob_sigma > 0, "data.synthetic.blob_sigma must be > 0");

  for (const auto* e : {&pure, &multimodal}) {
    require(e->kind == "toy" || e->kind == "pretrained",
            "encoder kind must be toy or pretrained");
    require(e->dim > 0, "encoder dim must be positive");
    require(e->kind != "pretrained" || !e->weights.empty(),
            "pretrained encoder needs a weights path");
  }
  require(text_kind == "toy" || text_kind == "pretrained",
          "encoder.text.kind must be toy or pretrained");
  require(patch > 0, "encoder.patch must be positive");
  require(input_size > 0 && input_size % patch == 0,
          "encoder.input_size must be a positive multiple of encoder.patch");

  require(pff_layers >= 1, "model.pff.layers must be >= 1");
  require(pff_heads >= 1 && pff_model_dim % pff_heads == 0,
          "model.pff.model_dim must be divisible by model.pff.heads");
  require(pff_ffn_dim >= 1, "model.pff.ffn_dim must be >= 1");
  require(pff_dropout >= 0.0 && pff_dropout < 1.0,
          "model.pff.dropout must be in [0,1)");
  require(explain_variant == "ffn_softmax" ||
              explain_variant == "concat_avgpool" ||
              explain_variant == "transformer",
          "model.explain.variant must be ffn_softmax, concat_avgpool or "
          "transformer");
  require(explain_heads >= 1 && pff_model_dim % explain_heads == 0,
          "model.pff.model_dim must be divisible by model.explain.heads");

  try {
    validate_caption_template(caption_template);
  } catch (const TemplateError& e) {
    throw ConfigError(e.what());
  }

  require(beta >= 0.0 && beta < 1.0, "affordance.beta must be in [0,1)");
  require(prompt_style == "pair" || prompt_style == "template",
          "affordance.prompt_style must be pair or template");
  require(eps_norm > 0.0, "affordance.eps_norm must be > 0");

  require(alpha >= 0.0 && alpha <= 1.0, "loss.alpha must be in [0,1]");
  require(loss_eps > 0.0, "loss.eps must be > 0");
  require(tau > 0.0, "loss.tau must be > 0");
  require(w_cos >= 0 && w_con >= 0 && w_ce_action >= 0 && w_ce_object >= 0,
          "loss weights must be non-negative");
  require(w_cos + w_con + w_ce_action + w_ce_object > 0.0,
          "at least one loss weight must be positive");

  require(batch_size >= 1, "train.batch_size must be >= 1");
  require(epochs >= 1, "train.epochs must be >= 1");
  require(lr > 0.0, "train.lr must be > 0");
  require(weight_decay >= 0.0, "train.weight_decay must be >= 0");
  require(momentum >= 0.0 && momentum < 1.0, "train.momentum must be in [0,1)");
  require(eval_every >= 1, "train.eval_every must be >= 1");
  require(grad_clip >= 0.0, "train.grad_clip must be >= 0");
  require(lr_schedule == "constant" || lr_schedule == "cosine",
          "train.lr_schedule must be constant or cosine");
  require(prompt_labels == "gt" || prompt_labels == "predicted",
          "train.prompt_labels must be gt or predicted");
}

std::uint64_t RunConfig::hash() const { return fnv1a(to_json().dump()); }

std::filesystem::path RunConfig::resolved_data_root() const {
  if (!data_root.empty()) return data_root;
  if (const char* env = std::getenv("SEA_DATA_ROOT"); env && *env)
    return std::filesystem::path(env);
  throw ConfigError(
      "data.root is not set (config key data.root or SEA_DATA_ROOT)");
}

}  // namespace sea
