#include "sea/data/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "sea/errors.hpp"
#include "sea/rng.hpp"

namespace sea::data {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

Matrix Sample::load_gt() const {
  if (gt_path.empty())
    throw SchemaError("sample '" + id + "' has no ground-truth heatmap");
  Matrix m = gray_to_unit(load_gray(gt_path));
  if (m.maxCoeff() <= 0.0)
    throw SchemaError("ground-truth heatmap is all-zero: " + gt_path);
  return m;
}

VocabPair load_vocabularies(const fs::path& root) {
  return VocabPair{
      Vocabulary::from_file(Vocabulary::Kind::action, root / "actions.txt"),
      Vocabulary::from_file(Vocabulary::Kind::object, root / "objects.txt")};
}

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool contains_ci(const std::string& haystack, const std::string& needle) {
  return lower(haystack).find(lower(needle)) != std::string::npos;
}

AnnotationRecord parse_record(const Json& j, int line_no) {
  auto field = [&](const char* key) -> std::string {
    if (!j.contains(key) || !j[key].is_string())
      throw SchemaError("annotations.jsonl line " + std::to_string(line_no) +
                        ": missing string field '" + key + "'");
    return j[key].get<std::string>();
  };
  AnnotationRecord r;
  r.image = field("image");
  r.view = field("view");
  r.action = field("action");
  r.object = field("object");
  r.caption = field("caption");
  r.split = split_from_string(field("split"));
  r.setting = setting_from_string(field("setting"));
  if (r.view != "exocentric" && r.view != "egocentric")
    throw SchemaError("annotations.jsonl line " + std::to_string(line_no) +
                      ": bad view '" + r.view + "'");
  return r;
}

}  // namespace

std::vector<Sample> load_dataset(const fs::path& root, Setting setting,
                                 Split split, const VocabPair& vocab) {
  const fs::path ann_path = root / "annotations.jsonl";
  std::ifstream is(ann_path);
  if (!is)
    throw LoadError("missing annotation file: " + ann_path.string());

  std::vector<AnnotationRecord> egos;
  std::map<std::pair<std::string, std::string>,
           std::shared_ptr<std::vector<std::string>>>
      pools;

  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError("annotations.jsonl line " + std::to_string(line_no) +
                        ": " + e.what());
    }
    AnnotationRecord r = parse_record(j, line_no);
    if (r.setting != setting) continue;

    // Validate labels and caption for every record of this setting, so a
    // broken dataset fails loudly regardless of the requested split.
    if (!vocab.actions.try_id(r.action))
      throw SchemaError("record '" + r.image + "': action '" + r.action +
                        "' not in vocabulary");
    if (!vocab.objects.try_id(r.object))
      throw SchemaError("record '" + r.image + "': object '" + r.object +
                        "' not in vocabulary");
    if (!contains_ci(r.caption, r.action) || !contains_ci(r.caption, r.object))
      throw SchemaError("record '" + r.image +
                        "': caption does not mention both labels: '" +
                        r.caption + "'");

    if (r.view == "exocentric") {
      if (r.split == Split::train) {
        auto key = std::make_pair(r.action, r.object);
        auto& pool = pools[key];
        if (!pool) pool = std::make_shared<std::vector<std::string>>();
        pool->push_back((root / r.image).string());
      }
      continue;
    }
    if (r.split == split) egos.push_back(std::move(r));
  }

  static const auto empty_pool =
      std::make_shared<const std::vector<std::string>>();

  std::vector<Sample> samples;
  samples.reserve(egos.size());
  for (const auto& r : egos) {
    Sample s;
    s.id = r.image;
    s.ego_path = (root / r.image).string();
    if (!fs::exists(s.ego_path))
      throw SchemaError("record '" + r.image + "': image file missing");
    s.action_id = vocab.actions.id_of(r.action);
    s.object_id = vocab.objects.id_of(r.object);
    s.caption = r.caption;
    s.split = r.split;
    s.setting = r.setting;
    auto it = pools.find(std::make_pair(r.action, r.object));
    s.exo_pool = it != pools.end()
                     ? std::shared_ptr<const std::vector<std::string>>(it->second)
                     : empty_pool;

    if (split == Split::test) {
      // testset/egocentric/... -> testset/GT/... with a .png extension
      std::string gt = r.image;
      const std::string needle = "/egocentric/";
      const std::size_t pos = gt.find(needle);
      if (pos == std::string::npos)
        throw SchemaError("record '" + r.image +
                          "': test image not under an egocentric directory");
      gt.replace(pos, needle.size(), "/GT/");
      const std::size_t dot = gt.rfind('.');
      gt = gt.substr(0, dot) + ".png";
      s.gt_path = (root / gt).string();
      if (!fs::exists(s.gt_path))
        throw SchemaError("record '" + r.image +
                          "': missing ground-truth heatmap " + gt);
      s.load_gt();  // enforces max > 0 up front
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

std::vector<std::string> sample_exocentrics(const Sample& sample, int k,
                                            std::uint64_t rng_seed) {
  if (k <= 0)
    throw InputError("sample_exocentrics: k must be positive, got " +
                     std::to_string(k));
  if (!sample.exo_pool || sample.exo_pool->empty())
    throw DataError("no exocentric images for sample '" + sample.id + "'");
  const auto& pool = *sample.exo_pool;
  Rng rng(rng_seed);
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(k));
  if (pool.size() >= static_cast<std::size_t>(k)) {
    // Partial Fisher-Yates: k distinct draws.
    std::vector<std::size_t> idx(pool.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (int i = 0; i < k; ++i) {
      const std::size_t j =
          i + static_cast<std::size_t>(rng.below(idx.size() - i));
      std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
      out.push_back(pool[idx[static_cast<std::size_t>(i)]]);
    }
  } else {
    for (int i = 0; i < k; ++i)
      out.push_back(pool[static_cast<std::size_t>(rng.below(pool.size()))]);
  }
  return out;
}

}  // namespace sea::data
