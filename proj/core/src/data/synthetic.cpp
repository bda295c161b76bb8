#include "sea/data/synthetic.hpp"

#include <array>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "sea/errors.hpp"
#include "sea/hash.hpp"
#include "sea/rng.hpp"

namespace sea::data {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

const std::array<const char*, 9> kActionNames = {
    "press", "lift", "push", "pull", "grab", "rotate", "slide", "hold", "tap"};

const std::array<const char*, 8> kObjectNames = {
    "circle", "square", "triangle", "diamond", "ring", "cross", "hbar", "vbar"};

struct Rgb {
  std::uint8_t r, g, b;
};

const std::array<Rgb, 8> kPalette = {{{200, 40, 40},
                                      {40, 80, 200},
                                      {40, 160, 60},
                                      {230, 140, 30},
                                      {140, 60, 180},
                                      {30, 160, 160},
                                      {150, 100, 50},
                                      {200, 50, 150}}};

bool inside_shape(int object_id, double dx, double dy, double r) {
  const double ax = std::abs(dx), ay = std::abs(dy);
  switch (object_id) {
    case 0:  // circle
      return dx * dx + dy * dy <= r * r;
    case 1:  // square
      return ax <= 0.9 * r && ay <= 0.9 * r;
    case 2: {  // upward triangle
      if (dy < -r || dy > r) return false;
      const double half = 0.5 * (dy + r);
      return ax <= half;
    }
    case 3:  // diamond
      return ax + ay <= r;
    case 4: {  // ring
      const double d2 = dx * dx + dy * dy;
      return d2 <= r * r && d2 >= 0.3 * r * r;
    }
    case 5:  // cross
      return (ax <= 0.35 * r || ay <= 0.35 * r) && ax <= r && ay <= r;
    case 6:  // hbar
      return ay <= 0.4 * r && ax <= r;
    case 7:  // vbar
      return ax <= 0.4 * r && ay <= r;
    default:
      return false;
  }
}

struct Placement {
  double cx, cy, r;
};

// Anchor grid for actions: 3x3 positions in reading order. The fractions are
// odd multiples of 1/8 so anchors sit mid-patch for power-of-two image sizes
// with common patch sizes, instead of straddling patch corners.
const std::array<double, 3> kAnchorFracs = {0.125, 0.375, 0.875};

Placement place_shape(const SyntheticConfig& cfg, int action_id, Rng& rng) {
  const double fx = kAnchorFracs[static_cast<std::size_t>(action_id % 3)];
  const double fy = kAnchorFracs[static_cast<std::size_t>(action_id / 3)];
  const double base_r = 0.15 * std::min(cfg.image_h, cfg.image_w);
  Placement p;
  p.r = base_r * rng.uniform(0.85, 1.15);
  p.cx = fx * cfg.image_w + rng.uniform(-0.015, 0.015) * cfg.image_w;
  p.cy = fy * cfg.image_h + rng.uniform(-0.015, 0.015) * cfg.image_h;
  p.cx = std::clamp(p.cx, p.r + 1.0, cfg.image_w - p.r - 2.0);
  p.cy = std::clamp(p.cy, p.r + 1.0, cfg.image_h - p.r - 2.0);
  return p;
}

Image render(const SyntheticConfig& cfg, int action_id, int object_id,
             bool with_hand, Placement* out_place, Rng& rng) {
  Image img = Image::filled(cfg.image_h, cfg.image_w, 200, 200, 200);
  for (int y = 0; y < cfg.image_h; ++y)
    for (int x = 0; x < cfg.image_w; ++x) {
      const int noise = static_cast<int>(rng.below(9)) - 4;
      std::uint8_t* px = img.px(y, x);
      for (int c = 0; c < 3; ++c)
        px[c] = static_cast<std::uint8_t>(std::clamp(px[c] + noise, 0, 255));
    }

  const Placement p = place_shape(cfg, action_id, rng);
  const Rgb color = kPalette[static_cast<std::size_t>(object_id)];
  for (int y = 0; y < cfg.image_h; ++y)
    for (int x = 0; x < cfg.image_w; ++x)
      if (inside_shape(object_id, x - p.cx, y - p.cy, p.r)) {
        std::uint8_t* px = img.px(y, x);
        px[0] = color.r;
        px[1] = color.g;
        px[2] = color.b;
      }

  if (with_hand) {
    // A skin-toned "hand" overlapping the interaction region.
    const int x0 = static_cast<int>(p.cx - 0.3 * p.r);
    const int x1 = static_cast<int>(p.cx + p.r);
    const int y0 = static_cast<int>(p.cy);
    const int y1 = static_cast<int>(p.cy + 1.6 * p.r);
    for (int y = std::max(0, y0); y <= std::min(cfg.image_h - 1, y1); ++y)
      for (int x = std::max(0, x0); x <= std::min(cfg.image_w - 1, x1); ++x) {
        std::uint8_t* px = img.px(y, x);
        px[0] = 224;
        px[1] = 172;
        px[2] = 105;
      }
  }

  if (out_place) *out_place = p;
  return img;
}

Matrix gaussian_blob(int h, int w, double cx, double cy, double sigma) {
  Matrix m(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
      m(y, x) = std::exp(-d2 / (2.0 * sigma * sigma));
    }
  const double lo = m.minCoeff(), hi = m.maxCoeff();
  return (m.array() - lo).matrix() / (hi - lo);
}

const std::array<const char*, 3> kCaptionForms = {
    "i will %a the %o", "i am going to %a the %o", "now i %a the %o"};

std::string make_caption(const std::string& action, const std::string& object,
                         Rng& rng) {
  std::string s = kCaptionForms[static_cast<std::size_t>(rng.below(3))];
  s.replace(s.find("%a"), 2, action);
  s.replace(s.find("%o"), 2, object);
  return s;
}

}  // namespace

void SyntheticConfig::validate() const {
  if (n_actions < 2 || n_actions > static_cast<int>(kActionNames.size()))
    throw ConfigError("synthetic n_actions must be in [2, 9]");
  if (n_objects < 2 || n_objects > static_cast<int>(kObjectNames.size()))
    throw ConfigError("synthetic n_objects must be in [2, 8]");
  if (samples_per_pair < 1)
    throw ConfigError("synthetic samples_per_pair must be >= 1");
  if (image_h < 16 || image_w < 16)
    throw ConfigError("synthetic image size must be at least 16x16");
  if (k_exo < 1) throw ConfigError("synthetic k_exo must be >= 1");
  if (blob_sigma <= 0) throw ConfigError("synthetic blob_sigma must be > 0");
}

DatasetManifest generate_synthetic(const SyntheticConfig& cfg,
                                   const fs::path& out_root) {
  cfg.validate();
  fs::create_directories(out_root);

  DatasetManifest mf;
  for (int a = 0; a < cfg.n_actions; ++a)
    mf.actions.emplace_back(kActionNames[static_cast<std::size_t>(a)]);
  for (int o = 0; o < cfg.n_objects; ++o)
    mf.objects.emplace_back(kObjectNames[static_cast<std::size_t>(o)]);

  auto write_lines = [&](const fs::path& p, const std::vector<std::string>& v) {
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot write " + p.string());
    for (const auto& s : v) os << s << '\n';
  };
  write_lines(out_root / "actions.txt", mf.actions);
  write_lines(out_root / "objects.txt", mf.objects);

  // Unseen: the last max(1, n/3) object classes appear only in the test set.
  int first_test_object = 0;
  int last_train_object = cfg.n_objects;  // exclusive
  if (cfg.setting == Setting::unseen) {
    const int n_test = std::max(1, cfg.n_objects / 3);
    first_test_object = cfg.n_objects - n_test;
    last_train_object = first_test_object;
  }

  const std::string setting_dir =
      cfg.setting == Setting::seen ? "Seen" : "Unseen";
  const std::string setting_str = to_string(cfg.setting);
  const int n_exo = std::max(cfg.samples_per_pair, cfg.k_exo);
  const int n_test = std::max(1, cfg.samples_per_pair / 4);

  auto emit = [&](const std::string& rel, const std::string& view, int a, int o,
                  Split split, bool with_hand, bool with_gt) {
    const fs::path abs = out_root / rel;
    fs::create_directories(abs.parent_path());
    Rng rng(mix_seed(cfg.seed, fnv1a(rel)));
    Placement place{};
    Image img = render(cfg, a, o, with_hand, &place, rng);
    save_jpeg(abs, img);
    if (with_gt) {
      std::string gt_rel = rel;
      const std::string needle = "/egocentric/";
      gt_rel.replace(gt_rel.find(needle), needle.size(), "/GT/");
      gt_rel = gt_rel.substr(0, gt_rel.rfind('.')) + ".png";
      const fs::path gt_abs = out_root / gt_rel;
      fs::create_directories(gt_abs.parent_path());
      save_gray_png(gt_abs, unit_to_gray(gaussian_blob(
                                cfg.image_h, cfg.image_w, place.cx, place.cy,
                                cfg.blob_sigma)));
    }
    Rng cap_rng(mix_seed(cfg.seed, fnv1a(rel + "#caption")));
    AnnotationRecord r;
    r.image = rel;
    r.view = view;
    r.action = mf.actions[static_cast<std::size_t>(a)];
    r.object = mf.objects[static_cast<std::size_t>(o)];
    r.caption = make_caption(r.action, r.object, cap_rng);
    r.split = split;
    r.setting = cfg.setting;
    mf.records.push_back(std::move(r));
  };

  char buf[512];
  for (int a = 0; a < cfg.n_actions; ++a) {
    const std::string& an = mf.actions[static_cast<std::size_t>(a)];
    for (int o = 0; o < cfg.n_objects; ++o) {
      const std::string& on = mf.objects[static_cast<std::size_t>(o)];
      if (o < last_train_object) {
        for (int i = 0; i < cfg.samples_per_pair; ++i) {
          std::snprintf(buf, sizeof(buf),
                        "%s/trainset/egocentric/%s/%s/%s_%s_ego_%03d.jpg",
                        setting_dir.c_str(), an.c_str(), on.c_str(), an.c_str(),
                        on.c_str(), i);
          emit(buf, "egocentric", a, o, Split::train, false, false);
          ++mf.train_samples;
        }
        for (int i = 0; i < n_exo; ++i) {
          std::snprintf(buf, sizeof(buf),
                        "%s/trainset/exocentric/%s/%s/%s_%s_exo_%03d.jpg",
                        setting_dir.c_str(), an.c_str(), on.c_str(), an.c_str(),
                        on.c_str(), i);
          emit(buf, "exocentric", a, o, Split::train, true, false);
          ++mf.exo_images;
        }
      }
      const bool in_test =
          cfg.setting == Setting::seen || o >= first_test_object;
      if (in_test) {
        for (int i = 0; i < n_test; ++i) {
          std::snprintf(buf, sizeof(buf),
                        "%s/testset/egocentric/%s/%s/%s_%s_ego_%03d.jpg",
                        setting_dir.c_str(), an.c_str(), on.c_str(), an.c_str(),
                        on.c_str(), i);
          emit(buf, "egocentric", a, o, Split::test, false, true);
          ++mf.test_samples;
        }
      }
    }
  }

  std::string ann;
  for (const auto& r : mf.records) {
    Json j;
    j["image"] = r.image;
    j["view"] = r.view;
    j["action"] = r.action;
    j["object"] = r.object;
    j["caption"] = r.caption;
    j["split"] = to_string(r.split);
    j["setting"] = to_string(r.setting);
    ann += j.dump();
    ann += '\n';
  }
  {
    std::ofstream os(out_root / "annotations.jsonl",
                     std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot write annotations.jsonl");
    os << ann;
  }
  mf.annotations_hash = fnv1a(ann);
  return mf;
}

}  // namespace sea::data
