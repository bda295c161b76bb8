#include "sea/encoders/encoder.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sea/errors.hpp"
#include "sea/hash.hpp"
#include "sea/rng.hpp"

namespace sea::enc {

namespace {

Matrix sinusoidal_positions(int n_tokens, int dim) {
  Matrix pos(n_tokens, dim);
  for (int t = 0; t < n_tokens; ++t)
    for (int k = 0; k < dim; ++k) {
      const double exponent = static_cast<double>(k - (k % 2)) / dim;
      const double angle = t / std::pow(10000.0, exponent);
      pos(t, k) = (k % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  return pos;
}

std::uint64_t matrix_hash(const Matrix& m, std::uint64_t h) {
  return fnv1a(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double), h);
}

// Tiny named-matrix blob, shared by encoder weight files.
void write_blob(const std::filesystem::path& path,
                const std::vector<std::pair<std::string, Matrix>>& mats) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  os.write("SEAW", 4);
  std::uint32_t count = static_cast<std::uint32_t>(mats.size());
  os.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (const auto& [name, m] : mats) {
    std::uint32_t len = static_cast<std::uint32_t>(name.size());
    os.write(reinterpret_cast<const char*>(&len), sizeof(len));
    os.write(name.data(), len);
    std::uint64_t rows = static_cast<std::uint64_t>(m.rows());
    std::uint64_t cols = static_cast<std::uint64_t>(m.cols());
    os.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
    os.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
    os.write(reinterpret_cast<const char*>(m.data()),
             static_cast<std::streamsize>(m.size() * sizeof(double)));
  }
}

std::unordered_map<std::string, Matrix> read_blob(
    const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "SEAW", 4) != 0)
    throw IoError("not an encoder weights blob: " + path.string());
  std::uint32_t count = 0;
  is.read(reinterpret_cast<char*>(&count), sizeof(count));
  std::unordered_map<std::string, Matrix> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint32_t len = 0;
    is.read(reinterpret_cast<char*>(&len), sizeof(len));
    std::string name(len, '\0');
    is.read(name.data(), len);
    std::uint64_t rows = 0, cols = 0;
    is.read(reinterpret_cast<char*>(&rows), sizeof(rows));
    is.read(reinterpret_cast<char*>(&cols), sizeof(cols));
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    is.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
    out.emplace(std::move(name), std::move(m));
  }
  if (!is) throw IoError("truncated weights blob: " + path.string());
  return out;
}

}  // namespace

void save_patch_encoder_weights(const std::filesystem::path& path,
                                const Matrix& proj, const Matrix* pos) {
  std::vector<std::pair<std::string, Matrix>> mats{{"proj", proj}};
  if (pos) mats.emplace_back("pos", *pos);
  write_blob(path, mats);
}

std::unique_ptr<PatchProjectionEncoder> PatchProjectionEncoder::toy(
    const EncoderSpec& spec) {
  if (spec.input_size <= 0 || spec.patch <= 0 ||
      spec.input_size % spec.patch != 0)
    throw ShapeError("encoder input_size must be a positive multiple of patch");
  auto enc = std::unique_ptr<PatchProjectionEncoder>(new PatchProjectionEncoder);
  const int patch_dim = spec.patch * spec.patch * 3;
  Rng rng(spec.seed);
  enc->proj_ = Matrix(spec.dim, patch_dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(patch_dim));
  for (int i = 0; i < spec.dim; ++i)
    for (int j = 0; j < patch_dim; ++j) enc->proj_(i, j) = rng.normal() * scale;
  const int grid = spec.input_size / spec.patch;
  enc->pos_ = spec.pos_scale * sinusoidal_positions(grid * grid, spec.dim);
  enc->patch_ = spec.patch;
  enc->input_size_ = spec.input_size;
  enc->family_ = spec.family;
  return enc;
}

std::unique_ptr<PatchProjectionEncoder> PatchProjectionEncoder::from_weights(
    const std::filesystem::path& path, const EncoderSpec& spec) {
  if (spec.input_size % spec.patch != 0)
    throw ShapeError("encoder input_size must be a positive multiple of patch");
  auto mats = read_blob(path);
  auto it = mats.find("proj");
  if (it == mats.end())
    throw IoError("weights blob has no 'proj' matrix: " + path.string());
  auto enc = std::unique_ptr<PatchProjectionEncoder>(new PatchProjectionEncoder);
  enc->proj_ = std::move(it->second);
  const int patch_dim = spec.patch * spec.patch * 3;
  if (enc->proj_.cols() != patch_dim)
    throw ShapeError("weights 'proj' expects " + std::to_string(patch_dim) +
                     " patch inputs, file has " +
                     std::to_string(enc->proj_.cols()));
  if (enc->proj_.rows() != spec.dim)
    throw ShapeError("weights 'proj' embeds to dim " +
                     std::to_string(enc->proj_.rows()) + ", config says " +
                     std::to_string(spec.dim));
  const int grid = spec.input_size / spec.patch;
  if (auto pit = mats.find("pos"); pit != mats.end()) {
    enc->pos_ = std::move(pit->second);
    if (enc->pos_.rows() != grid * grid || enc->pos_.cols() != spec.dim)
      throw ShapeError("weights 'pos' table has wrong shape");
  } else {
    enc->pos_ = sinusoidal_positions(grid * grid, spec.dim);
  }
  enc->patch_ = spec.patch;
  enc->input_size_ = spec.input_size;
  enc->family_ = spec.family;
  return enc;
}

FeatureMap PatchProjectionEncoder::encode(const Image& image,
                                          Domain domain) const {
  if (image.empty()) throw InputError("encode: empty image");
  const int S = input_size_;
  const int P = patch_;
  const int grid = S / P;

  Matrix ch[3];
  for (int c = 0; c < 3; ++c) {
    Matrix m = channel_to_matrix(image, c);
    ch[c] = (image.h == S && image.w == S) ? std::move(m)
                                           : resize_bilinear(m, S, S);
  }

  FeatureMap fm;
  fm.h = grid;
  fm.w = grid;
  fm.img_h = S;
  fm.img_w = S;
  fm.tokens = Matrix(grid * grid, proj_.rows());
  Eigen::VectorXd patch_vec(P * P * 3);
  for (int ti = 0; ti < grid; ++ti)
    for (int tj = 0; tj < grid; ++tj) {
      for (int py = 0; py < P; ++py)
        for (int px = 0; px < P; ++px)
          for (int c = 0; c < 3; ++c)
            patch_vec((py * P + px) * 3 + c) = ch[c](ti * P + py, tj * P + px);
      const int t = ti * grid + tj;
      fm.tokens.row(t) = (proj_ * patch_vec).transpose() + pos_.row(t);
    }
  fm.source =
      family_ == Family::pure_visual ? Source::pure : Source::multimodal;
  fm.origin = family_;
  fm.domain = domain;
  return fm;
}

std::uint64_t PatchProjectionEncoder::checksum() const {
  std::uint64_t h = fnv1a("patch_projection");
  h = matrix_hash(proj_, h);
  h = matrix_hash(pos_, h);
  return h;
}

namespace {

std::vector<std::string> whitespace_tokens(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

}  // namespace

TextEmbedding HashedBagTextEncoder::encode(const std::string& prompt) const {
  const auto tokens = whitespace_tokens(prompt);
  if (tokens.empty()) throw InputError("encode_text: empty prompt");
  Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(dim_);
  for (const auto& tok : tokens) {
    Rng rng(mix_seed(seed_, fnv1a(tok)));
    for (int i = 0; i < dim_; ++i) acc(i) += rng.normal();
  }
  acc /= static_cast<double>(tokens.size());
  return TextEmbedding{std::move(acc), prompt};
}

std::uint64_t HashedBagTextEncoder::checksum() const {
  std::uint64_t h = fnv1a("hashed_bag_text");
  h = fnv1a(&seed_, sizeof(seed_), h);
  h = fnv1a(&dim_, sizeof(dim_), h);
  return h;
}

std::unique_ptr<TableTextEncoder> TableTextEncoder::from_file(
    const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad text-encoder table: " + std::string(e.what()));
  }
  auto enc = std::unique_ptr<TableTextEncoder>(new TableTextEncoder);
  enc->dim_ = j.at("dim").get<int>();
  if (enc->dim_ <= 0) throw IoError("text-encoder table: dim must be positive");
  auto to_vec = [&](const nlohmann::json& arr) {
    if (!arr.is_array() || static_cast<int>(arr.size()) != enc->dim_)
      throw IoError("text-encoder table: vector length != dim");
    Eigen::RowVectorXd v(enc->dim_);
    for (int i = 0; i < enc->dim_; ++i) v(i) = arr[static_cast<std::size_t>(i)].get<double>();
    return v;
  };
  enc->fallback_ = to_vec(j.at("default"));
  for (const auto& [tok, arr] : j.at("tokens").items())
    enc->table_.emplace(tok, to_vec(arr));
  return enc;
}

TextEmbedding TableTextEncoder::encode(const std::string& prompt) const {
  const auto tokens = whitespace_tokens(prompt);
  if (tokens.empty()) throw InputError("encode_text: empty prompt");
  Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(dim_);
  for (const auto& tok : tokens) {
    auto it = table_.find(tok);
    acc += it != table_.end() ? it->second : fallback_;
  }
  acc /= static_cast<double>(tokens.size());
  return TextEmbedding{std::move(acc), prompt};
}

std::uint64_t TableTextEncoder::checksum() const {
  std::uint64_t h = fnv1a("table_text");
  // Order-independent combine so the hash ignores map iteration order.
  std::uint64_t sum = 0;
  for (const auto& [tok, vec] : table_)
    sum += matrix_hash(vec, fnv1a(tok));
  h = fnv1a(&sum, sizeof(sum), h);
  h = matrix_hash(fallback_, h);
  return h;
}

EncoderSet EncoderSet::from_config(const RunConfig& cfg) {
  EncoderSet set;
  // Content-dominant features with a mild positional component, roughly how
  // a self-supervised ViT's patch features behave.
  EncoderSpec pure_spec{Family::pure_visual, cfg.pure.dim, cfg.patch,
                        cfg.input_size, true,
                        mix_seed(cfg.encoder_seed, 0xA11CEULL),
                        /*pos_scale=*/0.3};
  set.pure = cfg.pure.kind == "toy"
                 ? PatchProjectionEncoder::toy(pure_spec)
                 : PatchProjectionEncoder::from_weights(cfg.pure.weights,
                                                        pure_spec);

  EncoderSpec mm_spec{Family::multimodal_visual, cfg.multimodal.dim, cfg.patch,
                      cfg.input_size, true,
                      mix_seed(cfg.encoder_seed, 0xB0BULL),
                      /*pos_scale=*/0.0};
  set.multimodal =
      cfg.multimodal.kind == "toy"
          ? PatchProjectionEncoder::toy(mm_spec)
          : PatchProjectionEncoder::from_weights(cfg.multimodal.weights,
                                                 mm_spec);

  if (cfg.text_kind == "toy") {
    set.text = std::make_unique<HashedBagTextEncoder>(
        cfg.multimodal.dim, mix_seed(cfg.encoder_seed, 0x7E47ULL));
  } else {
    set.text = TableTextEncoder::from_file(cfg.text_weights);
  }
  // Eq-style similarity needs the text and multimodal-visual embeddings in
  // one space; same dimensionality is the contract.
  if (set.text->dim() != set.multimodal->dim())
    throw ConfigError("text encoder dim " + std::to_string(set.text->dim()) +
                      " != multimodal encoder dim " +
                      std::to_string(set.multimodal->dim()));
  return set;
}

std::uint64_t EncoderSet::checksum() const {
  std::uint64_t h = pure->checksum();
  const std::uint64_t m = multimodal->checksum(), t = text->checksum();
  h = fnv1a(&m, sizeof(m), h);
  h = fnv1a(&t, sizeof(t), h);
  return h;
}

}  // namespace sea::enc
