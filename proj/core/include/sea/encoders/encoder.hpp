#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <unordered_map>

#include "sea/config.hpp"
#include "sea/image.hpp"

namespace sea::enc {

enum class Family { pure_visual, multimodal_visual, text };
enum class Source { pure, multimodal, fused };
enum class Domain { exo, ego };

struct EncoderSpec {
  Family family = Family::pure_visual;
  int dim = 64;
  int patch = 16;
  int input_size = 224;
  bool frozen = true;  // always; encoders never receive gradients
  std::uint64_t seed = 0;
  // Amplitude of the sinusoidal position table. The multimodal toy encoder
  // runs position-free (0.0): its patch embeddings must be addressable by
  // content alone so that text-visual alignment attaches to what a patch
  // shows rather than where it sits.
  double pos_scale = 1.0;
};

// Spatial grid of embeddings; tokens are stored row-major, token (i, j) of an
// h x w grid is row i*w + j.
struct FeatureMap {
  int h = 0;
  int w = 0;
  int img_h = 0;  // canonical image resolution the grid was computed from
  int img_w = 0;
  Matrix tokens;  // (h*w) x d
  Source source = Source::pure;
  Family origin = Family::pure_visual;
  Domain domain = Domain::ego;

  int dim() const { return static_cast<int>(tokens.cols()); }
  int count() const { return static_cast<int>(tokens.rows()); }
};

struct TextEmbedding {
  Eigen::RowVectorXd vec;
  std::string prompt;
};

class VisualEncoder {
 public:
  virtual ~VisualEncoder() = default;
  virtual FeatureMap encode(const Image& image, Domain domain) const = 0;
  virtual int dim() const = 0;
  virtual int patch() const = 0;
  virtual int input_size() const = 0;
  virtual std::uint64_t checksum() const = 0;
};

class TextEncoder {
 public:
  virtual ~TextEncoder() = default;
  virtual TextEmbedding encode(const std::string& prompt) const = 0;
  virtual int dim() const = 0;
  virtual std::uint64_t checksum() const = 0;
};

// Frozen linear projection of flattened patches plus a fixed sinusoidal
// position table. The toy flavor draws the projection from a seed; the
// pretrained flavor loads it (and optionally the position table) from a
// matrix blob, so exported patch-embedding weights run behind the same
// interface.
class PatchProjectionEncoder : public VisualEncoder {
 public:
  static std::unique_ptr<PatchProjectionEncoder> toy(const EncoderSpec& spec);
  static std::unique_ptr<PatchProjectionEncoder> from_weights(
      const std::filesystem::path& path, const EncoderSpec& spec);

  FeatureMap encode(const Image& image, Domain domain) const override;
  int dim() const override { return static_cast<int>(proj_.rows()); }
  int patch() const override { return patch_; }
  int input_size() const override { return input_size_; }
  std::uint64_t checksum() const override;

 private:
  Matrix proj_;  // dim x (patch*patch*3)
  Matrix pos_;   // (grid*grid) x dim
  int patch_ = 16;
  int input_size_ = 224;
  Family family_ = Family::pure_visual;
};

// Deterministic bag-of-tokens text encoder: whitespace tokens hash to seeded
// Gaussian vectors, mean-pooled. Equal prompts give equal embeddings.
class HashedBagTextEncoder : public TextEncoder {
 public:
  HashedBagTextEncoder(int dim, std::uint64_t seed) : dim_(dim), seed_(seed) {}
  TextEmbedding encode(const std::string& prompt) const override;
  int dim() const override { return dim_; }
  std::uint64_t checksum() const override;

 private:
  int dim_;
  std::uint64_t seed_;
};

// Adapter over an exported token-embedding table (JSON: {"dim": d,
// "tokens": {tok: [d floats], ...}, "default": [d floats]}). Tokens missing
// from the table fall back to "default".
class TableTextEncoder : public TextEncoder {
 public:
  static std::unique_ptr<TableTextEncoder> from_file(
      const std::filesystem::path& path);
  TextEmbedding encode(const std::string& prompt) const override;
  int dim() const override { return dim_; }
  std::uint64_t checksum() const override;

 private:
  int dim_ = 0;
  std::unordered_map<std::string, Eigen::RowVectorXd> table_;
  Eigen::RowVectorXd fallback_;
};

struct EncoderSet {
  std::unique_ptr<VisualEncoder> pure;
  std::unique_ptr<VisualEncoder> multimodal;
  std::unique_ptr<TextEncoder> text;

  static EncoderSet from_config(const RunConfig& cfg);
  std::uint64_t checksum() const;
};

// Writes a visual-encoder weights blob ("proj" required, "pos" optional).
void save_patch_encoder_weights(const std::filesystem::path& path,
                                const Matrix& proj, const Matrix* pos = nullptr);

}  // namespace sea::enc
