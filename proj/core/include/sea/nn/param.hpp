#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace sea::nn {

using Matrix = Eigen::MatrixXd;

// A trainable tensor. Frozen encoder weights are NOT Params; anything that
// lives here receives SGD updates and lands in checkpoints.
struct Param {
  std::string name;
  Matrix value;
  Matrix velocity;  // SGD momentum buffer

  Param(std::string n, Matrix v)
      : name(std::move(n)),
        value(std::move(v)),
        velocity(Matrix::Zero(value.rows(), value.cols())) {}
};

using ParamPtr = std::shared_ptr<Param>;

// Ordered, named registry. Registration order is the update and
// serialization order, which keeps runs reproducible.
class ParamStore {
 public:
  ParamPtr create(const std::string& name, Matrix init);
  ParamPtr find(const std::string& name) const;  // nullptr when absent
  const std::vector<ParamPtr>& all() const { return params_; }

  std::size_t scalar_count() const;
  std::uint64_t checksum() const;

  // Flat binary blob: per param {u32 name_len, name, u64 rows, u64 cols,
  // rows*cols little-endian doubles}.
  void save(const std::filesystem::path& path) const;
  // Strict: names, order and shapes must match the registry exactly.
  void load(const std::filesystem::path& path);

 private:
  std::vector<ParamPtr> params_;
};

}  // namespace sea::nn
