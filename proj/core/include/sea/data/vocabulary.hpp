#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace sea::data {

// Closed label space with stable contiguous ids.
class Vocabulary {
 public:
  enum class Kind { action, object };

  static Vocabulary from_labels(Kind kind, std::vector<std::string> labels);
  // One lowercase label per line; blank lines ignored.
  static Vocabulary from_file(Kind kind, const std::filesystem::path& path);

  Kind kind() const { return kind_; }
  int size() const { return static_cast<int>(labels_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(int id) const;
  int id_of(const std::string& label) const;  // throws SchemaError
  std::optional<int> try_id(const std::string& label) const;

 private:
  Kind kind_ = Kind::action;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> index_;
};

struct VocabPair {
  Vocabulary actions;
  Vocabulary objects;
};

}  // namespace sea::data
