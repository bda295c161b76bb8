#include "sea/data/vocabulary.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "sea/errors.hpp"

namespace sea::data {

Vocabulary Vocabulary::from_labels(Kind kind, std::vector<std::string> labels) {
  Vocabulary v;
  v.kind_ = kind;
  v.labels_ = std::move(labels);
  for (std::size_t i = 0; i < v.labels_.size(); ++i) {
    const std::string& l = v.labels_[i];
    if (l.empty()) throw SchemaError("vocabulary label is empty");
    if (std::any_of(l.begin(), l.end(), [](unsigned char c) {
          return std::isupper(c) || std::isspace(c);
        }))
      throw SchemaError("vocabulary label must be lowercase without spaces: '" +
                        l + "'");
    if (!v.index_.emplace(l, static_cast<int>(i)).second)
      throw SchemaError("duplicate vocabulary label: '" + l + "'");
  }
  return v;
}

Vocabulary Vocabulary::from_file(Kind kind, const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw LoadError("cannot open vocabulary file: " + path.string());
  std::vector<std::string> labels;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) labels.push_back(line);
  }
  if (labels.empty())
    throw LoadError("vocabulary file is empty: " + path.string());
  return from_labels(kind, std::move(labels));
}

const std::string& Vocabulary::label(int id) const {
  if (id < 0 || id >= size())
    throw SchemaError("vocabulary id out of range: " + std::to_string(id));
  return labels_[static_cast<std::size_t>(id)];
}

int Vocabulary::id_of(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end())
    throw SchemaError("label not in vocabulary: '" + label + "'");
  return it->second;
}

std::optional<int> Vocabulary::try_id(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

}  // namespace sea::data
