#include "sea/types.hpp"

#include "sea/errors.hpp"

namespace sea {

std::string to_string(Split s) { return s == Split::train ? "train" : "test"; }

std::string to_string(Setting s) {
  return s == Setting::seen ? "seen" : "unseen";
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  throw SchemaError("unknown split: '" + s + "'");
}

Setting setting_from_string(const std::string& s) {
  if (s == "seen") return Setting::seen;
  if (s == "unseen") return Setting::unseen;
  throw SchemaError("unknown setting: '" + s + "'");
}

}  // namespace sea
