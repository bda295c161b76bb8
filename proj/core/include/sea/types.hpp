#pragma once

#include <string>

namespace sea {

enum class Split { train, test };
enum class Setting { seen, unseen };

std::string to_string(Split s);
std::string to_string(Setting s);
Split split_from_string(const std::string& s);      // throws SchemaError
Setting setting_from_string(const std::string& s);  // throws SchemaError

}  // namespace sea
