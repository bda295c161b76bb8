#pragma once

#include <string>
#include <utility>

namespace sea {

// Throws TemplateError unless `tmpl` contains "[action]" and "[object]"
// exactly once each.
void validate_caption_template(const std::string& tmpl);

// Substitutes the two placeholders; no other characters change.
std::string render_caption(const std::string& action, const std::string& object,
                           const std::string& tmpl);

// Inverse of render_caption for the given template. The leftmost placeholder
// is matched non-greedily, so recovery is exact whenever the first slot's
// value does not contain the separator literal.
std::pair<std::string, std::string> parse_caption(const std::string& caption,
                                                  const std::string& tmpl);

}  // namespace sea
