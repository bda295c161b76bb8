#include "sea/caption.hpp"

#include "sea/errors.hpp"

namespace sea {

namespace {

constexpr const char* kActionSlot = "[action]";
constexpr const char* kObjectSlot = "[object]";

int count_occurrences(const std::string& s, const std::string& needle) {
  int n = 0;
  for (std::size_t pos = s.find(needle); pos != std::string::npos;
       pos = s.find(needle, pos + needle.size()))
    ++n;
  return n;
}

}  // namespace

void validate_caption_template(const std::string& tmpl) {
  if (count_occurrences(tmpl, kActionSlot) != 1)
    throw TemplateError("caption template must contain '[action]' exactly once: '" +
                        tmpl + "'");
  if (count_occurrences(tmpl, kObjectSlot) != 1)
    throw TemplateError("caption template must contain '[object]' exactly once: '" +
                        tmpl + "'");
}

std::string render_caption(const std::string& action, const std::string& object,
                           const std::string& tmpl) {
  validate_caption_template(tmpl);
  std::string out = tmpl;
  out.replace(out.find(kActionSlot), std::string(kActionSlot).size(), action);
  out.replace(out.find(kObjectSlot), std::string(kObjectSlot).size(), object);
  return out;
}

std::pair<std::string, std::string> parse_caption(const std::string& caption,
                                                  const std::string& tmpl) {
  validate_caption_template(tmpl);
  const std::size_t a_pos = tmpl.find(kActionSlot);
  const std::size_t o_pos = tmpl.find(kObjectSlot);
  const bool action_first = a_pos < o_pos;
  const std::size_t first = action_first ? a_pos : o_pos;
  const std::size_t second = action_first ? o_pos : a_pos;
  const std::size_t slot_len = std::string(kActionSlot).size();

  const std::string prefix = tmpl.substr(0, first);
  const std::string mid = tmpl.substr(first + slot_len, second - first - slot_len);
  const std::string suffix = tmpl.substr(second + slot_len);

  if (caption.size() < prefix.size() + mid.size() + suffix.size() ||
      caption.compare(0, prefix.size(), prefix) != 0)
    throw InputError("caption does not match template: '" + caption + "'");
  if (!suffix.empty() &&
      caption.compare(caption.size() - suffix.size(), suffix.size(), suffix) != 0)
    throw InputError("caption does not match template: '" + caption + "'");

  const std::string body =
      caption.substr(prefix.size(), caption.size() - prefix.size() - suffix.size());
  std::size_t split;
  if (mid.empty()) {
    throw InputError("template has adjacent placeholders; cannot parse");
  }
  split = body.find(mid);
  if (split == std::string::npos)
    throw InputError("caption does not match template: '" + caption + "'");
  const std::string first_val = body.substr(0, split);
  const std::string second_val = body.substr(split + mid.size());
  if (action_first) return {first_val, second_val};
  return {second_val, first_val};
}

}  // namespace sea
