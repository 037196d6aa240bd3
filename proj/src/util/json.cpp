#include "coagent/util/json.hpp"

#include <algorithm>

namespace coagent::util {

Json must_parse(std::string_view text, const std::string& context) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    throw Error(context + ": invalid JSON");
  }
  return j;
}

std::vector<std::string> unknown_keys(
    const Json& obj, std::initializer_list<std::string_view> allowed) {
  std::vector<std::string> out;
  if (!obj.is_object()) return out;
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) ==
        allowed.end()) {
      out.push_back(item.key());
    }
  }
  return out;
}

}  // namespace coagent::util
