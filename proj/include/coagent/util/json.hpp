#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "coagent/util/errors.hpp"

namespace coagent::util {

using Json = nlohmann::json;

// Canonical form: object keys sorted lexicographically (nlohmann's default
// storage order), no insignificant whitespace, raw UTF-8. Every persisted
// document in this project goes through here so byte comparisons are
// meaningful.
inline std::string canonical(const Json& j) { return j.dump(); }

// Parses or throws coagent::Error with the given context in the message.
Json must_parse(std::string_view text, const std::string& context);

// Returns keys of `obj` that are not in `allowed` (strict-schema helper).
std::vector<std::string> unknown_keys(
    const Json& obj, std::initializer_list<std::string_view> allowed);

}  // namespace coagent::util
