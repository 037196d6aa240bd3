#pragma once

#include <string>
#include <vector>

namespace coagent::backends {

// Remote service coordinates. Only the *name* of the env var holding the
// bearer token is stored; the secret itself never enters config or journals.
struct BackendEndpoint {
  std::string base_url;
  std::string auth_token_env;
  double timeout_s = 60.0;
  int transport_retries = 1;

  bool operator==(const BackendEndpoint&) const = default;
};

struct ChatPart {
  enum class Kind { text, image };
  Kind kind = Kind::text;
  std::string content;  // text, or base64 image payload
  std::string mime;     // image parts only
};

}  // namespace coagent::backends
