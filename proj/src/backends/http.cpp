#include "coagent/backends/http.hpp"

#include <cstdlib>

#include <httplib.h>

#include "coagent/prompts.hpp"
#include "coagent/util/fs.hpp"
#include "coagent/util/hash.hpp"

namespace coagent::backends {

using util::Json;

namespace {

struct SplitUrl {
  std::string host;  // scheme://host:port
  std::string path;  // leading slash
};

SplitUrl split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw BackendError(BackendError::Kind::transport,
                       "endpoint URL missing scheme: " + url);
  }
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    return SplitUrl{url, "/"};
  }
  return SplitUrl{url.substr(0, path_start), url.substr(path_start)};
}

std::string bearer_token(const BackendEndpoint& endpoint) {
  if (endpoint.auth_token_env.empty()) return {};
  const char* value = std::getenv(endpoint.auth_token_env.c_str());
  return value ? value : std::string{};
}

// POSTs canonical JSON with retries on transport-level failures only.
Json post_json(const BackendEndpoint& endpoint, const Json& body) {
  const SplitUrl url = split_url(endpoint.base_url);
  httplib::Client client(url.host);
  const auto timeout_s = static_cast<time_t>(endpoint.timeout_s);
  const auto timeout_us = static_cast<time_t>(
      (endpoint.timeout_s - static_cast<double>(timeout_s)) * 1e6);
  client.set_connection_timeout(timeout_s, timeout_us);
  client.set_read_timeout(timeout_s, timeout_us);
  client.set_write_timeout(timeout_s, timeout_us);

  httplib::Headers headers;
  const std::string token = bearer_token(endpoint);
  if (!token.empty()) {
    headers.emplace("Authorization", "Bearer " + token);
  }

  const std::string payload = util::canonical(body);
  const int tries = 1 + std::max(0, endpoint.transport_retries);
  httplib::Error last_error = httplib::Error::Success;
  for (int attempt = 0; attempt < tries; ++attempt) {
    httplib::Result result =
        client.Post(url.path, headers, payload, "application/json");
    if (!result) {
      last_error = result.error();
      continue;  // transparent transport retry
    }
    if (result->status == 401 || result->status == 403) {
      throw BackendError(BackendError::Kind::auth,
                         "authentication rejected (" +
                             std::to_string(result->status) + ") by " +
                             endpoint.base_url);
    }
    if (result->status < 200 || result->status >= 300) {
      throw BackendError(BackendError::Kind::http_status,
                         "unexpected HTTP " + std::to_string(result->status) +
                             " from " + endpoint.base_url);
    }
    Json parsed = Json::parse(result->body, nullptr, false);
    if (parsed.is_discarded()) {
      throw BackendError(BackendError::Kind::http_status,
                         "non-JSON response body from " + endpoint.base_url);
    }
    return parsed;
  }

  const bool timed_out = last_error == httplib::Error::ConnectionTimeout ||
                         last_error == httplib::Error::Read ||
                         last_error == httplib::Error::Write;
  throw BackendError(
      timed_out ? BackendError::Kind::timeout : BackendError::Kind::transport,
      "transport failure talking to " + endpoint.base_url + " (" +
          httplib::to_string(last_error) + ")");
}

std::string base64_decode(const std::string& in) {
  auto value_of = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::string out;
  int buffer = 0;
  int bits = 0;
  for (char c : in) {
    if (c == '=' || c == '\n' || c == '\r') continue;
    const int v = value_of(c);
    if (v < 0) continue;
    buffer = (buffer << 6) | v;
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<char>((buffer >> bits) & 0xFF));
    }
  }
  return out;
}

}  // namespace

Json chat_request_wire(const std::string& system,
                       const std::vector<ChatPart>& user_parts) {
  Json content = Json::array();
  for (const auto& part : user_parts) {
    if (part.kind == ChatPart::Kind::text) {
      content.push_back(Json{{"text", part.content}, {"type", "text"}});
    } else {
      content.push_back(Json{
          {"image_url",
           Json{{"url", "data:" + (part.mime.empty() ? "image/png" : part.mime) +
                            ";base64," + part.content}}},
          {"type", "image_url"}});
    }
  }
  Json body;
  body["messages"] = Json::array(
      {Json{{"content", system}, {"role", "system"}},
       Json{{"content", content}, {"role", "user"}}});
  return body;
}

std::string chat_complete(const BackendEndpoint& endpoint,
                          const std::string& system,
                          const std::vector<ChatPart>& user_parts) {
  const Json response = post_json(endpoint, chat_request_wire(system, user_parts));
  try {
    return response.at("choices").at(0).at("message").at("content")
        .get<std::string>();
  } catch (const std::exception&) {
    throw BackendError(BackendError::Kind::http_status,
                       "chat response missing choices[0].message.content");
  }
}

Json synthesis_request_wire(const synthesis::SynthesisRequest& request) {
  Json j;
  Json refs = Json::array();
  for (const auto& record : request.entity_records) {
    refs.push_back(Json{
        {"attributes", record.attributes},
        {"id", record.entity_id},
        {"portrait_uri",
         record.portrait_ref ? record.portrait_ref->uri : std::string{}}});
  }
  j["entity_refs"] = refs;
  if (request.first_frame_anchor) {
    const auto& a = *request.first_frame_anchor;
    j["first_frame"] = a.kind == synthesis::FrameRef::Kind::artifact_frame
                           ? a.video_ref + "#frame=" + std::to_string(a.frame_index)
                           : "render:" + a.prompt;
  }
  j["height"] = request.backend_params.height;
  if (request.goal_frame) {
    const auto& g = *request.goal_frame;
    j["last_frame"] = g.kind == synthesis::FrameRef::Kind::artifact_frame
                          ? g.video_ref + "#frame=" + std::to_string(g.frame_index)
                          : "render:" + g.prompt;
  }
  j["mode"] = storyboard::to_string(request.mode);
  j["prompt"] = request.shot.prompt;
  j["seed"] = request.seed;
  j["steps"] = request.backend_params.steps;
  j["width"] = request.backend_params.width;
  return j;
}

synthesis::ShotArtifact generate_video(const BackendEndpoint& endpoint,
                                       const synthesis::SynthesisRequest& request) {
  Json response;
  try {
    response = post_json(endpoint, synthesis_request_wire(request));
  } catch (const BackendError& e) {
    if (e.kind() == BackendError::Kind::timeout) {
      throw GenerationTimeout(e.what());
    }
    throw;
  }

  synthesis::ShotArtifact artifact;
  artifact.shot_index = request.shot.index;
  artifact.mode_used = request.mode;
  artifact.seed = request.seed;
  try {
    artifact.video_ref = response.at("video_uri").get<std::string>();
    const int frames = response.at("frames").get<int>();
    artifact.duration_s = response.at("duration_s").get<double>();
    if (response.contains("frame_meta")) {
      artifact.frame_meta =
          response.at("frame_meta")
              .get<std::vector<std::map<std::string, std::string>>>();
    } else {
      artifact.frame_meta.assign(static_cast<std::size_t>(std::max(1, frames)),
                                 {});
    }
  } catch (const BackendError&) {
    throw;
  } catch (const std::exception& e) {
    throw BackendError(BackendError::Kind::http_status,
                       std::string("malformed synthesis response: ") + e.what());
  }
  return artifact;
}

std::string HttpPlannerClient::complete(const std::string& system_prompt,
                                        const std::string& user_message) {
  return chat_complete(endpoint_, system_prompt,
                       {ChatPart{ChatPart::Kind::text, user_message, ""}});
}

std::string HttpVerifierClient::check_semantic(
    const synthesis::ShotArtifact& artifact, std::span<const int> frames,
    const storyboard::ShotSpec& shot) {
  std::vector<ChatPart> parts;
  for (int f : frames) {
    parts.push_back(ChatPart{ChatPart::Kind::image,
                             artifact.video_ref + "#frame=" + std::to_string(f),
                             "text/uri-list"});
  }
  return chat_complete(endpoint_, prompts::render_stage1(shot.prompt), parts);
}

std::string HttpVerifierClient::check_identity(
    const synthesis::ShotArtifact& artifact, std::span<const int> frames,
    const gcm::EntityRecord& record) {
  const std::string portrait =
      record.portrait_ref ? record.portrait_ref->uri : std::string{};
  for (int f : frames) {
    std::vector<ChatPart> parts;
    parts.push_back(ChatPart{ChatPart::Kind::image, portrait, "text/uri-list"});
    parts.push_back(ChatPart{ChatPart::Kind::image,
                             artifact.video_ref + "#frame=" + std::to_string(f),
                             "text/uri-list"});
    const std::string verdict =
        chat_complete(endpoint_, prompts::render_stage2(), parts);
    const auto parsed = verifier::parse_verdict(verdict);
    if (!parsed.pass) return verdict;
  }
  return "PASS";
}

synthesis::ShotArtifact HttpSynthesisBackend::generate(
    const synthesis::SynthesisRequest& request) {
  return generate_video(endpoint_, request);
}

gcm::ArtifactRef HttpImageBackend::render_portrait(
    const std::string& prompt, const std::filesystem::path& run_dir,
    const std::string& rel_path) {
  Json body;
  body["mode"] = "portrait";
  body["prompt"] = prompt;
  const Json response = post_json(endpoint_, body);

  std::string content;
  if (response.contains("image_b64")) {
    content = base64_decode(response.at("image_b64").get<std::string>());
  } else if (response.contains("image_uri")) {
    content = response.at("image_uri").get<std::string>();
  } else {
    throw BackendError(BackendError::Kind::http_status,
                       "portrait response carries neither image_b64 nor image_uri");
  }
  util::atomic_write_file(run_dir / rel_path, content);
  return gcm::ArtifactRef{rel_path, util::content_digest(content)};
}

}  // namespace coagent::backends
