#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <chrono>
#include <thread>

#include <httplib.h>

#include "coagent/backends/http.hpp"
#include "coagent/backends/mock.hpp"
#include "support/mini_schema.hpp"
#include "support/testenv.hpp"

using namespace coagent;
using namespace coagent::backends;
namespace ts = coagent::testsupport;

namespace {

// In-process stub service bound to an ephemeral port.
class StubServer {
 public:
  explicit StubServer(std::function<void(const httplib::Request&,
                                         httplib::Response&)> handler) {
    server_.Post("/v1/endpoint", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  BackendEndpoint endpoint(double timeout_s = 5.0) const {
    BackendEndpoint e;
    e.base_url = "http://127.0.0.1:" + std::to_string(port_) + "/v1/endpoint";
    e.timeout_s = timeout_s;
    e.transport_retries = 1;
    return e;
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

util::Json chat_reply(const std::string& content) {
  util::Json j;
  j["choices"] = util::Json::array(
      {util::Json{{"message", util::Json{{"content", content}}}}});
  return j;
}

synthesis::SynthesisRequest sample_request(synthesis::Mode mode) {
  backends::HashFeatureExtractor extractor(16);
  gcm::MemoryStore store = gcm::register_entity(
      gcm::MemoryStore{}, {"hero", "Hero", "red scarf"},
      gcm::ArtifactRef{"portraits/hero.txt", "d"}, "portrait|hero", extractor);

  storyboard::ShotSpec shot;
  shot.index = 2;
  shot.prompt = "hero surfs at sunset";
  shot.entities = {"hero"};
  shot.style = "warm";
  shot.duration_s = 3.0;
  shot.generation_mode = shot.index == 2 && mode == synthesis::Mode::flf2v
                             ? storyboard::GenerationMode::flf2v
                             : storyboard::GenerationMode::ff2v;
  shot.camera_angle = "wide";
  shot.lighting = "sunset";
  shot.first_frame_prompt = "hero paddling";
  if (mode == synthesis::Mode::flf2v) shot.last_frame_prompt = "hero ashore";

  synthesis::ShotArtifact prev;
  prev.shot_index = 1;
  prev.video_ref = "mock://video/prev";
  prev.duration_s = 1.0;
  prev.frame_meta.assign(16, {{"hero", "tok:aa"}});

  return synthesis::build_request(shot, mode, store, prev, true,
                                  synthesis::ModeParamsTable{}, 77, true);
}

}  // namespace

TEST_CASE("chat_complete round-trips the first message content") {
  StubServer server([](const httplib::Request& req, httplib::Response& res) {
    const auto body = util::must_parse(req.body, "request");
    // Echo the system prompt back so the test can see what arrived.
    res.set_content(
        util::canonical(chat_reply(
            body.at("messages").at(0).at("content").get<std::string>())),
        "application/json");
  });
  const std::string out =
      chat_complete(server.endpoint(), "be a storyboard planner",
                    {ChatPart{ChatPart::Kind::text, "hello", ""}});
  CHECK(out == "be a storyboard planner");
}

TEST_CASE("chat_complete sends the bearer token from the environment") {
  setenv("COAGENT_TEST_TOKEN", "sk-sekret-123", 1);
  std::string seen_auth;
  StubServer server([&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    res.set_content(util::canonical(chat_reply("PASS")), "application/json");
  });
  auto endpoint = server.endpoint();
  endpoint.auth_token_env = "COAGENT_TEST_TOKEN";
  chat_complete(endpoint, "sys", {ChatPart{ChatPart::Kind::text, "u", ""}});
  CHECK(seen_auth == "Bearer sk-sekret-123");
  unsetenv("COAGENT_TEST_TOKEN");
}

TEST_CASE("401 maps to an auth error") {
  StubServer server([](const httplib::Request&, httplib::Response& res) {
    res.status = 401;
    res.set_content("{}", "application/json");
  });
  try {
    chat_complete(server.endpoint(), "sys",
                  {ChatPart{ChatPart::Kind::text, "u", ""}});
    FAIL("expected BackendError");
  } catch (const BackendError& e) {
    CHECK(e.kind() == BackendError::Kind::auth);
  }
}

TEST_CASE("5xx maps to http_status without retry") {
  std::atomic<int> hits{0};
  StubServer server([&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 500;
  });
  try {
    chat_complete(server.endpoint(), "sys",
                  {ChatPart{ChatPart::Kind::text, "u", ""}});
    FAIL("expected BackendError");
  } catch (const BackendError& e) {
    CHECK(e.kind() == BackendError::Kind::http_status);
  }
  CHECK(hits == 1);  // status errors are not transport failures
}

TEST_CASE("read timeout yields a timeout error after one retry") {
  std::atomic<int> hits{0};
  StubServer server([&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    std::this_thread::sleep_for(std::chrono::milliseconds(900));
    res.set_content(util::canonical(chat_reply("late")), "application/json");
  });
  try {
    chat_complete(server.endpoint(/*timeout_s=*/0.15), "sys",
                  {ChatPart{ChatPart::Kind::text, "u", ""}});
    FAIL("expected BackendError");
  } catch (const BackendError& e) {
    CHECK(e.kind() == BackendError::Kind::timeout);
  }
  CHECK(hits == 2);  // original call plus one transparent retry
}

TEST_CASE("generate_video: 48 frames at 16 fps is a 3 second artifact") {
  util::Json seen;
  StubServer server([&](const httplib::Request& req, httplib::Response& res) {
    seen = util::must_parse(req.body, "request");
    util::Json reply;
    reply["duration_s"] = 3.0;
    reply["frames"] = 48;
    reply["video_uri"] = "https://cdn.example/clip.mp4";
    res.set_content(util::canonical(reply), "application/json");
  });
  auto artifact =
      generate_video(server.endpoint(), sample_request(synthesis::Mode::ff2v));
  CHECK(seen.at("mode") == "ff2v");
  CHECK(artifact.duration_s == doctest::Approx(3.0));
  CHECK(artifact.frame_count() == 48);
  CHECK(artifact.video_ref == "https://cdn.example/clip.mp4");
}

TEST_CASE("generate_video: malformed response is an http_status error") {
  StubServer server([](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"unexpected\": true}", "application/json");
  });
  try {
    generate_video(server.endpoint(), sample_request(synthesis::Mode::ff2v));
    FAIL("expected BackendError");
  } catch (const BackendError& e) {
    CHECK(e.kind() == BackendError::Kind::http_status);
  }
}

TEST_CASE("flf2v request body carries both boundary frames") {
  util::Json seen;
  StubServer server([&](const httplib::Request& req, httplib::Response& res) {
    seen = util::must_parse(req.body, "request");
    util::Json reply;
    reply["duration_s"] = 3.0;
    reply["frames"] = 48;
    reply["video_uri"] = "https://cdn.example/clip.mp4";
    res.set_content(util::canonical(reply), "application/json");
  });
  generate_video(server.endpoint(), sample_request(synthesis::Mode::flf2v));
  CHECK(seen.contains("first_frame"));
  CHECK(seen.contains("last_frame"));
  CHECK(seen.at("mode") == "flf2v");
}

TEST_CASE("wire bodies validate against the shipped schemas") {
  const auto chat_schema = util::must_parse(
      util::read_file("schemas/wire/chat_request.json"), "schema");
  const auto synth_schema = util::must_parse(
      util::read_file("schemas/wire/synthesis_request.json"), "schema");

  std::string why;
  const auto chat_body = chat_request_wire(
      "system text", {ChatPart{ChatPart::Kind::text, "user text", ""},
                      ChatPart{ChatPart::Kind::image, "aGk=", "image/png"}});
  CHECK_MESSAGE(ts::schema_validate(chat_schema, chat_body, &why), why);

  for (auto mode : {synthesis::Mode::t2v, synthesis::Mode::ff2v,
                    synthesis::Mode::flf2v}) {
    const auto body = synthesis_request_wire(sample_request(mode));
    CHECK_MESSAGE(ts::schema_validate(synth_schema, body, &why), why);
  }
}

TEST_CASE("http planner client is a chat client") {
  util::Json seen;
  StubServer server([&](const httplib::Request& req, httplib::Response& res) {
    seen = util::must_parse(req.body, "request");
    res.set_content(util::canonical(chat_reply("{\"not\":\"a plan\"}")),
                    "application/json");
  });
  HttpPlannerClient client(server.endpoint());
  CHECK(client.complete("sys", "write me a plan") == "{\"not\":\"a plan\"}");
  CHECK(seen.at("messages").at(1).at("role") == "user");
}

TEST_CASE("http verifier stage-2 audits every sampled frame") {
  std::atomic<int> hits{0};
  StubServer server([&](const httplib::Request&, httplib::Response& res) {
    const int n = ++hits;
    res.set_content(
        util::canonical(chat_reply(n == 2 ? "FAIL: hair differs" : "PASS")),
        "application/json");
  });
  HttpVerifierClient client(server.endpoint());

  synthesis::ShotArtifact artifact;
  artifact.shot_index = 1;
  artifact.video_ref = "mock://video/x";
  artifact.duration_s = 1.0;
  artifact.frame_meta.assign(16, {});
  gcm::EntityRecord record;
  record.entity_id = "hero";
  record.portrait_ref = gcm::ArtifactRef{"portraits/hero.txt", "d"};

  const std::vector<int> frames = {0, 7, 15};
  const std::string verdict = client.check_identity(artifact, frames, record);
  CHECK(verdict == "FAIL: hair differs");
  CHECK(hits == 2);  // stopped at the first failing frame
}

TEST_CASE("http image backend writes the rendered portrait") {
  StubServer server([](const httplib::Request&, httplib::Response& res) {
    util::Json reply;
    reply["image_b64"] = "cG9ydHJhaXQtYnl0ZXM=";  // "portrait-bytes"
    res.set_content(util::canonical(reply), "application/json");
  });
  HttpImageBackend image(server.endpoint());
  const auto dir = ts::fresh_dir("http_portrait");
  auto ref = image.render_portrait("prompt", dir, "portraits/hero.txt");
  CHECK(util::read_file(dir / ref.uri) == "portrait-bytes");
}
