#include <cstdlib>

#include "doctest.h"
#include "eqderiv/client.hpp"
#include "mock_server.hpp"

using namespace eqderiv;
using eqderiv::testing::MockServer;

namespace {

EndpointConfig local(const MockServer& s) {
  ::setenv("EQDERIV_TEST_KEY", "sk-test", 1);
  EndpointConfig cfg;
  cfg.base_url = s.url();
  cfg.token_env = "EQDERIV_TEST_KEY";
  cfg.timeout_seconds = 2;
  return cfg;
}

}  // namespace

TEST_CASE("request body") {
  EndpointConfig cfg;
  const Json j = request_body(cfg, "Given $x = y$");
  CHECK(j.at("model") == "gpt-4");
  CHECK(j.at("temperature") == 0);
  CHECK(j.at("messages").size() == 1);
  CHECK(j.at("messages")[0].at("role") == "user");
  CHECK(j.at("messages")[0].at("content") == "Given $x = y$");
}

TEST_CASE("parsing completions") {
  CHECK(parse_completion(R"({"choices":[{"message":{"content":"x = y"}}]})") == "x = y");
  CHECK_THROWS_AS(parse_completion("not json"), MalformedResponse);
  CHECK_THROWS_AS(parse_completion(R"({"choices":[]})"), MalformedResponse);
  CHECK_THROWS_AS(parse_completion(R"({"choices":[{"message":{"content":3}}]})"), MalformedResponse);
}

TEST_CASE("echo round trip sends temperature 0 and the token") {
  MockServer s;
  const auto cfg = local(s);
  CHECK(query_model(cfg, "Given $a = b$") == "Given $a = b$");
  const auto bodies = s.bodies();
  REQUIRE(bodies.size() == 1);
  const Json sent = Json::parse(bodies[0]);
  REQUIRE(sent.contains("temperature"));
  CHECK(sent.at("temperature") == 0);
  CHECK(s.auth_headers()[0] == "Bearer sk-test");
}

TEST_CASE("one transient 5xx is retried once") {
  MockServer s(MockServer::Mode::FailOnce500);
  const auto cfg = local(s);
  CHECK(query_model(cfg, "p") == "p");
  CHECK(s.bodies().size() == 2);
}

TEST_CASE("persistent 5xx gives up after max retries") {
  MockServer s(MockServer::Mode::Always500);
  auto cfg = local(s);
  cfg.max_retries = 2;
  try {
    query_model(cfg, "p", "r7");
    FAIL("expected HttpError");
  } catch (const HttpError& e) {
    CHECK(e.status() == 500);
    CHECK(e.record_id() == "r7");
  }
  CHECK(s.bodies().size() == 3);
}

TEST_CASE("auth and timeout errors are distinct") {
  {
    MockServer s(MockServer::Mode::Unauthorized);
    const auto cfg = local(s);
    CHECK_THROWS_AS(query_model(cfg, "p"), AuthError);
    CHECK(s.bodies().size() == 1);  // never retried
  }
  {
    MockServer s(MockServer::Mode::Slow);
    auto cfg = local(s);
    cfg.timeout_seconds = 0.3;
    CHECK_THROWS_AS(query_model(cfg, "p"), TimeoutError);
  }
  {
    MockServer s;
    auto cfg = local(s);
    cfg.token_env = "EQDERIV_TEST_UNSET_KEY";
    ::unsetenv("EQDERIV_TEST_UNSET_KEY");
    CHECK_THROWS_AS(query_model(cfg, "p"), AuthError);
    CHECK(s.bodies().empty());
  }
  {
    MockServer s(MockServer::Mode::Malformed);
    CHECK_THROWS_AS(query_model(local(s), "p"), MalformedResponse);
  }
}

TEST_CASE("query_records keeps order and classifies failures") {
  MockServer s;
  auto cfg = local(s);
  cfg.concurrency = 3;
  std::vector<PromptRecord> recs;
  for (int i = 0; i < 7; ++i) {
    PromptRecord p;
    p.id = std::to_string(i);
    p.prompt = "prompt " + std::to_string(i);
    recs.push_back(p);
  }
  auto out = query_records(cfg, recs);
  REQUIRE(out.size() == 7);
  for (int i = 0; i < 7; ++i) {
    CHECK(out[i].id == std::to_string(i));
    CHECK(out[i].completion == "prompt " + std::to_string(i));
    CHECK(out[i].error_kind.empty());
  }
  s.set_mode(MockServer::Mode::Unauthorized);
  std::vector<std::string> lines;
  out = query_records(cfg, recs, [&](const std::string& l) { lines.push_back(l); });
  for (const auto& r : out) {
    CHECK_FALSE(r.completion);
    CHECK(r.error_kind == "auth");
    CHECK(r.error.find("[" + r.id + "]") != std::string::npos);
  }
  CHECK(lines.size() == 7);
  s.set_mode(MockServer::Mode::Malformed);
  CHECK(query_records(cfg, {recs[0]})[0].error_kind == "malformed");
}
