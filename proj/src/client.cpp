#include "eqderiv/client.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "httplib.h"

namespace eqderiv {

namespace {

void set_timeout(httplib::Client& cli, double seconds) {
  const auto whole = static_cast<time_t>(std::floor(seconds));
  const auto usec = static_cast<time_t>((seconds - static_cast<double>(whole)) * 1e6);
  cli.set_connection_timeout(whole, usec);
  cli.set_read_timeout(whole, usec);
  cli.set_write_timeout(whole, usec);
}

}  // namespace

Json request_body(const EndpointConfig& cfg, const std::string& prompt) {
  Json j;
  j["model"] = cfg.model;
  j["messages"] = Json::array({{{"role", "user"}, {"content", prompt}}});
  j["temperature"] = cfg.temperature;
  return j;
}

std::string parse_completion(const std::string& body, const std::string& record_id) {
  Json j;
  try {
    j = Json::parse(body);
  } catch (const nlohmann::json::exception&) {
    throw MalformedResponse(record_id, "response is not JSON");
  }
  try {
    const Json& content = j.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw MalformedResponse(record_id, "message content is not a string");
    return content.get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw MalformedResponse(record_id, "response has no choices[0].message.content");
  }
}

std::string query_model(const EndpointConfig& cfg, const std::string& prompt, const std::string& record_id) {
  httplib::Headers headers;
  if (!cfg.token_env.empty()) {
    const char* token = std::getenv(cfg.token_env.c_str());
    if (!token || !*token) throw AuthError(record_id, "environment variable " + cfg.token_env + " is not set");
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }
  httplib::Client cli(cfg.base_url);
  set_timeout(cli, cfg.timeout_seconds);
  const std::string body = request_body(cfg, prompt).dump();

  std::string last_error;
  int last_status = 0;
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    const auto start = std::chrono::steady_clock::now();
    auto res = cli.Post(cfg.path, headers, body, "application/json");
    if (!res) {
      const auto err = res.error();
      const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      // A read that fails only after the full timeout is a timeout, not a
      // dropped connection.
      if (err == httplib::Error::ConnectionTimeout ||
          (err == httplib::Error::Read && elapsed >= cfg.timeout_seconds * 0.9)) {
        throw TimeoutError(record_id, "no response within " + std::to_string(cfg.timeout_seconds) + " s");
      }
      last_error = httplib::to_string(err);
      last_status = 0;
      continue;
    }
    if (res->status == 401 || res->status == 403) {
      throw AuthError(record_id, "endpoint rejected the credentials (HTTP " + std::to_string(res->status) + ")");
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      last_status = res->status;
      continue;
    }
    if (res->status != 200) {
      throw HttpError(record_id, "HTTP " + std::to_string(res->status), res->status);
    }
    return parse_completion(res->body, record_id);
  }
  throw HttpError(record_id, "gave up after " + std::to_string(cfg.max_retries + 1) + " attempts: " + last_error,
                  last_status);
}

std::vector<QueryResult> query_records(const EndpointConfig& cfg, const std::vector<PromptRecord>& records,
                                       const std::function<void(const std::string&)>& log) {
  std::vector<QueryResult> out(records.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) {
      QueryResult& r = out[i];
      r.id = records[i].id;
      try {
        r.completion = query_model(cfg, records[i].prompt, r.id);
        continue;
      } catch (const AuthError& e) {
        r.error_kind = "auth";
        r.error = e.what();
      } catch (const TimeoutError& e) {
        r.error_kind = "timeout";
        r.error = e.what();
      } catch (const MalformedResponse& e) {
        r.error_kind = "malformed";
        r.error = e.what();
      } catch (const HttpError& e) {
        r.error_kind = "http";
        r.error = e.what();
      }
      if (log) {
        std::lock_guard lock(log_mutex);
        log(r.error_kind + ": " + r.error);
      }
    }
  };
  const auto n = static_cast<std::size_t>(std::max(1, cfg.concurrency));
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(n, records.size()); ++t) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace eqderiv
