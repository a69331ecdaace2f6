#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "eqderiv/records.hpp"

namespace eqderiv {

struct EndpointConfig {
  std::string base_url = "https://api.openai.com";  // scheme://host[:port]
  std::string path = "/v1/chat/completions";
  std::string model = "gpt-4";
  std::string token_env = "OPENAI_API_KEY";  // empty: no Authorization header
  double temperature = 0;
  double timeout_seconds = 60;
  int max_retries = 3;  // extra attempts after a 5xx or a dropped connection
  int concurrency = 4;
};

class ClientError : public std::runtime_error {
 public:
  ClientError(const std::string& record_id, const std::string& what)
      : std::runtime_error(record_id.empty() ? what : "[" + record_id + "] " + what), record_id_(record_id) {}
  const std::string& record_id() const { return record_id_; }

 private:
  std::string record_id_;
};

/// 401/403, or the token variable is unset.
class AuthError : public ClientError {
 public:
  using ClientError::ClientError;
};

class TimeoutError : public ClientError {
 public:
  using ClientError::ClientError;
};

/// The body is not JSON or has no choices[0].message.content string.
class MalformedResponse : public ClientError {
 public:
  using ClientError::ClientError;
};

/// Any other failure: a non-retryable status, or retries exhausted.
class HttpError : public ClientError {
 public:
  HttpError(const std::string& record_id, const std::string& what, int status)
      : ClientError(record_id, what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

/// {"model", "messages": [{"role": "user", "content": prompt}], "temperature"}.
Json request_body(const EndpointConfig& cfg, const std::string& prompt);

/// Text of the first choice. Throws MalformedResponse.
std::string parse_completion(const std::string& body, const std::string& record_id = {});

/// Sends one prompt and returns the first choice's text, retrying transient
/// failures. Errors carry `record_id`.
std::string query_model(const EndpointConfig& cfg, const std::string& prompt, const std::string& record_id = {});

struct QueryResult {
  std::string id;
  std::optional<std::string> completion;
  std::string error_kind;  // "auth", "timeout", "malformed", "http"; empty on success
  std::string error;
};

/// Queries every record with at most cfg.concurrency requests in flight.
/// Results are in input order; failures are collected, not thrown. `log`
/// receives one line per failure.
std::vector<QueryResult> query_records(const EndpointConfig& cfg, const std::vector<PromptRecord>& records,
                                       const std::function<void(const std::string&)>& log = {});

}  // namespace eqderiv
