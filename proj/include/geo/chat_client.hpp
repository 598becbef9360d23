#pragma once

// Minimal OpenAI-compatible chat-completions client with bounded retries.

#include <string>
#include <variant>
#include <vector>

namespace geo {

struct BackendError {
  std::string message;
  bool retryable = false;
};

template <class T>
using Result = std::variant<T, BackendError>;

template <class T>
bool ok(const Result<T>& r) {
  return std::holds_alternative<T>(r);
}

struct ChatMessage {
  std::string role;
  std::string content;
};

struct RemoteParams {
  std::string base_url = "http://localhost:8000/v1";
  std::string model = "default";
  double timeout_s = 60.0;
  int max_retries = 3;
  int backoff_ms = 500;  // doubled after every failed attempt
  double temperature = 0.0;
  std::string api_key_env = "GEO_API_KEY";
};

class ChatClient {
 public:
  explicit ChatClient(RemoteParams params);

  /// Returns the assistant message text. Connection failures, 429 and 5xx are
  /// retried with exponential backoff; other statuses fail immediately.
  Result<std::string> complete(const std::vector<ChatMessage>& messages) const;

  const RemoteParams& params() const { return params_; }

 private:
  RemoteParams params_;
  std::string host_;  // scheme://host[:port]
  std::string path_;  // prefix + /chat/completions
};

}  // namespace geo
