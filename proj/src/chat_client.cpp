#include "geo/chat_client.hpp"

#include <chrono>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace geo {

ChatClient::ChatClient(RemoteParams params) : params_(std::move(params)) {
  const auto& url = params_.base_url;
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw std::invalid_argument("base url needs a scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  host_ = url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  path_ = prefix + "/chat/completions";
}

Result<std::string> ChatClient::complete(const std::vector<ChatMessage>& messages) const {
  nlohmann::json body;
  body["model"] = params_.model;
  body["temperature"] = params_.temperature;
  body["messages"] = nlohmann::json::array();
  for (const auto& m : messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (const char* key = std::getenv(params_.api_key_env.c_str()); key != nullptr && *key != '\0') {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  BackendError last{"no attempt made", true};
  int delay = params_.backoff_ms;
  for (int attempt = 0; attempt <= params_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
      delay *= 2;
    }
    httplib::Client cli(host_);
    const auto secs = static_cast<time_t>(params_.timeout_s);
    cli.set_connection_timeout(secs, 0);
    cli.set_read_timeout(secs, 0);
    cli.set_write_timeout(secs, 0);
    auto res = cli.Post(path_, headers, payload, "application/json");
    if (!res) {
      last = {"transport error: " + httplib::to_string(res.error()), true};
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last = {"HTTP " + std::to_string(res->status), true};
      continue;
    }
    if (res->status != 200) {
      return BackendError{"HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200), false};
    }
    try {
      auto j = nlohmann::json::parse(res->body);
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const std::exception& e) {
      return BackendError{std::string("malformed completion response: ") + e.what(), false};
    }
  }
  last.message = "retries exhausted (" + last.message + ")";
  last.retryable = false;
  return last;
}

}  // namespace geo
