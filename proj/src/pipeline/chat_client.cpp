#include "pairfilter/pipeline/chat_client.h"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <thread>

#include "pairfilter/error.h"

namespace pairfilter {

ClientSettings ClientSettings::FromEnvironment(std::string model) {
  ClientSettings s;
  const char* endpoint = std::getenv("PAIRFILTER_LLM_ENDPOINT");
  const char* key = std::getenv("PAIRFILTER_LLM_API_KEY");
  if (endpoint == nullptr || *endpoint == '\0') {
    Fail(ErrorKind::kConfig, "PAIRFILTER_LLM_ENDPOINT is not set");
  }
  if (key == nullptr || *key == '\0') {
    Fail(ErrorKind::kConfig, "PAIRFILTER_LLM_API_KEY is not set");
  }
  s.endpoint = endpoint;
  s.api_key = key;
  s.model = std::move(model);
  return s;
}

HttpChatClient::HttpChatClient(ClientSettings settings) : settings_(std::move(settings)) {
  const auto scheme_end = settings_.endpoint.find("://");
  if (scheme_end == std::string::npos) {
    Fail(ErrorKind::kConfig, "endpoint must be an absolute URL: " + settings_.endpoint);
  }
  const auto path_start = settings_.endpoint.find('/', scheme_end + 3);
  origin_ = settings_.endpoint.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : settings_.endpoint.substr(path_start);
}

std::string HttpChatClient::Complete(const ChatRequest& request) {
  httplib::Client http(origin_);
  http.set_connection_timeout(settings_.timeout);
  http.set_read_timeout(settings_.timeout);
  http.set_bearer_token_auth(settings_.api_key);

  Json body = {{"model", settings_.model},
               {"temperature", settings_.temperature},
               {"messages", Json::array({{{"role", "user"}, {"content", request.prompt}}})}};
  const auto res = http.Post(path_, body.dump(), "application/json");
  if (!res) {
    Fail(ErrorKind::kTransport, "request to " + origin_ + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status == 429 || res->status >= 500) {
    Fail(ErrorKind::kTransport, "server answered " + std::to_string(res->status));
  }
  if (res->status != 200) {
    Fail(ErrorKind::kClient, "server answered " + std::to_string(res->status) + ": " + res->body);
  }
  const auto reply = Json::parse(res->body, nullptr, false);
  if (reply.is_discarded()) Fail(ErrorKind::kTransport, "response body is not JSON");
  try {
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const Json::exception& e) {
    Fail(ErrorKind::kClient, std::string("unexpected response shape: ") + e.what());
  }
}

std::unique_ptr<FixtureChatClient> FixtureChatClient::Load(const std::filesystem::path& path) {
  const auto j = Json::parse(ReadFile(path), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    Fail(ErrorKind::kConfig, "fixture file " + path.string() + " is not a JSON object");
  }
  std::map<std::string, std::string> responses;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_string()) Fail(ErrorKind::kConfig, "fixture entry " + key + " is not a string");
    responses[key] = value.get<std::string>();
  }
  return std::make_unique<FixtureChatClient>(std::move(responses),
                                             "fixture:" + path.filename().string());
}

FixtureChatClient::FixtureChatClient(std::map<std::string, std::string> responses,
                                     std::string name)
    : responses_(std::move(responses)), name_(std::move(name)) {}

std::string FixtureChatClient::Complete(const ChatRequest& request) {
  for (const auto& key : {Sha256Hex(request.prompt), request.sentence_id + "/" + request.stage,
                          request.sentence_id}) {
    const auto it = responses_.find(key);
    if (it != responses_.end()) return it->second;
  }
  Fail(ErrorKind::kClient, "no fixture response for " + request.sentence_id + "/" + request.stage);
}

CallOutcome CallWithRetry(ChatClient& client, const ChatRequest& request,
                          const RetryPolicy& policy) {
  CallOutcome out;
  auto delay = policy.base_delay;
  for (;;) {
    ++out.attempts;
    try {
      out.response = client.Complete(request);
      return out;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kTransport || out.attempts > policy.max_retries) throw;
      spdlog::warn("{} {}: {} (attempt {}), retrying", request.sentence_id, request.stage,
                   e.what(), out.attempts);
    }
    if (policy.sleep) {
      policy.sleep(delay);
    } else {
      std::this_thread::sleep_for(delay);
    }
    delay *= 2;
  }
}

}  // namespace pairfilter
