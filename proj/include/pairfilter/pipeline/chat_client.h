#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>

#include "pairfilter/util.h"

namespace pairfilter {

struct ChatRequest {
  std::string sentence_id;
  std::string stage;  // "stage1", "stage2" or "restricted"
  std::string prompt;
};

// Implementations must tolerate concurrent Complete() calls. Failures are
// reported as Error with kind kTransport (worth retrying) or kClient.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual std::string Complete(const ChatRequest& request) = 0;
  virtual std::string model_name() const = 0;
};

struct ClientSettings {
  std::string endpoint;  // full chat-completions URL
  std::string api_key;
  std::string model = "gpt-3.5-turbo";
  std::chrono::seconds timeout{60};
  double temperature = 0.0;

  // Reads PAIRFILTER_LLM_ENDPOINT and PAIRFILTER_LLM_API_KEY; kConfig if
  // either is unset.
  static ClientSettings FromEnvironment(std::string model);
};

// OpenAI-style /chat/completions over HTTP(S).
class HttpChatClient : public ChatClient {
 public:
  explicit HttpChatClient(ClientSettings settings);
  std::string Complete(const ChatRequest& request) override;
  std::string model_name() const override { return settings_.model; }

 private:
  ClientSettings settings_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;
};

// Canned responses keyed by prompt SHA-256, "<id>/<stage>" or "<id>", tried
// in that order. The file is a JSON object of key -> response text.
class FixtureChatClient : public ChatClient {
 public:
  static std::unique_ptr<FixtureChatClient> Load(const std::filesystem::path& path);
  explicit FixtureChatClient(std::map<std::string, std::string> responses,
                             std::string name = "fixture");

  std::string Complete(const ChatRequest& request) override;
  std::string model_name() const override { return name_; }

 private:
  std::map<std::string, std::string> responses_;
  std::string name_;
};

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds base_delay{500};
  // Replaced in tests to avoid real sleeping.
  std::function<void(std::chrono::milliseconds)> sleep;
};

struct CallOutcome {
  std::string response;
  int attempts = 0;
};

// Retries kTransport failures with exponential backoff; anything else, or
// exhausting the retries, propagates.
CallOutcome CallWithRetry(ChatClient& client, const ChatRequest& request,
                          const RetryPolicy& policy);

}  // namespace pairfilter
