#pragma once

#include <chrono>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "align/error.hpp"

namespace align {

struct AgentRequest {
  std::string model_id;
  double temperature = 0.0;
  std::string system_text;
  std::string user_text;

  friend bool operator==(const AgentRequest&, const AgentRequest&) = default;
};

struct AgentResponse {
  std::string text;
  std::string model_id;

  friend bool operator==(const AgentResponse&, const AgentResponse&) = default;
};

struct Transcript {
  AgentRequest request;
  AgentResponse response;
  std::chrono::system_clock::time_point timestamp;
  std::string request_digest;
};

/// SHA-256 over (model_id, temperature, system_text, user_text). Timestamps never enter the hash.
std::string request_digest(const AgentRequest& request);

// ---------------------------------------------------------------------------
// Prompt templates

struct PromptTemplate {
  std::string name;
  std::string body;  // named placeholders written as {{var}}

  /// Distinct placeholder names in order of first appearance.
  std::vector<std::string> placeholders() const;
};

struct RenderResult {
  std::string text;
  std::vector<std::string> unused_bindings;  // warnings, not errors
};

/// Substitutes every {{name}} in one pass; bound values are never re-expanded.
/// Throws Error(UnboundPlaceholder) naming the first placeholder without a binding.
RenderResult render(const PromptTemplate& tmpl, const std::map<std::string, std::string>& bindings);

/// Named prompt bodies. Defaults are compiled in; a directory of <name>.txt files overrides them.
class PromptLibrary {
 public:
  static PromptLibrary defaults();
  static PromptLibrary from_directory(const std::string& dir);

  const PromptTemplate& get(std::string_view name) const;

 private:
  std::map<std::string, PromptTemplate, std::less<>> templates_;
};

// ---------------------------------------------------------------------------
// Backends

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual AgentResponse send(const AgentRequest& request, const std::string& digest) = 0;
};

/// Read-only map digest -> recorded response.
class ReplayBackend final : public ChatBackend {
 public:
  ReplayBackend() = default;
  explicit ReplayBackend(std::map<std::string, AgentResponse> entries) : entries_(std::move(entries)) {}

  static ReplayBackend load(const std::string& path);
  static ReplayBackend parse(std::string_view raw);

  AgentResponse send(const AgentRequest& request, const std::string& digest) override;
  std::size_t size() const noexcept { return entries_.size(); }
  bool contains(const std::string& digest) const { return entries_.count(digest) > 0; }

 private:
  std::map<std::string, AgentResponse> entries_;
};

/// OpenAI-style chat-completions endpoint: one system and one user message, one text reply.
class LiveChatBackend final : public ChatBackend {
 public:
  LiveChatBackend(std::string url, std::string api_key, long timeout_seconds = 120);

  /// Reads ALIGN_LLM_URL / ALIGN_LLM_KEY. Throws Error(ConfigError) when the URL is unset.
  static LiveChatBackend from_environment();

  AgentResponse send(const AgentRequest& request, const std::string& digest) override;

 private:
  std::string url_;
  std::string api_key_;
  long timeout_seconds_;
};

// ---------------------------------------------------------------------------
// Gateway

/// The single completion boundary. Every request passes the temperature check here and is logged.
class Gateway {
 public:
  Gateway(ChatBackend& backend, std::string model_id) : backend_(&backend), model_id_(std::move(model_id)) {}

  const std::string& model_id() const noexcept { return model_id_; }

  /// Pipeline requests are only ever built here; temperature is fixed at 0.
  AgentRequest make_request(std::string system_text, std::string user_text) const;

  /// Errors: NonZeroTemperature, BackendUnavailable, ReplayMiss.
  AgentResponse complete(const AgentRequest& request);

  std::vector<Transcript> transcripts() const;
  std::size_t call_count() const;

 private:
  ChatBackend* backend_;
  std::string model_id_;
  mutable std::mutex mutex_;
  std::vector<Transcript> log_;
};

/// Writes a replay store for `transcripts`. Equal digests must carry equal text (ConflictError otherwise).
void record_session(const std::vector<Transcript>& transcripts, const std::string& sink);
std::string serialize_replay_store(const std::vector<Transcript>& transcripts);

/// Sends `request`; if `parse` rejects the reply, reprompts exactly once with the rejection reason.
/// `parse(reply, why)` returns the parsed value or nullopt after filling `why`.
template <typename Parse>
auto complete_with_reprompt(Gateway& gateway, const AgentRequest& request, Parse&& parse, ErrorKind failure,
                            std::string_view format_hint) {
  std::string why;
  auto first = gateway.complete(request);
  if (auto parsed = parse(first.text, why)) return *parsed;

  AgentRequest retry = request;
  retry.user_text += "\n\n---\nYour previous reply was:\n" + first.text +
                     "\n\nThat reply did not follow the required format (" + why + "). " + std::string(format_hint);
  std::string why_again;
  auto second = gateway.complete(retry);
  if (auto parsed = parse(second.text, why_again)) return *parsed;
  throw Error(failure, why_again);
}

}  // namespace align
