#pragma once

#include <string>

#include "align/gateway.hpp"

namespace align::tools {

/// Deterministic stand-in for a chat model. Replies are derived only from the facts in the prompt and follow
/// each prompt's reply contract, so recorded sessions exercise the real parsers. One diagnosis reply per run is
/// deliberately malformed on the first attempt (topic `malformed_topic`) to exercise the reprompt path.
class ScriptedChatBackend final : public ChatBackend {
 public:
  explicit ScriptedChatBackend(std::string malformed_topic = {}) : malformed_topic_(std::move(malformed_topic)) {}
  AgentResponse send(const AgentRequest& request, const std::string& digest) override;

 private:
  std::string malformed_topic_;
};

}  // namespace align::tools
