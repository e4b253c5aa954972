#include "align/gateway.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>

#include "align/default_prompts.hpp"
#include "align/learner_data.hpp"
#include "align/text.hpp"

namespace align {

using nlohmann::json;

std::string request_digest(const AgentRequest& request) {
  // Length-prefixed fields so no two distinct requests share a preimage.
  std::string canonical;
  auto put = [&](std::string_view field) {
    canonical += std::to_string(field.size());
    canonical.push_back(':');
    canonical.append(field);
    canonical.push_back('\n');
  };
  put("align-request-v1");
  put(request.model_id);
  put(format_number(request.temperature));
  put(request.system_text);
  put(request.user_text);
  return text::sha256_hex(canonical);
}

namespace {

bool is_name_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

// Calls `on_text(literal)` and `on_var(name)` for each segment of `body`.
template <typename OnText, typename OnVar>
void scan_template(std::string_view body, OnText&& on_text, OnVar&& on_var) {
  std::size_t pos = 0;
  while (pos < body.size()) {
    auto open = body.find("{{", pos);
    if (open == std::string_view::npos) break;
    auto close = body.find("}}", open + 2);
    if (close == std::string_view::npos) break;
    auto name = body.substr(open + 2, close - open - 2);
    bool valid = !name.empty();
    for (char c : name) valid = valid && is_name_char(c);
    if (!valid) {
      on_text(body.substr(pos, open + 2 - pos));
      pos = open + 2;
      continue;
    }
    on_text(body.substr(pos, open - pos));
    on_var(name);
    pos = close + 2;
  }
  on_text(body.substr(pos));
}

}  // namespace

std::vector<std::string> PromptTemplate::placeholders() const {
  std::vector<std::string> names;
  scan_template(body, [](std::string_view) {},
                [&](std::string_view name) {
                  for (const auto& n : names) {
                    if (n == name) return;
                  }
                  names.emplace_back(name);
                });
  return names;
}

RenderResult render(const PromptTemplate& tmpl, const std::map<std::string, std::string>& bindings) {
  RenderResult result;
  std::map<std::string, bool> used;
  scan_template(tmpl.body, [&](std::string_view literal) { result.text.append(literal); },
                [&](std::string_view name) {
                  auto it = bindings.find(std::string(name));
                  if (it == bindings.end()) {
                    throw Error(ErrorKind::UnboundPlaceholder, std::string(name) + " in template '" + tmpl.name + "'");
                  }
                  used[it->first] = true;
                  result.text.append(it->second);
                });
  for (const auto& [name, value] : bindings) {
    if (!used.count(name)) result.unused_bindings.push_back(name);
  }
  return result;
}

PromptLibrary PromptLibrary::defaults() {
  PromptLibrary lib;
  auto add = [&](std::string name, std::string_view body) {
    lib.templates_[name] = PromptTemplate{name, std::string(body)};
  };
  add("system", prompts::k_system);
  add("diagnose", prompts::k_diagnose);
  add("label", prompts::k_label);
  add("compat", prompts::k_compat);
  add("summarize", prompts::k_summarize);
  add("preferences", prompts::k_preferences);
  return lib;
}

PromptLibrary PromptLibrary::from_directory(const std::string& dir) {
  auto lib = defaults();
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorKind::IoError, "prompt directory " + dir + " not found");
  for (auto& [name, tmpl] : lib.templates_) {
    auto path = std::filesystem::path(dir) / (name + ".txt");
    if (std::filesystem::exists(path)) tmpl.body = text::read_file(path.string());
  }
  return lib;
}

const PromptTemplate& PromptLibrary::get(std::string_view name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) throw Error(ErrorKind::ConfigError, "no prompt template named " + std::string(name));
  return it->second;
}

ReplayBackend ReplayBackend::parse(std::string_view raw) {
  json doc;
  try {
    doc = json::parse(raw);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::SchemaError, std::string("replay store: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::SchemaError, "replay store: expected an object");
  std::map<std::string, AgentResponse> entries;
  for (const auto& [digest, entry] : doc.items()) {
    if (!entry.is_object() || !entry.contains("text") || !entry["text"].is_string()) {
      throw Error(ErrorKind::SchemaError, "replay store: entry " + digest + " lacks a text field");
    }
    entries[digest] = AgentResponse{entry["text"].get<std::string>(), entry.value("model_id", std::string{})};
  }
  return ReplayBackend(std::move(entries));
}

ReplayBackend ReplayBackend::load(const std::string& path) { return parse(text::read_file(path)); }

AgentResponse ReplayBackend::send(const AgentRequest&, const std::string& digest) {
  auto it = entries_.find(digest);
  if (it == entries_.end()) throw Error(ErrorKind::ReplayMiss, digest);
  return it->second;
}

AgentRequest Gateway::make_request(std::string system_text, std::string user_text) const {
  return AgentRequest{model_id_, 0.0, std::move(system_text), std::move(user_text)};
}

AgentResponse Gateway::complete(const AgentRequest& request) {
  if (request.temperature != 0.0) {
    throw Error(ErrorKind::NonZeroTemperature, "temperature " + format_number(request.temperature));
  }
  if (request.user_text.empty()) throw Error(ErrorKind::ConfigError, "empty user_text");

  auto digest = request_digest(request);
  auto response = backend_->send(request, digest);
  if (response.text.empty()) throw Error(ErrorKind::BackendUnavailable, "empty reply for " + digest);
  if (response.model_id.empty()) response.model_id = request.model_id;

  std::lock_guard lock(mutex_);
  log_.push_back(Transcript{request, response, std::chrono::system_clock::now(), digest});
  return response;
}

std::vector<Transcript> Gateway::transcripts() const {
  std::lock_guard lock(mutex_);
  return log_;
}

std::size_t Gateway::call_count() const {
  std::lock_guard lock(mutex_);
  return log_.size();
}

std::string serialize_replay_store(const std::vector<Transcript>& transcripts) {
  json store = json::object();
  for (const auto& t : transcripts) {
    auto it = store.find(t.request_digest);
    if (it != store.end()) {
      if ((*it)["text"].get<std::string>() != t.response.text) {
        throw Error(ErrorKind::ConflictError, "digest " + t.request_digest + " recorded with two different replies");
      }
      continue;
    }
    store[t.request_digest] = {{"text", t.response.text}, {"model_id", t.response.model_id}};
  }
  return store.dump(2) + "\n";
}

void record_session(const std::vector<Transcript>& transcripts, const std::string& sink) {
  text::write_file(sink, serialize_replay_store(transcripts));
}

}  // namespace align
