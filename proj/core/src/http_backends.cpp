// libcurl-backed live adapters for the LLM, search and fetch backends.

#include <curl/curl.h>

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <memory>
#include <mutex>

#include "align/error.hpp"
#include "align/gateway.hpp"
#include "align/recommender.hpp"

namespace align {

using nlohmann::json;

namespace {

struct HttpResult {
  long status = 0;
  std::string content_type;
  std::string body;
};

std::size_t append_body(char* data, std::size_t size, std::size_t count, void* user) {
  static_cast<std::string*>(user)->append(data, size * count);
  return size * count;
}

void ensure_curl() {
  static std::once_flag once;
  std::call_once(once, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
}

struct SlistDeleter {
  void operator()(curl_slist* list) const { curl_slist_free_all(list); }
};

/// Throws Error(failure_kind) if the transfer itself fails.
HttpResult http_call(const std::string& url, const std::vector<std::string>& headers, const std::string* post_body,
                     long timeout_seconds, ErrorKind failure_kind) {
  ensure_curl();
  std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> curl(curl_easy_init(), &curl_easy_cleanup);
  if (!curl) throw Error(failure_kind, "curl_easy_init failed");

  std::unique_ptr<curl_slist, SlistDeleter> header_list;
  for (const auto& h : headers) header_list.reset(curl_slist_append(header_list.release(), h.c_str()));

  HttpResult result;
  curl_easy_setopt(curl.get(), CURLOPT_URL, url.c_str());
  curl_easy_setopt(curl.get(), CURLOPT_FOLLOWLOCATION, 1L);
  curl_easy_setopt(curl.get(), CURLOPT_MAXREDIRS, 5L);
  curl_easy_setopt(curl.get(), CURLOPT_TIMEOUT, timeout_seconds);
  curl_easy_setopt(curl.get(), CURLOPT_NOSIGNAL, 1L);
  curl_easy_setopt(curl.get(), CURLOPT_USERAGENT, "align/0.1 (+course diagnostics)");
  curl_easy_setopt(curl.get(), CURLOPT_WRITEFUNCTION, append_body);
  curl_easy_setopt(curl.get(), CURLOPT_WRITEDATA, &result.body);
  if (header_list) curl_easy_setopt(curl.get(), CURLOPT_HTTPHEADER, header_list.get());
  if (post_body) {
    curl_easy_setopt(curl.get(), CURLOPT_POSTFIELDS, post_body->c_str());
    curl_easy_setopt(curl.get(), CURLOPT_POSTFIELDSIZE, static_cast<long>(post_body->size()));
  }

  CURLcode rc = curl_easy_perform(curl.get());
  if (rc != CURLE_OK) throw Error(failure_kind, url + ": " + curl_easy_strerror(rc));
  curl_easy_getinfo(curl.get(), CURLINFO_RESPONSE_CODE, &result.status);
  char* type = nullptr;
  curl_easy_getinfo(curl.get(), CURLINFO_CONTENT_TYPE, &type);
  if (type) result.content_type = type;
  return result;
}

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string();
}

std::string url_escape(const std::string& s) {
  ensure_curl();
  std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> curl(curl_easy_init(), &curl_easy_cleanup);
  char* escaped = curl_easy_escape(curl.get(), s.c_str(), static_cast<int>(s.size()));
  std::string out = escaped ? escaped : "";
  curl_free(escaped);
  return out;
}

}  // namespace

LiveChatBackend::LiveChatBackend(std::string url, std::string api_key, long timeout_seconds)
    : url_(std::move(url)), api_key_(std::move(api_key)), timeout_seconds_(timeout_seconds) {}

LiveChatBackend LiveChatBackend::from_environment() {
  auto url = env_or_empty("ALIGN_LLM_URL");
  if (url.empty()) throw Error(ErrorKind::ConfigError, "ALIGN_LLM_URL is not set; pass --replay for offline runs");
  return LiveChatBackend(url, env_or_empty("ALIGN_LLM_KEY"));
}

AgentResponse LiveChatBackend::send(const AgentRequest& request, const std::string& digest) {
  json body = {{"model", request.model_id},
               {"temperature", request.temperature},
               {"messages", json::array({{{"role", "system"}, {"content", request.system_text}},
                                         {{"role", "user"}, {"content", request.user_text}}})}};
  auto payload = body.dump();
  std::vector<std::string> headers{"Content-Type: application/json"};
  if (!api_key_.empty()) headers.push_back("Authorization: Bearer " + api_key_);

  auto result = http_call(url_, headers, &payload, timeout_seconds_, ErrorKind::BackendUnavailable);
  if (result.status < 200 || result.status > 299) {
    throw Error(ErrorKind::BackendUnavailable, "LLM endpoint returned HTTP " + std::to_string(result.status) + " for " + digest);
  }
  try {
    auto doc = json::parse(result.body);
    AgentResponse response;
    response.text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
    response.model_id = doc.value("model", request.model_id);
    return response;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::BackendUnavailable, std::string("unexpected LLM response shape: ") + e.what());
  }
}

LiveSearchBackend LiveSearchBackend::from_environment() {
  auto url = env_or_empty("ALIGN_SEARCH_URL");
  if (url.empty()) throw Error(ErrorKind::ConfigError, "ALIGN_SEARCH_URL is not set; pass --fixtures for offline runs");
  return LiveSearchBackend(url, env_or_empty("ALIGN_SEARCH_KEY"));
}

std::vector<SearchResult> LiveSearchBackend::search(const std::string& query) {
  auto url = url_ + (url_.find('?') == std::string::npos ? "?" : "&") + "q=" + url_escape(query) + "&count=" +
             std::to_string(k_max_search_results);
  std::vector<std::string> headers{"Accept: application/json"};
  if (!api_key_.empty()) headers.push_back("Authorization: Bearer " + api_key_);
  auto result = http_call(url, headers, nullptr, 30, ErrorKind::BackendUnavailable);
  if (result.status < 200 || result.status > 299) {
    throw Error(ErrorKind::BackendUnavailable, "search endpoint returned HTTP " + std::to_string(result.status));
  }
  std::vector<SearchResult> out;
  try {
    auto doc = json::parse(result.body);
    const json* results = nullptr;
    if (doc.contains("results")) {
      results = &doc["results"];
    } else if (doc.contains("web") && doc["web"].contains("results")) {
      results = &doc["web"]["results"];
    }
    if (!results || !results->is_array()) throw Error(ErrorKind::BackendUnavailable, "search response has no results array");
    for (const auto& r : *results) {
      auto snippet = r.value("snippet", std::string{});
      if (snippet.empty()) snippet = r.value("description", std::string{});
      out.push_back({r.value("url", std::string{}), r.value("title", std::string{}), snippet});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::BackendUnavailable, std::string("unexpected search response: ") + e.what());
  }
  return out;
}

FetchedPage LiveFetchBackend::fetch(const std::string& url) {
  auto result = http_call(url, {}, nullptr, timeout_seconds_, ErrorKind::BrokenLink);
  return FetchedPage{static_cast<int>(result.status), result.content_type, std::move(result.body)};
}

}  // namespace align
