#pragma once

#include <map>
#include <string>
#include <vector>

#include "align/diagnosis.hpp"
#include "align/gateway.hpp"

namespace align {

enum class MediaKind { VideoPage, Article, Pdf, Interactive };
std::string_view to_string(MediaKind kind) noexcept;

struct SearchQuery {
  Topic gap_topic;
  std::string text;
  Modality preferred_modality = Modality::Video;
};

struct SearchResult {
  std::string url;
  std::string title;
  std::string snippet;

  friend bool operator==(const SearchResult&, const SearchResult&) = default;
};

struct ResourceContent {
  std::string url;
  MediaKind media_kind = MediaKind::Article;
  std::string text_excerpt;  // first 4000 characters of extracted text
  int http_status = 0;
};

struct Resource {
  std::string url;
  std::string title;
  Topic topic;
  Modality modality = Modality::TextPdf;
  std::string rationale;

  friend bool operator==(const Resource&, const Resource&) = default;
};

struct RecommendationSet {
  StudentId student;
  std::vector<Resource> resources;  // acceptance order
  std::size_t k_requested = 0;
};

inline constexpr std::size_t k_max_search_results = 10;
inline constexpr std::size_t k_excerpt_chars = 4000;

// ---------------------------------------------------------------------------
// Queries

/// Up to `max` short phrases drawn from the diagnosis statements: the first quoted phrase of a
/// statement, otherwise its first three content words.
std::vector<std::string> diagnosis_keyphrases(const ConceptDiagnosis& diagnosis, std::size_t max = 2);

/// Search keyword for a modality, e.g. "video tutorial".
std::string_view modality_keyword(Modality modality) noexcept;

/// topic + up to two keyphrases + keyword for the top-ranked modality.
SearchQuery construct_query(const SkillGapEntry& gap, const ExtractedPreferences& prefs, const ConceptDiagnosis& diagnosis);

// ---------------------------------------------------------------------------
// Search and fetch backends

class SearchBackend {
 public:
  virtual ~SearchBackend() = default;
  virtual std::vector<SearchResult> search(const std::string& query) = 0;
};

/// `search.json`: object mapping exact query text to an array of {url, title, snippet}.
class FixtureSearchBackend final : public SearchBackend {
 public:
  explicit FixtureSearchBackend(std::map<std::string, std::vector<SearchResult>> canned) : canned_(std::move(canned)) {}
  static FixtureSearchBackend load(const std::string& path);

  /// Errors: FixtureMiss naming the query.
  std::vector<SearchResult> search(const std::string& query) override;

 private:
  std::map<std::string, std::vector<SearchResult>> canned_;
};

/// GET <ALIGN_SEARCH_URL>?q=<query>&count=10 with a bearer key; accepts {"results": [...]} or {"web": {"results": [...]}}.
class LiveSearchBackend final : public SearchBackend {
 public:
  LiveSearchBackend(std::string url, std::string api_key) : url_(std::move(url)), api_key_(std::move(api_key)) {}
  static LiveSearchBackend from_environment();
  std::vector<SearchResult> search(const std::string& query) override;

 private:
  std::string url_;
  std::string api_key_;
};

struct FetchedPage {
  int status = 0;
  std::string content_type;
  std::string body;
};

class FetchBackend {
 public:
  virtual ~FetchBackend() = default;
  /// Throws Error(BrokenLink) when no response is obtained.
  virtual FetchedPage fetch(const std::string& url) = 0;
};

/// `pages/<sha256(url)>.json` holding {url, status, content_type, body}.
class FixtureFetchBackend final : public FetchBackend {
 public:
  explicit FixtureFetchBackend(std::string pages_dir) : pages_dir_(std::move(pages_dir)) {}
  static std::string page_file_name(const std::string& url);
  static std::string serialize_page(const std::string& url, const FetchedPage& page);

  /// Errors: FixtureMiss when no page file exists for the URL.
  FetchedPage fetch(const std::string& url) override;

 private:
  std::string pages_dir_;
};

class LiveFetchBackend final : public FetchBackend {
 public:
  explicit LiveFetchBackend(long timeout_seconds = 20) : timeout_seconds_(timeout_seconds) {}
  FetchedPage fetch(const std::string& url) override;

 private:
  long timeout_seconds_;
};

bool is_absolute_url(std::string_view url);
std::string strip_fragment(std::string_view url);
MediaKind infer_media_kind(std::string_view url, std::string_view content_type);
/// Visible text of an HTML document with scripts, styles and tags removed and whitespace collapsed.
std::string extract_visible_text(std::string_view html);

/// At most 10 results in backend order; results without an absolute URL are dropped.
std::vector<SearchResult> web_search(const SearchQuery& query, SearchBackend& backend);

/// Errors: BrokenLink when the status is outside [200, 299] or the fetch fails.
ResourceContent web_retrieve(const std::string& url, FetchBackend& backend);

// ---------------------------------------------------------------------------
// Compatibility and the recommendation loop

struct CompatibilityVerdict {
  bool accepted = false;
  std::string rationale;
  Modality modality = Modality::TextPdf;
};

/// Modalities a media kind satisfies; interactive pages serve both interactive and hands-on learners.
std::vector<Modality> modalities_for(MediaKind kind);

/// Rule mode: accept iff the media kind serves one of the top-2 modalities and the topic name or a
/// diagnosis keyphrase appears (case-insensitively) in the title or excerpt.
CompatibilityVerdict check_compatibility_rules(const ResourceContent& content, const SearchResult& candidate,
                                               const ExtractedPreferences& prefs, const SkillGapEntry& gap,
                                               const ConceptDiagnosis& diagnosis);

/// Parses `YES: <reason>` / `NO: <reason>` from the first non-empty line.
std::optional<std::pair<bool, std::string>> parse_verdict(std::string_view reply);

/// Agent mode through the gateway. Errors: UnparseableVerdict after one reprompt.
CompatibilityVerdict check_compatibility_agent(const ResourceContent& content, const SearchResult& candidate,
                                               const ExtractedPreferences& prefs, const SkillGapEntry& gap,
                                               const ConceptDiagnosis& diagnosis, Gateway& gateway,
                                               const PromptLibrary& prompts);

struct RecommendBackends {
  SearchBackend& search;
  FetchBackend& fetch;
  StageMode compat_mode = StageMode::Rule;
  Gateway* gateway = nullptr;
  const PromptLibrary* prompts = nullptr;
};

enum class TraceEvent { Searched, Fetched, Duplicate, Broken, Rejected, Accepted };
std::string_view to_string(TraceEvent event) noexcept;

struct TraceEntry {
  TraceEvent event;
  Topic topic;
  std::string subject;  // query text for Searched, URL otherwise
  std::string note;

  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

struct RecommendOptions {
  std::size_t k = 3;
  bool k_per_gap = false;  // alternative reading: K per gap instead of one global budget
};

/// Gaps in report order, candidates in search order; stops both loops once K resources are accepted.
/// Errors: InvalidK when k == 0; backend errors propagate.
RecommendationSet recommend(const GapReport& report, const ExtractedPreferences& prefs, const RecommendOptions& options,
                            RecommendBackends backends, std::vector<TraceEntry>* trace = nullptr);

}  // namespace align
