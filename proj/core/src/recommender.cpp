#include "align/recommender.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <regex>
#include <set>

#include "align/error.hpp"
#include "align/text.hpp"

namespace align {

using nlohmann::json;

std::string_view to_string(MediaKind kind) noexcept {
  switch (kind) {
    case MediaKind::VideoPage: return "video_page";
    case MediaKind::Article: return "article";
    case MediaKind::Pdf: return "pdf";
    case MediaKind::Interactive: return "interactive";
  }
  return "";
}

std::string_view to_string(TraceEvent event) noexcept {
  switch (event) {
    case TraceEvent::Searched: return "searched";
    case TraceEvent::Fetched: return "fetched";
    case TraceEvent::Duplicate: return "duplicate";
    case TraceEvent::Broken: return "broken";
    case TraceEvent::Rejected: return "rejected";
    case TraceEvent::Accepted: return "accepted";
  }
  return "";
}

std::vector<std::string> diagnosis_keyphrases(const ConceptDiagnosis& diagnosis, std::size_t max) {
  static const std::regex quoted(R"('([^']+)'|"([^"]+)\")");
  static const std::set<std::string> stopwords = {
      "a",     "an",    "and",  "are",  "as",   "at",   "be",      "by",    "does", "for",  "from", "has",  "have",
      "in",    "into",  "is",   "it",   "its",  "not",  "of",      "on",    "or",   "that", "the",  "their", "this",
      "to",    "was",   "were", "with", "when", "which", "learner", "student", "they", "does", "how",  "why",  "what"};

  std::vector<std::string> phrases;
  for (const auto& statement : diagnosis.statements) {
    if (phrases.size() >= max) break;
    if (statement == k_insufficient_evidence) continue;
    std::string phrase;
    std::smatch m;
    if (std::regex_search(statement, m, quoted)) {
      phrase = text::trim(m[1].matched ? m[1].str() : m[2].str());
    } else {
      std::vector<std::string> words;
      std::string word;
      auto flush = [&] {
        if (!word.empty() && !stopwords.count(text::to_lower(word)) && words.size() < 3) words.push_back(word);
        word.clear();
      };
      for (char c : statement) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '-') {
          word.push_back(c);
        } else {
          flush();
        }
      }
      flush();
      for (const auto& w : words) phrase += (phrase.empty() ? "" : " ") + w;
    }
    if (phrase.empty()) continue;
    bool dup = false;
    for (const auto& p : phrases) dup = dup || text::to_lower(p) == text::to_lower(phrase);
    if (!dup) phrases.push_back(phrase);
  }
  return phrases;
}

std::string_view modality_keyword(Modality modality) noexcept {
  switch (modality) {
    case Modality::Video: return "video tutorial";
    case Modality::TextPdf: return "tutorial article";
    case Modality::Interactive: return "interactive visualization";
    case Modality::HandsOn: return "hands-on exercises";
  }
  return "";
}

SearchQuery construct_query(const SkillGapEntry& gap, const ExtractedPreferences& prefs, const ConceptDiagnosis& diagnosis) {
  SearchQuery q;
  q.gap_topic = gap.topic;
  q.preferred_modality = prefs.ranked_modalities.empty() ? Modality::TextPdf : prefs.ranked_modalities.front();
  q.text = gap.topic;
  for (const auto& phrase : diagnosis_keyphrases(diagnosis, 2)) q.text += " " + phrase;
  q.text += " ";
  q.text += modality_keyword(q.preferred_modality);
  return q;
}

FixtureSearchBackend FixtureSearchBackend::load(const std::string& path) {
  json doc;
  try {
    doc = json::parse(text::read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::SchemaError, path + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::SchemaError, path + ": expected an object of query -> results");
  std::map<std::string, std::vector<SearchResult>> canned;
  for (const auto& [query, results] : doc.items()) {
    auto& list = canned[query];
    for (const auto& r : results) {
      list.push_back({r.value("url", ""), r.value("title", ""), r.value("snippet", "")});
    }
  }
  return FixtureSearchBackend(std::move(canned));
}

std::vector<SearchResult> FixtureSearchBackend::search(const std::string& query) {
  auto it = canned_.find(query);
  if (it == canned_.end()) throw Error(ErrorKind::FixtureMiss, "search query '" + query + "'");
  return it->second;
}

std::string FixtureFetchBackend::page_file_name(const std::string& url) { return text::sha256_hex(url) + ".json"; }

std::string FixtureFetchBackend::serialize_page(const std::string& url, const FetchedPage& page) {
  json doc = {{"url", url}, {"status", page.status}, {"content_type", page.content_type}, {"body", page.body}};
  return doc.dump(2) + "\n";
}

FetchedPage FixtureFetchBackend::fetch(const std::string& url) {
  auto path = std::filesystem::path(pages_dir_) / page_file_name(url);
  if (!std::filesystem::exists(path)) throw Error(ErrorKind::FixtureMiss, "page for " + url);
  json doc;
  try {
    doc = json::parse(text::read_file(path.string()));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::SchemaError, path.string() + ": " + e.what());
  }
  FetchedPage page;
  page.status = doc.value("status", 0);
  page.content_type = doc.value("content_type", "");
  page.body = doc.value("body", "");
  if (page.status == 0) throw Error(ErrorKind::BrokenLink, url + " (recorded connection failure)");
  return page;
}

bool is_absolute_url(std::string_view url) {
  static const std::regex re(R"(^https?://[^\s/?#]+([/?#]\S*)?$)", std::regex::icase);
  return std::regex_match(url.begin(), url.end(), re);
}

std::string strip_fragment(std::string_view url) { return std::string(url.substr(0, url.find('#'))); }

MediaKind infer_media_kind(std::string_view url, std::string_view content_type) {
  auto type = text::to_lower(text::trim(content_type.substr(0, content_type.find(';'))));
  auto lower = text::to_lower(url);
  auto path = lower.substr(0, lower.find_first_of("?#"));

  if (type == "application/pdf") return MediaKind::Pdf;
  if (type.rfind("video/", 0) == 0) return MediaKind::VideoPage;
  for (std::string_view host : {"youtube.com/", "youtu.be/", "vimeo.com/", "www.youtube-nocookie.com/"}) {
    if (lower.find(host) != std::string::npos) return MediaKind::VideoPage;
  }
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".pdf") == 0) return MediaKind::Pdf;
  for (std::string_view marker : {"visualgo", "interactive", "playground", "sandbox", "codepen.io", "replit.com",
                                  "jsfiddle", "simulator", "visualization", "visualizer"}) {
    if (lower.find(marker) != std::string::npos) return MediaKind::Interactive;
  }
  return MediaKind::Article;
}

namespace {

void drop_blocks(std::string& s, std::string_view open_tag, std::string_view close_tag) {
  auto lower = text::to_lower(s);
  std::string out;
  std::size_t pos = 0;
  while (true) {
    auto start = lower.find(open_tag, pos);
    if (start == std::string::npos) break;
    auto end = lower.find(close_tag, start);
    out.append(s, pos, start - pos);
    out.push_back(' ');
    if (end == std::string::npos) {
      pos = s.size();
      break;
    }
    pos = end + close_tag.size();
  }
  out.append(s, std::min(pos, s.size()), std::string::npos);
  s = std::move(out);
}

std::string utf8_prefix(const std::string& s, std::size_t max_chars) {
  std::size_t chars = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) {
      if (chars == max_chars) return s.substr(0, i);
      ++chars;
    }
  }
  return s;
}

}  // namespace

std::string extract_visible_text(std::string_view html) {
  std::string s(html);
  drop_blocks(s, "<!--", "-->");
  drop_blocks(s, "<script", "</script>");
  drop_blocks(s, "<style", "</style>");

  std::string stripped;
  bool in_tag = false;
  for (char c : s) {
    if (c == '<') {
      in_tag = true;
      stripped.push_back(' ');
    } else if (c == '>' && in_tag) {
      in_tag = false;
    } else if (!in_tag) {
      stripped.push_back(c);
    }
  }

  static const std::pair<std::string_view, std::string_view> entities[] = {
      {"&nbsp;", " "}, {"&lt;", "<"}, {"&gt;", ">"}, {"&quot;", "\""}, {"&#39;", "'"}, {"&apos;", "'"}, {"&amp;", "&"}};
  for (const auto& [from, to] : entities) {
    for (auto pos = stripped.find(from); pos != std::string::npos; pos = stripped.find(from, pos + to.size())) {
      stripped.replace(pos, from.size(), to);
    }
  }

  std::string out;
  bool space = false;
  for (char c : stripped) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
    } else {
      if (space) out.push_back(' ');
      space = false;
      out.push_back(c);
    }
  }
  return out;
}

std::vector<SearchResult> web_search(const SearchQuery& query, SearchBackend& backend) {
  std::vector<SearchResult> out;
  for (auto& r : backend.search(query.text)) {
    if (out.size() >= k_max_search_results) break;
    if (!is_absolute_url(r.url)) continue;
    out.push_back(std::move(r));
  }
  return out;
}

ResourceContent web_retrieve(const std::string& url, FetchBackend& backend) {
  auto page = backend.fetch(url);
  if (page.status < 200 || page.status > 299) {
    throw Error(ErrorKind::BrokenLink, url + " returned HTTP " + std::to_string(page.status));
  }
  ResourceContent content;
  content.url = url;
  content.http_status = page.status;
  content.media_kind = infer_media_kind(url, page.content_type);
  if (content.media_kind != MediaKind::Pdf) {
    auto type = text::to_lower(page.content_type);
    bool html = type.empty() || type.find("html") != std::string::npos || type.find("xml") != std::string::npos;
    content.text_excerpt = utf8_prefix(html ? extract_visible_text(page.body) : text::trim(page.body), k_excerpt_chars);
  }
  return content;
}

std::vector<Modality> modalities_for(MediaKind kind) {
  switch (kind) {
    case MediaKind::VideoPage: return {Modality::Video};
    case MediaKind::Article:
    case MediaKind::Pdf: return {Modality::TextPdf};
    case MediaKind::Interactive: return {Modality::Interactive, Modality::HandsOn};
  }
  return {};
}

CompatibilityVerdict check_compatibility_rules(const ResourceContent& content, const SearchResult& candidate,
                                               const ExtractedPreferences& prefs, const SkillGapEntry& gap,
                                               const ConceptDiagnosis& diagnosis) {
  CompatibilityVerdict v;
  auto top2 = prefs.top(2);
  std::optional<Modality> matched;
  std::size_t rank = 0;
  for (std::size_t i = 0; i < top2.size() && !matched; ++i) {
    for (auto m : modalities_for(content.media_kind)) {
      if (m == top2[i]) {
        matched = m;
        rank = i + 1;
      }
    }
  }
  v.modality = matched.value_or(modalities_for(content.media_kind).front());
  if (!matched) {
    std::string preferred;
    for (auto m : top2) preferred += (preferred.empty() ? "" : ", ") + std::string(to_string(m));
    v.rationale = "format " + std::string(to_string(content.media_kind)) + " not among preferred formats (" + preferred + ")";
    return v;
  }

  std::vector<std::string> terms{gap.topic};
  for (auto& p : diagnosis_keyphrases(diagnosis, 2)) terms.push_back(std::move(p));
  auto haystack = candidate.title + "\n" + content.text_excerpt;
  for (const auto& term : terms) {
    if (text::contains_icase(haystack, term)) {
      v.accepted = true;
      v.rationale = "matches preferred format " + std::string(to_string(*matched)) + " (rank " + std::to_string(rank) +
                    ") and covers '" + term + "'";
      return v;
    }
  }
  v.rationale = "topic not evidenced";
  return v;
}

std::optional<std::pair<bool, std::string>> parse_verdict(std::string_view reply) {
  static const std::regex re(R"(^\s*\**\s*(yes|no)\b\s*\**\s*[:.\-]?\s*(.*)$)", std::regex::icase);
  for (const auto& raw : text::split(reply, '\n')) {
    auto line = text::trim(raw);
    if (line.empty()) continue;
    std::smatch m;
    if (!std::regex_match(line, m, re)) return std::nullopt;
    bool yes = text::to_lower(m[1].str()) == "yes";
    auto reason = text::trim(m[2].str());
    return std::make_pair(yes, reason.empty() ? std::string(yes ? "judged compatible" : "judged incompatible") : reason);
  }
  return std::nullopt;
}

CompatibilityVerdict check_compatibility_agent(const ResourceContent& content, const SearchResult& candidate,
                                               const ExtractedPreferences& prefs, const SkillGapEntry& gap,
                                               const ConceptDiagnosis& diagnosis, Gateway& gateway,
                                               const PromptLibrary& prompts) {
  std::string statements;
  for (const auto& s : diagnosis.statements) statements += "- " + s + "\n";
  std::string modalities;
  for (auto m : prefs.ranked_modalities) modalities += (modalities.empty() ? "" : ", ") + std::string(to_string(m));
  auto user = render(prompts.get("compat"), {{"topic", gap.topic},
                                             {"diagnosis", statements},
                                             {"pacing", std::string(to_string(prefs.pacing))},
                                             {"modalities", modalities},
                                             {"feedback", prefs.feedback_style.empty() ? "unspecified" : prefs.feedback_style},
                                             {"title", candidate.title},
                                             {"url", content.url},
                                             {"media_kind", std::string(to_string(content.media_kind))},
                                             {"excerpt", utf8_prefix(content.text_excerpt, 1500)}})
                  .text;
  auto request = gateway.make_request(prompts.get("system").body, user);
  auto [accepted, reason] = complete_with_reprompt(
      gateway, request,
      [](const std::string& reply, std::string& why) {
        auto v = parse_verdict(reply);
        if (!v) why = "first line does not start with YES or NO";
        return v;
      },
      ErrorKind::UnparseableVerdict, "Reply on one line starting with YES: or NO: followed by a short reason.");

  CompatibilityVerdict v;
  v.accepted = accepted;
  v.rationale = reason;
  v.modality = modalities_for(content.media_kind).front();
  auto served = modalities_for(content.media_kind);
  for (auto m : prefs.top(2)) {
    if (std::find(served.begin(), served.end(), m) != served.end()) {
      v.modality = m;
      break;
    }
  }
  return v;
}

RecommendationSet recommend(const GapReport& report, const ExtractedPreferences& prefs, const RecommendOptions& options,
                            RecommendBackends backends, std::vector<TraceEntry>* trace) {
  if (options.k == 0) throw Error(ErrorKind::InvalidK, "K must be at least 1");
  if (prefs.student != report.student) throw Error(ErrorKind::StudentMismatch, prefs.student.value + " vs " + report.student.value);

  RecommendationSet out;
  out.student = report.student;
  out.k_requested = options.k;
  auto log = [&](TraceEvent e, const Topic& topic, std::string subject, std::string note = {}) {
    if (trace) trace->push_back({e, topic, std::move(subject), std::move(note)});
  };

  std::set<std::string> accepted_urls;
  std::map<std::string, std::optional<ResourceContent>> fetched;  // nullopt = broken

  for (const auto& [gap, diagnosis] : report.gaps) {
    std::size_t taken_for_gap = 0;
    auto budget_full = [&] { return options.k_per_gap ? taken_for_gap == options.k : out.resources.size() == options.k; };

    auto query = construct_query(gap, prefs, diagnosis);
    log(TraceEvent::Searched, gap.topic, query.text);
    for (const auto& candidate : web_search(query, backends.search)) {
      auto url = strip_fragment(candidate.url);
      if (accepted_urls.count(url)) {
        log(TraceEvent::Duplicate, gap.topic, url);
        continue;
      }
      auto cached = fetched.find(url);
      if (cached == fetched.end()) {
        std::optional<ResourceContent> content;
        try {
          content = web_retrieve(url, backends.fetch);
          log(TraceEvent::Fetched, gap.topic, url, std::to_string(content->http_status));
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::BrokenLink) throw;
          log(TraceEvent::Fetched, gap.topic, url, "broken");
        }
        cached = fetched.emplace(url, std::move(content)).first;
      }
      if (!cached->second) {
        log(TraceEvent::Broken, gap.topic, url);
        continue;
      }

      CompatibilityVerdict verdict;
      if (backends.compat_mode == StageMode::Agent) {
        if (!backends.gateway || !backends.prompts) {
          throw Error(ErrorKind::ConfigError, "agent compatibility checks need an LLM backend (--replay or live)");
        }
        verdict = check_compatibility_agent(*cached->second, candidate, prefs, gap, diagnosis, *backends.gateway,
                                            *backends.prompts);
      } else {
        verdict = check_compatibility_rules(*cached->second, candidate, prefs, gap, diagnosis);
      }

      if (verdict.accepted) {
        out.resources.push_back({url, candidate.title, gap.topic, verdict.modality, verdict.rationale});
        accepted_urls.insert(url);
        ++taken_for_gap;
        log(TraceEvent::Accepted, gap.topic, url, verdict.rationale);
      } else {
        log(TraceEvent::Rejected, gap.topic, url, verdict.rationale);
      }
      if (budget_full()) break;
    }
    if (!options.k_per_gap && out.resources.size() == options.k) break;
  }
  return out;
}

}  // namespace align
