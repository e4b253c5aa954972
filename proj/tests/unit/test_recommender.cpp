#include <gtest/gtest.h>

#include "align/error.hpp"
#include "align/recommender.hpp"
#include "support.hpp"

using namespace align;
namespace at = align::testing;

namespace {

ExtractedPreferences prefs_for(const std::string& student, std::vector<Modality> ranking) {
  ExtractedPreferences p;
  p.student = StudentId{student};
  p.ranked_modalities = std::move(ranking);
  return p;
}

GapReport report_for(const std::string& student, std::vector<Topic> topics) {
  GapReport r;
  r.student = StudentId{student};
  std::size_t rank = 0;
  for (const auto& t : topics) {
    ++rank;
    r.gaps.push_back({SkillGapEntry{t, 0.1 * double(rank), rank}, ConceptDiagnosis{t, {"Weak on basics"}, {"q"}}});
  }
  return r;
}

const auto k_text_first = std::vector<Modality>{Modality::TextPdf, Modality::Interactive, Modality::Video, Modality::HandsOn};

}  // namespace

TEST(Query, TopicKeyphrasesAndModality) {
  ConceptDiagnosis d{"Hash Tables",
                     {"Confuses 'open addressing' with chaining [x]", "The learner misreads load factor thresholds",
                      "Third statement ignored"},
                     {}};
  auto q = construct_query({"Hash Tables", 0.4, 1}, prefs_for("s", {Modality::Video, Modality::TextPdf}), d);
  EXPECT_EQ(q.text, "Hash Tables open addressing misreads load factor video tutorial");
  EXPECT_EQ(q.preferred_modality, Modality::Video);

  ConceptDiagnosis none{"Trees", {std::string(k_insufficient_evidence)}, {}};
  EXPECT_EQ(construct_query({"Trees", 0.1, 1}, prefs_for("s", {Modality::HandsOn}), none).text,
            "Trees hands-on exercises");
}

TEST(MediaKind, Inference) {
  EXPECT_EQ(infer_media_kind("https://www.youtube.com/watch?v=1", "text/html"), MediaKind::VideoPage);
  EXPECT_EQ(infer_media_kind("https://x.edu/notes.PDF?dl=1", ""), MediaKind::Pdf);
  EXPECT_EQ(infer_media_kind("https://x.edu/notes", "application/pdf; charset=binary"), MediaKind::Pdf);
  EXPECT_EQ(infer_media_kind("https://visualgo.net/en/sorting", "text/html"), MediaKind::Interactive);
  EXPECT_EQ(infer_media_kind("https://blog.example.com/post", "text/html"), MediaKind::Article);
  EXPECT_EQ(modalities_for(MediaKind::Interactive), (std::vector<Modality>{Modality::Interactive, Modality::HandsOn}));
}

TEST(Urls, AbsoluteAndFragments) {
  EXPECT_TRUE(is_absolute_url("https://a.b/c?d#e"));
  EXPECT_TRUE(is_absolute_url("HTTP://host"));
  EXPECT_FALSE(is_absolute_url("/relative/path"));
  EXPECT_FALSE(is_absolute_url("ftp://host/x"));
  EXPECT_FALSE(is_absolute_url("https://has space.com"));
  EXPECT_EQ(strip_fragment("https://a.b/c#t=10"), "https://a.b/c");
  EXPECT_EQ(strip_fragment("https://a.b/c"), "https://a.b/c");
}

TEST(VisibleText, DropsScriptsAndTags) {
  auto text = extract_visible_text(
      "<html><head><style>p{color:red}</style><script>var x = '<b>';</script></head>"
      "<body><!-- hidden --><h1>Heaps</h1>\n<p>Sift&nbsp;down &amp; up</p></body></html>");
  EXPECT_EQ(text, "Heaps Sift down & up");
}

TEST(WebSearch, CapsAndFiltersResults) {
  std::vector<SearchResult> many;
  many.push_back({"not-a-url", "bad", ""});
  for (int i = 0; i < 14; ++i) many.push_back({"https://e.com/" + std::to_string(i), "t", ""});
  at::MapSearch search({{"q", many}});
  auto out = web_search(SearchQuery{"T", "q", Modality::Video}, search);
  ASSERT_EQ(out.size(), k_max_search_results);
  EXPECT_EQ(out.front().url, "https://e.com/0");
}

TEST(WebRetrieve, StatusHandling) {
  at::MapFetch fetch({{"https://ok.com", at::html_page("Trees", "All about trees")},
                      {"https://gone.com", at::html_page("x", "x", 404)},
                      {"https://redirect.com", at::html_page("x", "x", 301)},
                      {"https://down.com", FetchedPage{0, "", ""}}});
  auto ok = web_retrieve("https://ok.com", fetch);
  EXPECT_EQ(ok.http_status, 200);
  EXPECT_NE(ok.text_excerpt.find("All about trees"), std::string::npos);
  for (auto url : {"https://gone.com", "https://redirect.com", "https://down.com", "https://unknown.com"}) {
    try {
      web_retrieve(url, fetch);
      ADD_FAILURE() << url;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::BrokenLink) << url;
    }
  }
}

TEST(WebRetrieve, ExcerptIsCappedOnCharacterBoundaries) {
  std::string body;
  for (int i = 0; i < 5000; ++i) body += "\xC3\xA9";  // é
  at::MapFetch fetch({{"https://long.com", FetchedPage{200, "text/plain", body}}});
  auto content = web_retrieve("https://long.com", fetch);
  EXPECT_EQ(content.text_excerpt.size(), 2 * k_excerpt_chars);
}

TEST(Compatibility, RuleMode) {
  auto prefs = prefs_for("s", {Modality::Video, Modality::HandsOn, Modality::TextPdf, Modality::Interactive});
  SkillGapEntry gap{"Heaps", 0.3, 1};
  ConceptDiagnosis d{"Heaps", {"Confuses 'sift down' with insertion"}, {}};
  ResourceContent video{"https://youtube.com/watch?v=h", MediaKind::VideoPage, "Heaps explained", 200};
  ResourceContent article{"https://blog/heaps", MediaKind::Article, "Heaps explained", 200};
  ResourceContent lab{"https://playground/x", MediaKind::Interactive, "practice sift down here", 200};
  EXPECT_TRUE(check_compatibility_rules(video, {video.url, "Video", ""}, prefs, gap, d).accepted);
  auto rejected = check_compatibility_rules(article, {article.url, "Heaps", ""}, prefs, gap, d);
  EXPECT_FALSE(rejected.accepted);
  EXPECT_NE(rejected.rationale.find("not among preferred"), std::string::npos);
  auto hands_on = check_compatibility_rules(lab, {lab.url, "Lab", ""}, prefs, gap, d);
  EXPECT_TRUE(hands_on.accepted);
  EXPECT_EQ(hands_on.modality, Modality::HandsOn);
  ResourceContent off_topic{"https://youtube.com/watch?v=z", MediaKind::VideoPage, "Cooking pasta", 200};
  EXPECT_FALSE(check_compatibility_rules(off_topic, {off_topic.url, "Pasta", ""}, prefs, gap, d).accepted);
}

TEST(Compatibility, VerdictParsing) {
  EXPECT_EQ(parse_verdict("YES: matches video preference"), std::make_pair(true, std::string("matches video preference")));
  EXPECT_EQ(parse_verdict("\n**No** - too advanced")->first, false);
  EXPECT_EQ(parse_verdict("yes")->second, "judged compatible");
  EXPECT_FALSE(parse_verdict("Maybe: unclear"));
  EXPECT_FALSE(parse_verdict("Yesterday I saw it"));
  EXPECT_FALSE(parse_verdict(""));
}

TEST(Compatibility, AgentModeUsesGatewayAtZeroTemperature) {
  at::FakeChat chat([](const AgentRequest& r) {
    return r.user_text.find("interactive") != std::string::npos ? std::string("YES: hands-on practice")
                                                                 : std::string("NO: wrong format");
  });
  Gateway gw(chat, "m");
  auto prefs = prefs_for("s", {Modality::Interactive, Modality::HandsOn, Modality::Video, Modality::TextPdf});
  ResourceContent lab{"https://playground/x", MediaKind::Interactive, "practice", 200};
  auto v = check_compatibility_agent(lab, {lab.url, "Lab", ""}, prefs, {"T", 0.2, 1}, {"T", {"s"}, {}}, gw,
                                     PromptLibrary::defaults());
  EXPECT_TRUE(v.accepted);
  EXPECT_EQ(v.modality, Modality::Interactive);
  for (const auto& r : chat.requests()) EXPECT_EQ(r.temperature, 0.0);
}

TEST(Recommend, BudgetBrokenLinksAndDuplicates) {
  auto report = report_for("s1", {"Sorting", "Graphs"});
  auto prefs = prefs_for("s1", k_text_first);
  auto q1 = construct_query(report.gaps[0].first, prefs, report.gaps[0].second).text;
  auto q2 = construct_query(report.gaps[1].first, prefs, report.gaps[1].second).text;
  at::MapSearch search({{q1, {{"https://a.com/u1", "Sorting 1", ""}, {"https://a.com/u2", "Sorting 2", ""},
                              {"https://youtube.com/watch?v=u3", "Sorting video", ""}}},
                        {q2, {{"https://a.com/u1#section", "Graphs dup", ""}, {"https://a.com/u4", "Graphs 4", ""},
                              {"https://a.com/u5", "Graphs 5", ""}, {"https://a.com/u6", "Graphs 6", ""}}}});
  at::MapFetch fetch({{"https://a.com/u1", at::html_page("Sorting and Graphs", "Sorting and Graphs")},
                      {"https://a.com/u2", at::html_page("x", "x", 404)},
                      {"https://youtube.com/watch?v=u3", at::html_page("Sorting", "Sorting video")},
                      {"https://a.com/u4", at::html_page("Graphs", "Graphs")},
                      {"https://a.com/u5", at::html_page("Graphs", "Graphs")},
                      {"https://a.com/u6", at::html_page("Graphs", "Graphs")}});
  std::vector<TraceEntry> trace;
  auto set = recommend(report, prefs, {3, false}, {search, fetch}, &trace);
  std::vector<std::string> urls;
  for (const auto& r : set.resources) urls.push_back(r.url);
  EXPECT_EQ(urls, (std::vector<std::string>{"https://a.com/u1", "https://a.com/u4", "https://a.com/u5"}));
  EXPECT_EQ(set.resources[1].topic, "Graphs");
  // u6 never fetched; the fragment duplicate is not fetched again.
  EXPECT_EQ(fetch.fetched, (std::vector<std::string>{"https://a.com/u1", "https://a.com/u2", "https://youtube.com/watch?v=u3",
                                                     "https://a.com/u4", "https://a.com/u5"}));
  std::size_t duplicates = 0, broken = 0;
  for (const auto& t : trace) {
    duplicates += t.event == TraceEvent::Duplicate;
    broken += t.event == TraceEvent::Broken;
  }
  EXPECT_EQ(duplicates, 1u);
  EXPECT_EQ(broken, 1u);
}

TEST(Recommend, KPerGapAndLimits) {
  auto report = report_for("s1", {"A", "B"});
  auto prefs = prefs_for("s1", k_text_first);
  at::MapSearch search({});
  search.fallback = std::vector<SearchResult>{{"https://x.com/1", "A B", ""}, {"https://x.com/2", "A B", ""},
                                              {"https://x.com/3", "A B", ""}};
  at::MapFetch fetch({{"https://x.com/1", at::html_page("A B", "A B")},
                      {"https://x.com/2", at::html_page("A B", "A B")},
                      {"https://x.com/3", at::html_page("A B", "A B")}});
  auto global = recommend(report, prefs, {2, false}, {search, fetch});
  EXPECT_EQ(global.resources.size(), 2u);
  EXPECT_EQ(search.queries.size(), 1u);

  auto per_gap = recommend(report, prefs, {2, true}, {search, fetch});
  // Gap B sees the same URLs; the first two are duplicates.
  ASSERT_EQ(per_gap.resources.size(), 3u);
  EXPECT_EQ(per_gap.resources[2].url, "https://x.com/3");
  EXPECT_EQ(per_gap.resources[2].topic, "B");

  EXPECT_THROW(recommend(report, prefs, {0, false}, {search, fetch}), Error);
  EXPECT_THROW(recommend(report, prefs_for("other", k_text_first), {3, false}, {search, fetch}), Error);
}

TEST(Recommend, NoGapsTouchesNoBackend) {
  at::MapSearch search({});
  at::MapFetch fetch({});
  auto set = recommend(report_for("s1", {}), prefs_for("s1", k_text_first), {}, {search, fetch});
  EXPECT_TRUE(set.resources.empty());
  EXPECT_TRUE(search.queries.empty());
}

TEST(Recommend, FixtureMissPropagates) {
  at::MapSearch search({});
  at::MapFetch fetch({});
  try {
    recommend(report_for("s1", {"A"}), prefs_for("s1", k_text_first), {}, {search, fetch});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::FixtureMiss);
  }
}

TEST(Recommend, NeverExceedsKProperty) {
  at::Gen gen(99);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Topic> topics;
    for (int i = 0; i < gen.between(0, 4); ++i) topics.push_back("T" + std::to_string(i));
    auto report = report_for("s1", topics);
    std::map<std::string, FetchedPage> pages;
    std::vector<SearchResult> results;
    for (int i = 0; i < gen.between(0, 12); ++i) {
      auto url = "https://r.com/" + std::to_string(gen.below(8)) + (gen.coin(0.3) ? "#f" : "");
      results.push_back({url, "T0 T1 T2 T3", ""});
      int status = gen.coin(0.2) ? 500 : 200;
      pages[strip_fragment(url)] = at::html_page("T0 T1 T2 T3", "T0 T1 T2 T3", status);
    }
    at::MapSearch search({});
    search.fallback = results;
    at::MapFetch fetch(pages);
    std::size_t k = static_cast<std::size_t>(gen.between(1, 5));
    auto set = recommend(report, prefs_for("s1", k_text_first), {k, false}, {search, fetch});
    EXPECT_LE(set.resources.size(), k);
    std::set<std::string> seen;
    for (const auto& r : set.resources) {
      EXPECT_TRUE(seen.insert(r.url).second) << r.url;
      EXPECT_EQ(r.url.find('#'), std::string::npos);
      EXPECT_EQ(pages.at(r.url).status, 200);
    }
  }
}
