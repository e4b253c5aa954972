#include "support.hpp"

#include <cmath>
#include <algorithm>
#include <atomic>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "align/error.hpp"
#include "align/summarizer.hpp"
#include "align/text.hpp"

namespace align::testing {

namespace fs = std::filesystem;

fs::path source_dir() { return fs::path(ALIGN_SOURCE_DIR); }
fs::path sample_course() { return source_dir() / "data" / "sample_course"; }

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("align_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter.fetch_add(1)));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::uint64_t Gen::below(std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  for (;;) {
    auto x = rng_();
    if (x < limit) return x % n;
  }
}

std::int64_t Gen::between(std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
}

double Gen::unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
double Gen::real(double lo, double hi) { return lo + (hi - lo) * unit(); }
bool Gen::coin(double p) { return unit() < p; }

std::string Gen::word(std::size_t min_len, std::size_t max_len) {
  auto n = static_cast<std::size_t>(between(static_cast<std::int64_t>(min_len), static_cast<std::int64_t>(max_len)));
  std::string w;
  for (std::size_t i = 0; i < n; ++i) w.push_back(static_cast<char>('a' + below(26)));
  return w;
}

std::vector<OracleClassCounts> oracle_class_counts(const std::vector<std::vector<std::size_t>>& counts) {
  std::vector<std::pair<std::size_t, std::size_t>> instances;
  for (std::size_t t = 0; t < counts.size(); ++t) {
    for (std::size_t p = 0; p < counts[t].size(); ++p) {
      for (std::size_t i = 0; i < counts[t][p]; ++i) instances.emplace_back(t, p);
    }
  }
  std::vector<OracleClassCounts> out(counts.size());
  for (std::size_t c = 0; c < counts.size(); ++c) {
    for (const auto& [truth, pred] : instances) {
      bool is_truth = truth == c, is_pred = pred == c;
      if (is_truth && is_pred) ++out[c].tp;
      else if (!is_truth && is_pred) ++out[c].fp;
      else if (is_truth && !is_pred) ++out[c].fn;
      else ++out[c].tn;
    }
  }
  return out;
}

OracleMetrics oracle_metrics(const std::vector<std::vector<std::size_t>>& counts) {
  OracleMetrics m;
  auto per_class = oracle_class_counts(counts);
  std::size_t n = 0, correct = 0;
  for (std::size_t t = 0; t < counts.size(); ++t) {
    for (std::size_t p = 0; p < counts[t].size(); ++p) {
      n += counts[t][p];
      if (t == p) correct += counts[t][p];
    }
  }
  for (const auto& c : per_class) {
    double p = c.tp + c.fp ? double(c.tp) / double(c.tp + c.fp) : 0.0;
    double r = c.tp + c.fn ? double(c.tp) / double(c.tp + c.fn) : 0.0;
    double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    m.precision.push_back(p);
    m.recall.push_back(r);
    m.f1.push_back(f);
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / double(v.size());
  };
  m.macro_precision = mean(m.precision);
  m.macro_recall = mean(m.recall);
  m.macro_f1 = mean(m.f1);
  m.accuracy = n ? double(correct) / double(n) : 0.0;
  return m;
}

std::map<Topic, double> oracle_topic_means(const std::vector<GradebookEntry>& entries) {
  std::map<Topic, std::pair<long double, std::size_t>> acc;
  for (const auto& e : entries) {
    auto& [sum, n] = acc[e.topic];
    sum += static_cast<long double>(e.points_earned) / static_cast<long double>(e.points_possible);
    ++n;
  }
  std::map<Topic, double> out;
  for (const auto& [topic, sn] : acc) out[topic] = static_cast<double>(sn.first / static_cast<long double>(sn.second));
  return out;
}

std::vector<std::pair<Topic, double>> oracle_gaps(const std::map<Topic, double>& means, double tau) {
  std::vector<std::pair<Topic, double>> pool;
  for (const auto& [t, m] : means) {
    if (m < tau) pool.emplace_back(t, m);
  }
  std::vector<std::pair<Topic, double>> out;
  while (!pool.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pool.size(); ++i) {
      auto a = std::llround(pool[i].second * 1e9), b = std::llround(pool[best].second * 1e9);
      if (a < b || (a == b && pool[i].first < pool[best].first)) best = i;
    }
    out.push_back(pool[best]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return out;
}

AgentResponse FakeChat::send(const AgentRequest& request, const std::string&) {
  requests_.push_back(request);
  return {responder_(request), request.model_id};
}

std::vector<SearchResult> MapSearch::search(const std::string& query) {
  queries.push_back(query);
  auto it = results_.find(query);
  if (it != results_.end()) return it->second;
  if (fallback) return *fallback;
  throw Error(ErrorKind::FixtureMiss, "search query '" + query + "'");
}

FetchedPage MapFetch::fetch(const std::string& url) {
  fetched.push_back(url);
  auto it = pages_.find(url);
  if (it == pages_.end() || it->second.status == 0) throw Error(ErrorKind::BrokenLink, url);
  return it->second;
}

FetchedPage html_page(const std::string& title, const std::string& text, int status) {
  return {status, "text/html", "<html><head><title>" + title + "</title></head><body><p>" + text + "</p></body></html>"};
}

GradebookEntry grade(const std::string& student, const std::string& assessment, const Topic& topic, double earned,
                     double possible) {
  return {StudentId{student}, assessment, topic, earned, possible, earned / possible};
}

QuizQuestion mc_question(const std::string& id, const std::string& quiz, const Topic& topic,
                         std::vector<std::string> options, const std::string& answer, std::vector<std::string> tags,
                         std::optional<Difficulty> level) {
  QuizQuestion q;
  q.question_id = id;
  q.quiz_id = quiz;
  q.topic = topic;
  q.kind = QuestionKind::MultipleChoice;
  q.text = "Question " + id + " about " + topic;
  q.options = std::move(options);
  q.correct_answer = answer;
  q.concept_tags = std::move(tags);
  q.instructor_difficulty = level;
  return q;
}

PreferenceSurvey survey(const std::string& student, std::vector<Modality> ranking, Pacing pacing) {
  PreferenceSurvey s;
  s.student = StudentId{student};
  s.pacing = pacing;
  s.modality_ranking = std::move(ranking);
  s.assessment_preference = "quizzes";
  s.feedback_preference = "hints";
  s.study_time = "evenings";
  return s;
}

std::map<std::string, std::string> read_tree(const std::filesystem::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    out[std::filesystem::relative(entry.path(), dir).generic_string()] = text::read_file(entry.path().string());
  }
  return out;
}

std::vector<std::string> audit_pipeline_outputs(const std::filesystem::path& out_dir, const std::filesystem::path& fixtures_dir) {
  using nlohmann::json;
  std::vector<std::string> problems;

  auto gap_doc = json::parse(text::read_file((out_dir / "gap_report.json").string()));
  std::map<std::string, std::map<std::string, double>> gaps;  // student -> topic -> rho
  std::map<std::string, double> tau_of;
  for (const auto& r : gap_doc.at("reports")) {
    auto sid = r.at("student_id").get<std::string>();
    tau_of[sid] = r.at("tau_used").get<double>();
    auto& mine = gaps[sid];
    for (const auto& g : r.at("gaps")) mine[g.at("topic").get<std::string>()] = g.at("rho").get<double>();
  }

  for (const auto& entry : tau_of) {
    const auto& sid = entry.first;
    auto path = out_dir / ("summary_" + sid + ".md");
    if (!std::filesystem::exists(path)) {
      problems.push_back("missing " + path.filename().string());
      continue;
    }
    auto md = text::read_file(path.string());
    for (auto key : k_summary_sections) {
      auto heading = "## " + std::string(section_title(key)) + "\n";
      auto pos = md.find(heading);
      if (pos == std::string::npos) {
        problems.push_back(sid + ": summary lacks section " + std::string(key));
        continue;
      }
      auto body_start = pos + heading.size();
      auto next = md.find("\n## ", body_start);
      if (text::trim(md.substr(body_start, next == std::string::npos ? std::string::npos : next - body_start)).empty()) {
        problems.push_back(sid + ": empty section " + std::string(key));
      }
    }
  }

  auto rec_doc = json::parse(text::read_file((out_dir / "recommendations.json").string()));
  for (const auto& s : rec_doc.at("students")) {
    auto sid = s.at("student_id").get<std::string>();
    for (const auto& r : s.at("resources")) {
      auto url = r.at("url").get<std::string>();
      auto topic = r.at("topic").get<std::string>();
      auto it = gaps[sid].find(topic);
      if (it == gaps[sid].end() || !(it->second < tau_of[sid])) {
        problems.push_back(sid + ": " + url + " is not tied to a gap below tau");
      }
      auto page = fixtures_dir / "pages" / (text::sha256_hex(url) + ".json");
      if (!std::filesystem::exists(page)) {
        problems.push_back(sid + ": no fixture page for " + url);
        continue;
      }
      auto status = json::parse(text::read_file(page.string())).value("status", 0);
      if (status < 200 || status > 299) problems.push_back(sid + ": " + url + " has HTTP " + std::to_string(status));
    }
  }
  return problems;
}

}  // namespace align::testing
