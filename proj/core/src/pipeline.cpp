#include "align/pipeline.hpp"

#include <cstdlib>
#include <filesystem>
#include <nlohmann/json.hpp>

#include "align/error.hpp"
#include "align/text.hpp"

namespace align {

namespace fs = std::filesystem;
using nlohmann::json;

void RunConfig::validate() const {
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error(ErrorKind::InvalidTau, "tau must be in [0,1], got " + format_number(tau));
  if (k == 0) throw Error(ErrorKind::InvalidK, "K must be at least 1");
  bands.validate();
  if (course_path.empty()) throw Error(ErrorKind::ConfigError, "--course is required");
  auto require = [](const std::optional<std::string>& path, const char* flag) {
    if (path && !fs::exists(*path)) throw Error(ErrorKind::ConfigError, std::string(flag) + " path does not exist: " + *path);
  };
  require(replay_path, "--replay");
  require(fixtures_dir, "--fixtures");
  require(prompts_dir, "--prompts");
  if (as_of && !text::parse_utc(*as_of)) throw Error(ErrorKind::ConfigError, "--as-of must be YYYY-MM-DD or YYYY-MM-DDTHH:MM:SSZ");
}

Session::Session(RunConfig config, ChatBackend* chat_override, SearchBackend* search_override,
                 FetchBackend* fetch_override)
    : config_(std::move(config)),
      chat_override_(chat_override),
      search_override_(search_override),
      fetch_override_(fetch_override) {
  config_.validate();
  CourseManifest manifest;
  dataset_ = load_course(config_.course_path, &manifest);
  prompts_ = config_.prompts_dir ? PromptLibrary::from_directory(*config_.prompts_dir) : PromptLibrary::defaults();

  auto stamp = config_.as_of ? config_.as_of : manifest.as_of;
  if (stamp) {
    auto t = text::parse_utc(*stamp);
    if (!t) throw Error(ErrorKind::ConfigError, "as_of is not a UTC timestamp: " + *stamp);
    generated_at_ = *t;
  } else {
    generated_at_ = std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
  }
}

Session::~Session() = default;

bool Session::has_llm() const {
  if (chat_override_ || config_.replay_path) return true;
  const char* url = std::getenv("ALIGN_LLM_URL");
  return url && *url;
}

Gateway& Session::gateway() {
  if (!gateway_) {
    ChatBackend* backend = chat_override_;
    if (!backend) {
      if (config_.replay_path) {
        chat_ = std::make_unique<ReplayBackend>(ReplayBackend::load(*config_.replay_path));
      } else {
        chat_ = std::make_unique<LiveChatBackend>(LiveChatBackend::from_environment());
      }
      backend = chat_.get();
    }
    gateway_ = std::make_unique<Gateway>(*backend, config_.model_id);
  }
  return *gateway_;
}

Gateway* Session::gateway_if_available() { return has_llm() ? &gateway() : nullptr; }

SearchBackend& Session::search() {
  if (search_override_) return *search_override_;
  if (!search_) {
    if (config_.fixtures_dir) {
      search_ = std::make_unique<FixtureSearchBackend>(
          FixtureSearchBackend::load((fs::path(*config_.fixtures_dir) / "search.json").string()));
    } else {
      search_ = std::make_unique<LiveSearchBackend>(LiveSearchBackend::from_environment());
    }
  }
  return *search_;
}

FetchBackend& Session::fetch() {
  if (fetch_override_) return *fetch_override_;
  if (!fetch_) {
    if (config_.fixtures_dir) {
      fetch_ = std::make_unique<FixtureFetchBackend>((fs::path(*config_.fixtures_dir) / "pages").string());
    } else {
      fetch_ = std::make_unique<LiveFetchBackend>();
    }
  }
  return *fetch_;
}

void Session::finish() {
  if (config_.record_path && gateway_ && gateway_->call_count() > 0) {
    record_session(gateway_->transcripts(), *config_.record_path);
  }
}

void write_json(const std::string& path, const json& doc) { text::write_file(path, doc.dump(2) + "\n"); }

namespace {

std::string out_path(const Session& s, const std::string& name) {
  fs::create_directories(s.config().out_dir);
  return (fs::path(s.config().out_dir) / name).string();
}

std::string safe_file_part(std::string_view s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') ? c : '_';
  return out;
}

json gaps_json(const std::vector<SkillGapEntry>& gaps) {
  json out = json::array();
  for (const auto& g : gaps) out.push_back({{"topic", g.topic}, {"rho", round6(g.rho)}, {"rank", g.rank}});
  return out;
}

}  // namespace

json proficiency_json(const Session& session, const std::vector<StudentProficiency>& students) {
  const auto& c = session.config();
  json list = json::array();
  for (const auto& s : students) {
    json topics = json::array();
    for (const auto& [topic, tp] : s.vector.entries) {
      topics.push_back({{"topic", topic},
                        {"rho", tp.evidence_count ? json(round6(tp.rho)) : json(nullptr)},
                        {"band", to_string(tp.band)},
                        {"evidence_count", tp.evidence_count}});
    }
    list.push_back({{"student_id", s.vector.student.value}, {"topics", topics}, {"gaps", gaps_json(s.gaps)}});
  }
  return json{{"course_id", session.dataset().course_id},
              {"generated_at", text::format_utc(session.generated_at())},
              {"tau", c.tau},
              {"bands", {{"high_min", c.bands.high_min}, {"medium_min", c.bands.medium_min}}},
              {"include_exams", c.include_exams},
              {"students", list}};
}

json gap_reports_json(const std::vector<GapReport>& reports) {
  json list = json::array();
  for (const auto& r : reports) {
    json gaps = json::array();
    for (const auto& [gap, d] : r.gaps) {
      gaps.push_back({{"topic", gap.topic},
                      {"rho", round6(gap.rho)},
                      {"rank", gap.rank},
                      {"statements", d.statements},
                      {"evidence_refs", d.evidence_refs}});
    }
    list.push_back({{"student_id", r.student.value},
                    {"tau_used", r.tau_used},
                    {"generated_at", text::format_utc(r.generated_at)},
                    {"gaps", gaps}});
  }
  return json{{"reports", list}};
}

json recommendations_json(const std::vector<StudentRecommendations>& recs, const RecommendOptions& options) {
  json list = json::array();
  for (const auto& r : recs) {
    json resources = json::array();
    for (const auto& res : r.set.resources) {
      resources.push_back({{"url", res.url},
                           {"title", res.title},
                           {"topic", res.topic},
                           {"modality", to_string(res.modality)},
                           {"rationale", res.rationale}});
    }
    json trace = json::array();
    for (const auto& t : r.trace) {
      trace.push_back({{"event", to_string(t.event)}, {"topic", t.topic}, {"subject", t.subject}, {"note", t.note}});
    }
    list.push_back({{"student_id", r.set.student.value},
                    {"k_requested", r.set.k_requested},
                    {"resources", resources},
                    {"trace", trace}});
  }
  return json{{"k", options.k}, {"k_per_gap", options.k_per_gap}, {"students", list}};
}

std::vector<StudentProficiency> run_proficiency(Session& session) {
  const auto& c = session.config();
  ProficiencyOptions options{c.bands, c.tau, c.include_exams};
  auto students = analyze_course(session.dataset(), options);
  write_json(out_path(session, "proficiency.json"), proficiency_json(session, students));
  return students;
}

std::vector<GapReport> run_diagnose(Session& session, const std::vector<StudentProficiency>& proficiency) {
  const auto& c = session.config();
  DiagnosisOptions options{c.mode_diagnose, c.include_exams};
  Gateway* gateway = nullptr;
  bool any_gap = false;
  for (const auto& s : proficiency) any_gap = any_gap || !s.gaps.empty();
  if (options.mode == StageMode::Agent && any_gap) gateway = &session.gateway();

  std::vector<GapReport> reports;
  for (const auto& s : proficiency) {
    reports.push_back(diagnose_gaps(session.dataset(), s, c.tau, options, gateway, session.prompts(), session.generated_at()));
  }
  write_json(out_path(session, "gap_report.json"), gap_reports_json(reports));
  return reports;
}

std::vector<ExtractedPreferences> run_preferences(Session& session) {
  const auto& c = session.config();
  std::vector<ExtractedPreferences> out;
  for (const auto& student : session.dataset().students) {
    const auto* survey = session.dataset().find_survey(student);
    if (!survey) {
      out.push_back(default_preferences(student));
    } else if (c.mode_prefs == StageMode::Agent && !survey->free_text.empty()) {
      out.push_back(extract_preferences(*survey, StageMode::Agent, &session.gateway(), &session.prompts()));
    } else {
      out.push_back(extract_preferences(*survey, StageMode::Rule));
    }
  }
  return out;
}

std::vector<LabelSet> run_label(Session& session, bool with_model) {
  std::vector<LabelSet> sets{load_instructor_labels(session.dataset().questions)};
  write_json(out_path(session, "labels_instructor.json"), json::parse(serialize_label_set(sets.front())));
  if (with_model) {
    sets.push_back(label_bank(session.dataset().questions, session.gateway(), session.prompts()));
    write_json(out_path(session, "labels_" + safe_file_part(session.config().model_id) + ".json"),
               json::parse(serialize_label_set(sets.back())));
  }
  return sets;
}

std::vector<StudentRecommendations> run_recommend(Session& session, const std::vector<GapReport>& reports,
                                                  const std::vector<ExtractedPreferences>& prefs) {
  const auto& c = session.config();
  RecommendOptions options{c.k, c.k_per_gap};
  std::vector<StudentRecommendations> out;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    StudentRecommendations r;
    if (reports[i].gaps.empty()) {
      // No searches are needed, so no backend is touched.
      if (c.k == 0) throw Error(ErrorKind::InvalidK, "K must be at least 1");
      r.set.student = reports[i].student;
      r.set.k_requested = c.k;
    } else {
      Gateway* gateway = c.mode_compat == StageMode::Agent ? &session.gateway() : nullptr;
      RecommendBackends backends{session.search(), session.fetch(), c.mode_compat, gateway, &session.prompts()};
      r.set = recommend(reports[i], prefs[i], options, backends, &r.trace);
    }
    out.push_back(std::move(r));
  }
  write_json(out_path(session, "recommendations.json"), recommendations_json(out, options));
  return out;
}

std::vector<StudentSummary> run_summarize(Session& session, const std::vector<StudentProficiency>& proficiency,
                                          const std::vector<GapReport>& reports,
                                          const std::vector<StudentRecommendations>& recs,
                                          const std::vector<ExtractedPreferences>& prefs) {
  const auto& c = session.config();
  Gateway* gateway = c.mode_summary == StageMode::Agent ? &session.gateway() : nullptr;
  std::vector<StudentSummary> out;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    SummaryInputs inputs{reports[i], recs[i].set, prefs[i], &proficiency[i].vector};
    auto summary = summarize(inputs, c.mode_summary, gateway, &session.prompts());
    text::write_file(out_path(session, "summary_" + safe_file_part(summary.student.value) + ".md"),
                     render_summary_markdown(summary));
    out.push_back(std::move(summary));
  }
  return out;
}

void run_evaluate(Session& session, const std::vector<StudentProficiency>& proficiency, std::vector<LabelSet> labels) {
  const auto& c = session.config();
  auto truth = derive_ground_truth(session.dataset(), c.bands);
  auto result = confusion(prediction_map(proficiency), truth);
  auto report = metrics(result.matrix);

  std::size_t truth_pairs = 0;
  for (const auto& [student, topics] : truth) truth_pairs += topics.size();
  json skipped = json::array();
  for (const auto& s : result.skipped) {
    skipped.push_back({{"student_id", s.key.first.value}, {"topic", s.key.second}, {"reason", s.reason}});
  }
  write_json(out_path(session, "metrics.json"), json{{"unit", "student_topic_pair"},
                                                     {"tau", c.tau},
                                                     {"include_exams_in_prediction", c.include_exams},
                                                     {"ground_truth_pairs", truth_pairs},
                                                     {"confusion", to_json(result.matrix)},
                                                     {"metrics", to_json(report)},
                                                     {"skipped", skipped}});

  if (labels.empty()) labels.push_back(load_instructor_labels(session.dataset().questions));
  if (labels.size() == 1) {
    auto existing = fs::path(c.out_dir) / ("labels_" + safe_file_part(c.model_id) + ".json");
    if (fs::exists(existing)) labels.push_back(parse_label_set(text::read_file(existing.string())));
  }

  const LabelSet& chart_source = !labels.front().labels.empty() || labels.size() == 1 ? labels.front() : labels.back();
  text::write_file(out_path(session, "chart_topic_difficulty.csv"), emit_chart_data(session.dataset(), chart_source));

  if (labels.size() > 1 && !labels.front().labels.empty() && !labels.back().labels.empty()) {
    auto cmp = compare_label_sets(labels.front(), labels.back());
    json failures = json::array();
    for (const auto& f : labels.back().failures) failures.push_back({{"question_id", f.question_id}, {"error", f.error}});
    write_json(out_path(session, "label_comparison.json"), json{{"reference", labels.front().source.name()},
                                                                {"prediction", labels.back().source.name()},
                                                                {"reference_coverage", round6(labels.front().coverage)},
                                                                {"prediction_coverage", round6(labels.back().coverage)},
                                                                {"only_reference", cmp.only_reference},
                                                                {"only_prediction", cmp.only_prediction},
                                                                {"confusion", to_json(cmp.matrix)},
                                                                {"metrics", to_json(cmp.report)},
                                                                {"prediction_failures", failures}});
  }
}

void run_pipeline(Session& session) {
  auto proficiency = run_proficiency(session);
  auto reports = run_diagnose(session, proficiency);
  auto labels = run_label(session, session.has_llm());
  auto prefs = run_preferences(session);
  auto recs = run_recommend(session, reports, prefs);
  run_summarize(session, proficiency, reports, recs, prefs);
  run_evaluate(session, proficiency, std::move(labels));
  session.finish();
}

}  // namespace align
