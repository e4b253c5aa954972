#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "align/diagnosis.hpp"
#include "align/evaluation.hpp"
#include "align/labeling.hpp"
#include "align/recommender.hpp"
#include "align/summarizer.hpp"

namespace align {

struct RunConfig {
  std::string course_path;
  double tau = k_default_tau;
  BandConfig bands;
  std::size_t k = 3;
  bool k_per_gap = false;
  bool include_exams = false;
  StageMode mode_diagnose = StageMode::Agent;
  StageMode mode_compat = StageMode::Rule;
  StageMode mode_summary = StageMode::Rule;
  StageMode mode_prefs = StageMode::Rule;
  std::optional<std::string> replay_path;
  std::optional<std::string> record_path;
  std::optional<std::string> fixtures_dir;  // holds search.json and pages/
  std::optional<std::string> prompts_dir;
  std::string out_dir = "out";
  std::string model_id = "gpt-4o";
  std::optional<std::string> as_of;  // overrides the manifest's as_of

  /// Errors: InvalidTau, InvalidK, InvalidBands, ConfigError (missing replay/fixture/prompt paths).
  void validate() const;
};

/// Loaded course plus the backends a run needs. Backends are created on first use.
class Session {
 public:
  /// Overrides replace the configured backends (tools that script replies or record fixtures use them).
  explicit Session(RunConfig config, ChatBackend* chat_override = nullptr, SearchBackend* search_override = nullptr,
                   FetchBackend* fetch_override = nullptr);
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const RunConfig& config() const noexcept { return config_; }
  const CourseDataset& dataset() const noexcept { return dataset_; }
  const PromptLibrary& prompts() const noexcept { return prompts_; }
  std::chrono::system_clock::time_point generated_at() const noexcept { return generated_at_; }

  /// True when replay, an override or ALIGN_LLM_URL provides a chat backend.
  bool has_llm() const;
  /// Errors: ConfigError when no chat backend is available.
  Gateway& gateway();
  Gateway* gateway_if_available();
  SearchBackend& search();
  FetchBackend& fetch();

  /// Writes the replay store to --record when requested and any call was made.
  void finish();

 private:
  RunConfig config_;
  CourseDataset dataset_;
  PromptLibrary prompts_;
  std::chrono::system_clock::time_point generated_at_;
  ChatBackend* chat_override_;
  SearchBackend* search_override_;
  FetchBackend* fetch_override_;
  std::unique_ptr<ChatBackend> chat_;
  std::unique_ptr<Gateway> gateway_;
  std::unique_ptr<SearchBackend> search_;
  std::unique_ptr<FetchBackend> fetch_;
};

struct StudentRecommendations {
  RecommendationSet set;
  std::vector<TraceEntry> trace;
};

// Stage runners. Each computes its stage from the session (recomputing upstream stages passed in) and
// writes its interface files into config().out_dir.
std::vector<StudentProficiency> run_proficiency(Session& session);
std::vector<GapReport> run_diagnose(Session& session, const std::vector<StudentProficiency>& proficiency);
std::vector<ExtractedPreferences> run_preferences(Session& session);
std::vector<LabelSet> run_label(Session& session, bool with_model);
std::vector<StudentRecommendations> run_recommend(Session& session, const std::vector<GapReport>& reports,
                                                  const std::vector<ExtractedPreferences>& prefs);
std::vector<StudentSummary> run_summarize(Session& session, const std::vector<StudentProficiency>& proficiency,
                                          const std::vector<GapReport>& reports,
                                          const std::vector<StudentRecommendations>& recs,
                                          const std::vector<ExtractedPreferences>& prefs);
/// `labels`: instructor first, then an optional model set. Without one, a labels_<model>.json already in
/// the output directory is used for the comparison.
void run_evaluate(Session& session, const std::vector<StudentProficiency>& proficiency, std::vector<LabelSet> labels);

/// validate -> proficiency -> diagnose -> (label) -> recommend -> summarize -> evaluate.
void run_pipeline(Session& session);

// Report documents, exposed for tests.
nlohmann::json proficiency_json(const Session& session, const std::vector<StudentProficiency>& students);
nlohmann::json gap_reports_json(const std::vector<GapReport>& reports);
nlohmann::json recommendations_json(const std::vector<StudentRecommendations>& recs, const RecommendOptions& options);

/// Pretty JSON with a trailing newline.
void write_json(const std::string& path, const nlohmann::json& doc);

}  // namespace align
