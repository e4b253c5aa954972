#pragma once

#include <chrono>
#include <map>
#include <string>
#include <vector>

#include "align/gateway.hpp"
#include "align/learner_data.hpp"
#include "align/proficiency.hpp"

namespace align {

enum class StageMode { Rule, Agent };
std::string_view to_string(StageMode mode) noexcept;
std::optional<StageMode> parse_stage_mode(std::string_view s) noexcept;

struct ExtractedPreferences {
  StudentId student;
  Pacing pacing = Pacing::SelfPaced;
  std::vector<Modality> ranked_modalities;
  std::string feedback_style;
  std::string notes;

  /// The first `n` ranked modalities.
  std::vector<Modality> top(std::size_t n) const;

  friend bool operator==(const ExtractedPreferences&, const ExtractedPreferences&) = default;
};

/// Rule mode maps fields directly and leaves notes empty when the survey has no free text.
/// Agent mode summarizes free_text into notes through the gateway (no call when free_text is empty).
ExtractedPreferences extract_preferences(const PreferenceSurvey& survey, StageMode mode, Gateway* gateway = nullptr,
                                         const PromptLibrary* prompts = nullptr);

/// Neutral preferences for students who did not answer the survey.
ExtractedPreferences default_preferences(const StudentId& student);

struct MissedQuestion {
  std::string question_id;
  std::string text;
  std::string correct_answer;
  std::string selected_answer;
  QuestionKind kind = QuestionKind::MultipleChoice;
  std::vector<std::string> concept_tags;

  friend bool operator==(const MissedQuestion&, const MissedQuestion&) = default;
};

struct DiagnosisEvidence {
  StudentId student;
  Topic topic;
  std::vector<MissedQuestion> missed_questions;     // response order
  std::map<std::string, std::size_t> distractor_counts;  // wrong multiple-choice options only
  std::map<std::string, std::size_t> concept_tag_misses;
};

/// Collects the student's wrong answers on `topic`. Questions belonging to exam assessments are skipped
/// unless `include_exams` is set.
DiagnosisEvidence assemble_evidence(const CourseDataset& dataset, const StudentId& student, const Topic& topic,
                                    bool include_exams = false);

struct ConceptDiagnosis {
  Topic topic;
  std::vector<std::string> statements;
  std::vector<std::string> evidence_refs;  // question ids, first-citation order

  friend bool operator==(const ConceptDiagnosis&, const ConceptDiagnosis&) = default;
};

inline constexpr std::string_view k_insufficient_evidence =
    "Insufficient item-level evidence: no incorrect quiz responses were recorded for this topic.";

/// Parses a reply of the form `N. <statement> [evidence: qid,...]`, one item per line.
/// Returns nullopt (with the reason in `why`) when a line breaks the format or cites an unknown question.
std::optional<ConceptDiagnosis> parse_diagnosis_reply(std::string_view reply, const DiagnosisEvidence& evidence,
                                                      std::string& why);

std::string render_diagnosis_prompt(const DiagnosisEvidence& evidence, const PromptLibrary& prompts);

/// Agent diagnosis through the gateway, one reprompt on contract violation.
/// Errors: EmptyEvidence, UnparseableDiagnosis, BackendUnavailable, ReplayMiss.
ConceptDiagnosis diagnose(const DiagnosisEvidence& evidence, Gateway& gateway, const PromptLibrary& prompts);

/// Deterministic diagnosis from distractor and concept-tag tallies. Errors: EmptyEvidence.
ConceptDiagnosis diagnose_by_rules(const DiagnosisEvidence& evidence);

struct GapReport {
  StudentId student;
  std::vector<std::pair<SkillGapEntry, ConceptDiagnosis>> gaps;
  double tau_used = k_default_tau;
  std::chrono::system_clock::time_point generated_at;
};

/// Zips gaps with their diagnoses, preserving gap order. Errors: CountMismatch.
GapReport build_gap_report(const std::vector<SkillGapEntry>& gaps, const std::vector<ConceptDiagnosis>& diagnoses,
                           double tau, const StudentId& student,
                           std::chrono::system_clock::time_point generated_at = std::chrono::system_clock::now());

struct DiagnosisOptions {
  StageMode mode = StageMode::Agent;
  bool include_exams = false;
};

/// Evidence + diagnosis for every gap; gaps without missed questions get the fixed insufficient-evidence statement.
GapReport diagnose_gaps(const CourseDataset& dataset, const StudentProficiency& proficiency, double tau,
                        const DiagnosisOptions& options, Gateway* gateway, const PromptLibrary& prompts,
                        std::chrono::system_clock::time_point generated_at);

}  // namespace align
