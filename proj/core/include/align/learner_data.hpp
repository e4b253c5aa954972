#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace align {

/// Anonymized learner identifier. Opaque; only equality and ordering are meaningful.
struct StudentId {
  std::string value;

  friend auto operator<=>(const StudentId&, const StudentId&) = default;
  friend bool operator==(const StudentId&, const StudentId&) = default;
};

using Topic = std::string;

enum class QuestionKind { MultipleChoice, ShortAnswer };
enum class Difficulty { Easy, Medium, Hard };
enum class Modality { Video, TextPdf, Interactive, HandsOn };
enum class Pacing { SelfPaced, InstructorPaced };

inline constexpr Modality k_all_modalities[] = {Modality::Video, Modality::TextPdf, Modality::Interactive,
                                                Modality::HandsOn};

std::string_view to_string(QuestionKind kind) noexcept;
std::string_view to_string(Difficulty level) noexcept;
std::string_view to_string(Modality modality) noexcept;
std::string_view to_string(Pacing pacing) noexcept;

std::optional<QuestionKind> parse_question_kind(std::string_view s) noexcept;
std::optional<Difficulty> parse_difficulty(std::string_view s) noexcept;
std::optional<Modality> parse_modality(std::string_view s) noexcept;
std::optional<Pacing> parse_pacing(std::string_view s) noexcept;

struct QuizQuestion {
  std::string question_id;
  std::string quiz_id;
  Topic topic;
  QuestionKind kind = QuestionKind::MultipleChoice;
  std::string text;
  std::vector<std::string> options;
  std::string correct_answer;
  std::vector<std::string> concept_tags;
  std::optional<Difficulty> instructor_difficulty;

  /// Multiple choice compares exactly after trimming; short answers also ignore case.
  bool is_correct(std::string_view selected) const;

  friend bool operator==(const QuizQuestion&, const QuizQuestion&) = default;
};

struct QuestionResponse {
  StudentId student;
  std::string question_id;
  std::string selected_answer;
  double points_earned = 0.0;
  double points_possible = 1.0;

  friend bool operator==(const QuestionResponse&, const QuestionResponse&) = default;
};

struct GradebookEntry {
  StudentId student;
  std::string assessment_id;
  Topic topic;
  double points_earned = 0.0;
  double points_possible = 1.0;
  double normalized_score = 0.0;

  friend bool operator==(const GradebookEntry&, const GradebookEntry&) = default;
};

struct PreferenceSurvey {
  StudentId student;
  Pacing pacing = Pacing::SelfPaced;
  std::vector<Modality> modality_ranking;
  std::string assessment_preference;
  std::string feedback_preference;
  std::string study_time;
  std::map<std::string, std::string> free_text;

  friend bool operator==(const PreferenceSurvey&, const PreferenceSurvey&) = default;
};

/// Validated bundle for one course. Immutable once returned by validate_dataset.
struct CourseDataset {
  std::string course_id;
  std::set<StudentId> students;
  std::set<Topic> topics;
  std::vector<QuizQuestion> questions;
  std::vector<QuestionResponse> responses;
  std::vector<GradebookEntry> gradebook;
  std::vector<PreferenceSurvey> surveys;
  std::set<std::string> exam_assessment_ids;

  const QuizQuestion* find_question(std::string_view question_id) const;
  const PreferenceSurvey* find_survey(const StudentId& student) const;
  bool is_exam(std::string_view assessment_id) const { return exam_assessment_ids.count(std::string(assessment_id)) > 0; }

  friend bool operator==(const CourseDataset&, const CourseDataset&) = default;
};

// ---------------------------------------------------------------------------
// Parsing. All parsers are pure; they throw align::Error on malformed input.

inline constexpr std::string_view k_gradebook_header = "student_id,assessment_id,topic,points_earned,points_possible";
inline constexpr std::string_view k_responses_header = "student_id,question_id,selected_answer,points_earned,points_possible";

/// Errors: MalformedRow (with line number), BoundsError.
std::vector<GradebookEntry> parse_gradebook(std::string_view raw);
std::vector<QuestionResponse> parse_responses(std::string_view raw);
/// Errors: SchemaError, InvalidAnswer.
std::vector<QuizQuestion> parse_question_bank(std::string_view raw);
/// Errors: SchemaError, DuplicateModality.
std::vector<PreferenceSurvey> parse_preferences(std::string_view raw);

std::string serialize_gradebook(const std::vector<GradebookEntry>& entries);
std::string serialize_responses(const std::vector<QuestionResponse>& responses);
std::string serialize_question_bank(const std::vector<QuizQuestion>& questions);
std::string serialize_preferences(const std::vector<PreferenceSurvey>& surveys);

// ---------------------------------------------------------------------------
// Cross-validation

enum class ViolationKind { DanglingReference, UnknownStudent, MissingExam, DuplicateQuestion, DuplicateSurvey, UnknownTopic };
std::string_view to_string(ViolationKind kind) noexcept;

struct Violation {
  ViolationKind kind;
  std::string detail;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const noexcept { return violations.empty(); }
};

struct DatasetParts {
  std::string course_id;
  std::vector<QuizQuestion> questions;
  std::vector<QuestionResponse> responses;
  std::vector<GradebookEntry> gradebook;
  std::vector<PreferenceSurvey> surveys;
  std::set<std::string> exam_assessment_ids;
  /// Optional explicit roster and topic universe; derived from the data when absent.
  std::optional<std::set<StudentId>> roster;
  std::optional<std::set<Topic>> topics;
};

/// Every cross-reference violation in `parts`, in a deterministic order.
ValidationReport check_dataset(const DatasetParts& parts);

/// Succeeds exactly when check_dataset reports no violations.
std::variant<CourseDataset, ValidationReport> validate_dataset(DatasetParts parts);

// ---------------------------------------------------------------------------
// course.json bundles

struct CourseManifest {
  std::string course_id;
  std::string gradebook = "gradebook.csv";
  std::string responses = "responses.csv";
  std::string questions = "questions.json";
  std::string preferences = "preferences.json";
  std::set<std::string> exam_assessment_ids;
  std::optional<std::vector<Topic>> topics;
  std::optional<std::vector<std::string>> students;
  std::optional<std::string> as_of;
};

CourseManifest parse_manifest(std::string_view raw);
std::string serialize_manifest(const CourseManifest& manifest);

/// Reads the manifest and the four files it names (relative to the manifest directory).
DatasetParts load_course_parts(const std::string& manifest_path, CourseManifest* manifest_out = nullptr);

/// load_course_parts + validate_dataset; throws Error(ValidationFailed) listing the violations.
CourseDataset load_course(const std::string& manifest_path, CourseManifest* manifest_out = nullptr);

/// Writes course.json and the four data files into `dir` (created if missing).
void write_course_bundle(const CourseDataset& dataset, const std::string& dir,
                         const std::optional<std::string>& as_of = std::nullopt);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_number(double value);

}  // namespace align
