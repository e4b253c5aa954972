#include "align/learner_data.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>

#include "align/csv.hpp"
#include "align/error.hpp"
#include "align/text.hpp"

namespace align {

using nlohmann::json;

std::string_view to_string(QuestionKind kind) noexcept {
  return kind == QuestionKind::MultipleChoice ? "multiple_choice" : "short_answer";
}

std::string_view to_string(Difficulty level) noexcept {
  switch (level) {
    case Difficulty::Easy: return "Easy";
    case Difficulty::Medium: return "Medium";
    case Difficulty::Hard: return "Hard";
  }
  return "";
}

std::string_view to_string(Modality modality) noexcept {
  switch (modality) {
    case Modality::Video: return "video";
    case Modality::TextPdf: return "text_pdf";
    case Modality::Interactive: return "interactive";
    case Modality::HandsOn: return "hands_on";
  }
  return "";
}

std::string_view to_string(Pacing pacing) noexcept {
  return pacing == Pacing::SelfPaced ? "self_paced" : "instructor_paced";
}

std::optional<QuestionKind> parse_question_kind(std::string_view s) noexcept {
  if (s == "multiple_choice") return QuestionKind::MultipleChoice;
  if (s == "short_answer") return QuestionKind::ShortAnswer;
  return std::nullopt;
}

std::optional<Difficulty> parse_difficulty(std::string_view s) noexcept {
  auto lower = text::to_lower(text::trim(s));
  if (lower == "easy") return Difficulty::Easy;
  if (lower == "medium") return Difficulty::Medium;
  if (lower == "hard") return Difficulty::Hard;
  return std::nullopt;
}

std::optional<Modality> parse_modality(std::string_view s) noexcept {
  for (auto m : k_all_modalities) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

std::optional<Pacing> parse_pacing(std::string_view s) noexcept {
  if (s == "self_paced") return Pacing::SelfPaced;
  if (s == "instructor_paced") return Pacing::InstructorPaced;
  return std::nullopt;
}

bool QuizQuestion::is_correct(std::string_view selected) const {
  auto a = text::trim(selected);
  auto b = text::trim(correct_answer);
  if (kind == QuestionKind::ShortAnswer) return text::to_lower(a) == text::to_lower(b);
  return a == b;
}

const QuizQuestion* CourseDataset::find_question(std::string_view question_id) const {
  for (const auto& q : questions) {
    if (q.question_id == question_id) return &q;
  }
  return nullptr;
}

const PreferenceSurvey* CourseDataset::find_survey(const StudentId& student) const {
  for (const auto& s : surveys) {
    if (s.student == student) return &s;
  }
  return nullptr;
}

std::string format_number(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) return text::fixed(value, 17);
  return std::string(buf, end);
}

namespace {

std::string line_ref(std::size_t line) { return "line " + std::to_string(line); }

double parse_points(const std::string& field, std::size_t line, std::string_view column) {
  auto s = text::trim(field);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) {
    throw Error(ErrorKind::MalformedRow, line_ref(line) + ": non-numeric " + std::string(column) + " '" + field + "'");
  }
  return value;
}

void check_points(double earned, double possible, std::size_t line) {
  if (possible <= 0.0) {
    throw Error(ErrorKind::BoundsError, line_ref(line) + ": points_possible must be positive");
  }
  if (earned < 0.0 || earned > possible) {
    throw Error(ErrorKind::BoundsError,
                line_ref(line) + ": points_earned " + format_number(earned) + " outside [0, " + format_number(possible) + "]");
  }
}

std::vector<csv::Row> parse_table(std::string_view raw, std::string_view expected_header) {
  auto rows = csv::parse(raw);
  if (rows.empty()) throw Error(ErrorKind::MalformedRow, "line 1: missing header");
  std::vector<std::string> header;
  for (const auto& f : rows.front().fields) header.push_back(text::trim(f));
  if (header != text::split(expected_header, ',')) {
    throw Error(ErrorKind::MalformedRow, "line 1: expected header '" + std::string(expected_header) + "'");
  }
  rows.erase(rows.begin());
  for (const auto& row : rows) {
    if (row.fields.size() != header.size()) {
      throw Error(ErrorKind::MalformedRow, line_ref(row.line) + ": expected " + std::to_string(header.size()) +
                                               " columns, found " + std::to_string(row.fields.size()));
    }
  }
  return rows;
}

StudentId student_from(const std::string& raw, std::size_t line) {
  auto id = text::trim(raw);
  if (id.empty()) throw Error(ErrorKind::MalformedRow, line_ref(line) + ": empty student_id");
  return StudentId{id};
}

json parse_json_array(std::string_view raw, std::string_view what) {
  json doc;
  try {
    doc = json::parse(raw);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::SchemaError, std::string(what) + ": " + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorKind::SchemaError, std::string(what) + ": expected a JSON array");
  return doc;
}

const json& require(const json& obj, const char* key, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    throw Error(ErrorKind::SchemaError, std::string(where) + ": missing required field '" + key + "'");
  }
  return *it;
}

std::string require_string(const json& obj, const char* key, std::string_view where) {
  const auto& v = require(obj, key, where);
  if (!v.is_string()) throw Error(ErrorKind::SchemaError, std::string(where) + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<std::string> string_list(const json& v, const char* key, std::string_view where) {
  if (!v.is_array()) throw Error(ErrorKind::SchemaError, std::string(where) + ": field '" + key + "' must be an array");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) {
      throw Error(ErrorKind::SchemaError, std::string(where) + ": field '" + key + "' must contain strings");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

std::vector<GradebookEntry> parse_gradebook(std::string_view raw) {
  std::vector<GradebookEntry> entries;
  for (const auto& row : parse_table(raw, k_gradebook_header)) {
    GradebookEntry e;
    e.student = student_from(row.fields[0], row.line);
    e.assessment_id = text::trim(row.fields[1]);
    e.topic = text::trim(row.fields[2]);
    if (e.assessment_id.empty() || e.topic.empty()) {
      throw Error(ErrorKind::MalformedRow, line_ref(row.line) + ": empty assessment_id or topic");
    }
    e.points_earned = parse_points(row.fields[3], row.line, "points_earned");
    e.points_possible = parse_points(row.fields[4], row.line, "points_possible");
    check_points(e.points_earned, e.points_possible, row.line);
    e.normalized_score = e.points_earned / e.points_possible;
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<QuestionResponse> parse_responses(std::string_view raw) {
  std::vector<QuestionResponse> responses;
  for (const auto& row : parse_table(raw, k_responses_header)) {
    QuestionResponse r;
    r.student = student_from(row.fields[0], row.line);
    r.question_id = text::trim(row.fields[1]);
    if (r.question_id.empty()) throw Error(ErrorKind::MalformedRow, line_ref(row.line) + ": empty question_id");
    r.selected_answer = row.fields[2];
    r.points_earned = parse_points(row.fields[3], row.line, "points_earned");
    r.points_possible = parse_points(row.fields[4], row.line, "points_possible");
    check_points(r.points_earned, r.points_possible, row.line);
    responses.push_back(std::move(r));
  }
  return responses;
}

std::vector<QuizQuestion> parse_question_bank(std::string_view raw) {
  auto doc = parse_json_array(raw, "questions");
  std::vector<QuizQuestion> questions;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& obj = doc[i];
    auto where = "question[" + std::to_string(i) + "]";
    if (!obj.is_object()) throw Error(ErrorKind::SchemaError, where + ": expected an object");

    QuizQuestion q;
    q.question_id = text::trim(require_string(obj, "question_id", where));
    where = "question '" + q.question_id + "'";
    q.quiz_id = text::trim(require_string(obj, "quiz_id", where));
    q.topic = text::trim(require_string(obj, "topic", where));
    auto kind = require_string(obj, "kind", where);
    auto parsed_kind = parse_question_kind(kind);
    if (!parsed_kind) throw Error(ErrorKind::SchemaError, where + ": unknown kind '" + kind + "'");
    q.kind = *parsed_kind;
    q.text = require_string(obj, "text", where);
    q.options = string_list(require(obj, "options", where), "options", where);
    q.correct_answer = require_string(obj, "correct_answer", where);
    if (auto it = obj.find("concept_tags"); it != obj.end() && !it->is_null()) {
      q.concept_tags = string_list(*it, "concept_tags", where);
    }
    if (auto it = obj.find("instructor_difficulty"); it != obj.end() && !it->is_null()) {
      if (!it->is_string()) throw Error(ErrorKind::SchemaError, where + ": instructor_difficulty must be a string");
      auto level = parse_difficulty(it->get<std::string>());
      if (!level) throw Error(ErrorKind::SchemaError, where + ": unknown difficulty '" + it->get<std::string>() + "'");
      q.instructor_difficulty = level;
    }

    if (q.question_id.empty()) throw Error(ErrorKind::SchemaError, "question[" + std::to_string(i) + "]: empty question_id");
    if (q.topic.empty()) throw Error(ErrorKind::SchemaError, where + ": empty topic");
    if (!seen.insert(q.question_id).second) throw Error(ErrorKind::SchemaError, where + ": duplicate question_id");
    if (q.kind == QuestionKind::MultipleChoice) {
      if (q.options.size() < 2) throw Error(ErrorKind::SchemaError, where + ": multiple_choice needs at least 2 options");
      bool found = false;
      for (const auto& o : q.options) found = found || o == q.correct_answer;
      if (!found) {
        throw Error(ErrorKind::InvalidAnswer, where + ": correct_answer '" + q.correct_answer + "' is not an option");
      }
    }
    questions.push_back(std::move(q));
  }
  return questions;
}

std::vector<PreferenceSurvey> parse_preferences(std::string_view raw) {
  static const std::set<std::string> known = {"student_id",          "pacing",     "modality_ranking", "assessment_preference",
                                              "feedback_preference", "study_time", "extra"};
  auto doc = parse_json_array(raw, "preferences");
  std::vector<PreferenceSurvey> surveys;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& obj = doc[i];
    auto where = "survey[" + std::to_string(i) + "]";
    if (!obj.is_object()) throw Error(ErrorKind::SchemaError, where + ": expected an object");

    PreferenceSurvey s;
    s.student = StudentId{text::trim(require_string(obj, "student_id", where))};
    if (s.student.value.empty()) throw Error(ErrorKind::SchemaError, where + ": empty student_id");
    where = "survey for '" + s.student.value + "'";
    auto pacing = require_string(obj, "pacing", where);
    auto parsed_pacing = parse_pacing(pacing);
    if (!parsed_pacing) throw Error(ErrorKind::SchemaError, where + ": unknown pacing '" + pacing + "'");
    s.pacing = *parsed_pacing;

    std::set<Modality> seen;
    for (const auto& name : string_list(require(obj, "modality_ranking", where), "modality_ranking", where)) {
      auto m = parse_modality(name);
      if (!m) throw Error(ErrorKind::SchemaError, where + ": unknown modality '" + name + "'");
      if (!seen.insert(*m).second) throw Error(ErrorKind::DuplicateModality, where + ": '" + name + "' ranked twice");
      s.modality_ranking.push_back(*m);
    }
    if (s.modality_ranking.size() != std::size(k_all_modalities)) {
      throw Error(ErrorKind::SchemaError, where + ": modality_ranking must rank all four modalities");
    }
    s.assessment_preference = require_string(obj, "assessment_preference", where);
    s.feedback_preference = require_string(obj, "feedback_preference", where);
    s.study_time = require_string(obj, "study_time", where);

    if (auto it = obj.find("extra"); it != obj.end() && !it->is_null()) {
      if (!it->is_object()) throw Error(ErrorKind::SchemaError, where + ": extra must be an object");
      for (const auto& [k, v] : it->items()) s.free_text[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
    // Unrecognised top-level survey items are kept rather than rejected.
    for (const auto& [k, v] : obj.items()) {
      if (known.count(k)) continue;
      s.free_text[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
    surveys.push_back(std::move(s));
  }
  return surveys;
}

std::string serialize_gradebook(const std::vector<GradebookEntry>& entries) {
  std::string out = std::string(k_gradebook_header) + "\n";
  for (const auto& e : entries) {
    out += csv::format_row({e.student.value, e.assessment_id, e.topic, format_number(e.points_earned),
                            format_number(e.points_possible)});
  }
  return out;
}

std::string serialize_responses(const std::vector<QuestionResponse>& responses) {
  std::string out = std::string(k_responses_header) + "\n";
  for (const auto& r : responses) {
    out += csv::format_row({r.student.value, r.question_id, r.selected_answer, format_number(r.points_earned),
                            format_number(r.points_possible)});
  }
  return out;
}

std::string serialize_question_bank(const std::vector<QuizQuestion>& questions) {
  json arr = json::array();
  for (const auto& q : questions) {
    json obj = {{"question_id", q.question_id}, {"quiz_id", q.quiz_id},   {"topic", q.topic},
                {"kind", to_string(q.kind)},    {"text", q.text},         {"options", q.options},
                {"correct_answer", q.correct_answer}, {"concept_tags", q.concept_tags}};
    if (q.instructor_difficulty) obj["instructor_difficulty"] = to_string(*q.instructor_difficulty);
    arr.push_back(std::move(obj));
  }
  return arr.dump(2) + "\n";
}

std::string serialize_preferences(const std::vector<PreferenceSurvey>& surveys) {
  json arr = json::array();
  for (const auto& s : surveys) {
    json ranking = json::array();
    for (auto m : s.modality_ranking) ranking.push_back(to_string(m));
    arr.push_back({{"student_id", s.student.value},
                   {"pacing", to_string(s.pacing)},
                   {"modality_ranking", ranking},
                   {"assessment_preference", s.assessment_preference},
                   {"feedback_preference", s.feedback_preference},
                   {"study_time", s.study_time},
                   {"extra", s.free_text}});
  }
  return arr.dump(2) + "\n";
}

std::string_view to_string(ViolationKind kind) noexcept {
  switch (kind) {
    case ViolationKind::DanglingReference: return "DanglingReference";
    case ViolationKind::UnknownStudent: return "UnknownStudent";
    case ViolationKind::MissingExam: return "MissingExam";
    case ViolationKind::DuplicateQuestion: return "DuplicateQuestion";
    case ViolationKind::DuplicateSurvey: return "DuplicateSurvey";
    case ViolationKind::UnknownTopic: return "UnknownTopic";
  }
  return "";
}

namespace {

std::set<StudentId> roster_of(const DatasetParts& parts) {
  if (parts.roster) return *parts.roster;
  std::set<StudentId> roster;
  for (const auto& e : parts.gradebook) roster.insert(e.student);
  for (const auto& s : parts.surveys) roster.insert(s.student);
  return roster;
}

std::set<Topic> topics_of(const DatasetParts& parts) {
  if (parts.topics) return *parts.topics;
  std::set<Topic> topics;
  for (const auto& q : parts.questions) topics.insert(q.topic);
  for (const auto& e : parts.gradebook) topics.insert(e.topic);
  return topics;
}

}  // namespace

ValidationReport check_dataset(const DatasetParts& parts) {
  ValidationReport report;
  auto add = [&](ViolationKind kind, std::string detail) { report.violations.push_back({kind, std::move(detail)}); };

  const auto roster = roster_of(parts);
  const auto topics = topics_of(parts);

  std::set<std::string> question_ids;
  for (const auto& q : parts.questions) {
    if (!question_ids.insert(q.question_id).second) add(ViolationKind::DuplicateQuestion, q.question_id);
    if (!topics.count(q.topic)) add(ViolationKind::UnknownTopic, "question " + q.question_id + " topic '" + q.topic + "'");
  }
  for (std::size_t i = 0; i < parts.responses.size(); ++i) {
    const auto& r = parts.responses[i];
    if (!question_ids.count(r.question_id)) {
      add(ViolationKind::DanglingReference, "response " + std::to_string(i + 1) + " references unknown question " + r.question_id);
    }
    if (!roster.count(r.student)) {
      add(ViolationKind::UnknownStudent, "response " + std::to_string(i + 1) + " student " + r.student.value);
    }
  }
  std::set<std::string> assessments;
  for (std::size_t i = 0; i < parts.gradebook.size(); ++i) {
    const auto& e = parts.gradebook[i];
    assessments.insert(e.assessment_id);
    if (!roster.count(e.student)) {
      add(ViolationKind::UnknownStudent, "gradebook row " + std::to_string(i + 1) + " student " + e.student.value);
    }
    if (!topics.count(e.topic)) {
      add(ViolationKind::UnknownTopic, "gradebook row " + std::to_string(i + 1) + " topic '" + e.topic + "'");
    }
  }
  std::set<StudentId> surveyed;
  for (const auto& s : parts.surveys) {
    if (!roster.count(s.student)) add(ViolationKind::UnknownStudent, "survey student " + s.student.value);
    if (!surveyed.insert(s.student).second) add(ViolationKind::DuplicateSurvey, s.student.value);
  }
  for (const auto& id : parts.exam_assessment_ids) {
    if (!assessments.count(id)) add(ViolationKind::MissingExam, id);
  }
  return report;
}

std::variant<CourseDataset, ValidationReport> validate_dataset(DatasetParts parts) {
  auto report = check_dataset(parts);
  if (!report.ok()) return report;

  CourseDataset ds;
  ds.course_id = std::move(parts.course_id);
  ds.students = roster_of(parts);
  ds.topics = topics_of(parts);
  ds.questions = std::move(parts.questions);
  ds.responses = std::move(parts.responses);
  ds.gradebook = std::move(parts.gradebook);
  ds.surveys = std::move(parts.surveys);
  ds.exam_assessment_ids = std::move(parts.exam_assessment_ids);
  return ds;
}

CourseManifest parse_manifest(std::string_view raw) {
  json doc;
  try {
    doc = json::parse(raw);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::SchemaError, std::string("course manifest: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::SchemaError, "course manifest: expected an object");
  CourseManifest m;
  const std::string where = "course manifest";
  m.course_id = require_string(doc, "course_id", where);
  auto optional_string = [&](const char* key, std::string& field) {
    if (auto it = doc.find(key); it != doc.end()) {
      if (!it->is_string()) throw Error(ErrorKind::SchemaError, where + ": '" + key + "' must be a string");
      field = it->get<std::string>();
    }
  };
  optional_string("gradebook", m.gradebook);
  optional_string("responses", m.responses);
  optional_string("questions", m.questions);
  optional_string("preferences", m.preferences);
  for (const auto& id : string_list(require(doc, "exam_assessment_ids", where), "exam_assessment_ids", where)) {
    m.exam_assessment_ids.insert(text::trim(id));
  }
  if (auto it = doc.find("topics"); it != doc.end() && !it->is_null()) {
    std::vector<Topic> topics;
    for (const auto& t : string_list(*it, "topics", where)) topics.push_back(text::trim(t));
    m.topics = std::move(topics);
  }
  if (auto it = doc.find("students"); it != doc.end() && !it->is_null()) m.students = string_list(*it, "students", where);
  if (auto it = doc.find("as_of"); it != doc.end() && !it->is_null()) {
    std::string as_of;
    optional_string("as_of", as_of);
    m.as_of = as_of;
  }
  return m;
}

std::string serialize_manifest(const CourseManifest& m) {
  json doc = {{"course_id", m.course_id},
              {"gradebook", m.gradebook},
              {"responses", m.responses},
              {"questions", m.questions},
              {"preferences", m.preferences},
              {"exam_assessment_ids", m.exam_assessment_ids}};
  if (m.topics) doc["topics"] = *m.topics;
  if (m.students) doc["students"] = *m.students;
  if (m.as_of) doc["as_of"] = *m.as_of;
  return doc.dump(2) + "\n";
}

namespace {

std::string read_part(const std::filesystem::path& base, const std::string& name, std::string_view what) {
  try {
    return text::read_file((base / name).string());
  } catch (const Error& e) {
    throw Error(ErrorKind::IoError, std::string(what) + ": " + e.detail());
  }
}

template <typename Fn>
auto with_file_context(const std::string& file, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), file + ": " + e.detail());
  }
}

}  // namespace

DatasetParts load_course_parts(const std::string& manifest_path, CourseManifest* manifest_out) {
  auto manifest = with_file_context(manifest_path, [&] { return parse_manifest(text::read_file(manifest_path)); });
  auto base = std::filesystem::path(manifest_path).parent_path();

  DatasetParts parts;
  parts.course_id = manifest.course_id;
  parts.gradebook = with_file_context(manifest.gradebook, [&] { return parse_gradebook(read_part(base, manifest.gradebook, "gradebook")); });
  parts.responses = with_file_context(manifest.responses, [&] { return parse_responses(read_part(base, manifest.responses, "responses")); });
  parts.questions = with_file_context(manifest.questions, [&] { return parse_question_bank(read_part(base, manifest.questions, "questions")); });
  parts.surveys = with_file_context(manifest.preferences, [&] { return parse_preferences(read_part(base, manifest.preferences, "preferences")); });
  parts.exam_assessment_ids = manifest.exam_assessment_ids;
  if (manifest.topics) parts.topics = std::set<Topic>(manifest.topics->begin(), manifest.topics->end());
  if (manifest.students) {
    std::set<StudentId> roster;
    for (const auto& s : *manifest.students) roster.insert(StudentId{text::trim(s)});
    parts.roster = std::move(roster);
  }
  if (manifest_out) *manifest_out = std::move(manifest);
  return parts;
}

CourseDataset load_course(const std::string& manifest_path, CourseManifest* manifest_out) {
  auto result = validate_dataset(load_course_parts(manifest_path, manifest_out));
  if (auto* report = std::get_if<ValidationReport>(&result)) {
    std::string detail = std::to_string(report->violations.size()) + " violation(s)";
    for (const auto& v : report->violations) detail += "; " + std::string(to_string(v.kind)) + ": " + v.detail;
    throw Error(ErrorKind::ValidationFailed, detail);
  }
  return std::get<CourseDataset>(std::move(result));
}

void write_course_bundle(const CourseDataset& ds, const std::string& dir, const std::optional<std::string>& as_of) {
  std::filesystem::create_directories(dir);
  auto base = std::filesystem::path(dir);
  CourseManifest m;
  m.course_id = ds.course_id;
  m.exam_assessment_ids = ds.exam_assessment_ids;
  m.topics = std::vector<Topic>(ds.topics.begin(), ds.topics.end());
  std::vector<std::string> students;
  for (const auto& s : ds.students) students.push_back(s.value);
  m.students = std::move(students);
  m.as_of = as_of;
  text::write_file((base / "course.json").string(), serialize_manifest(m));
  text::write_file((base / m.gradebook).string(), serialize_gradebook(ds.gradebook));
  text::write_file((base / m.responses).string(), serialize_responses(ds.responses));
  text::write_file((base / m.questions).string(), serialize_question_bank(ds.questions));
  text::write_file((base / m.preferences).string(), serialize_preferences(ds.surveys));
}

}  // namespace align
