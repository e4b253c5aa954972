#include <gtest/gtest.h>

#include <cmath>

#include "align/error.hpp"
#include "align/learner_data.hpp"
#include "align/text.hpp"
#include "support.hpp"

using namespace align;
namespace at = align::testing;
using at::Gen;

namespace {

const std::string k_gb_header = "student_id,assessment_id,topic,points_earned,points_possible\n";

template <typename F>
ErrorKind error_kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no align::Error thrown";
  return ErrorKind::ConfigError;
}

const char* k_question_json = R"([
  {"question_id": "q1", "quiz_id": "quiz1", "topic": " AVL Trees ", "kind": "multiple_choice",
   "text": "Which rotation fixes a left-left imbalance?", "options": ["left", "right", "double", "none"],
   "correct_answer": "right", "concept_tags": ["rotations"], "instructor_difficulty": "Medium", "unused": 3},
  {"question_id": "q2", "quiz_id": "quiz1", "topic": "AVL Trees", "kind": "short_answer",
   "text": "Name the balance factor bound.", "options": [], "correct_answer": "1"}
])";

}  // namespace

TEST(ParseGradebook, NormalizesScores) {
  auto entries = parse_gradebook(k_gb_header + "s1,quiz1,AVL Trees,8,10\ns1,quiz2,AVL Trees,10,10\n");
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_DOUBLE_EQ(entries[0].normalized_score, 0.8);
  EXPECT_DOUBLE_EQ(entries[1].normalized_score, 1.0);
  EXPECT_EQ(entries[0].student.value, "s1");
  EXPECT_EQ(entries[0].topic, "AVL Trees");
}

TEST(ParseGradebook, BoundsErrors) {
  EXPECT_EQ(error_kind_of([] { parse_gradebook(k_gb_header + "s1,quiz1,AVL Trees,11,10\n"); }), ErrorKind::BoundsError);
  EXPECT_EQ(error_kind_of([] { parse_gradebook(k_gb_header + "s1,quiz1,AVL Trees,0,0\n"); }), ErrorKind::BoundsError);
  EXPECT_EQ(error_kind_of([] { parse_gradebook(k_gb_header + "s1,quiz1,AVL Trees,-1,10\n"); }), ErrorKind::BoundsError);
}

TEST(ParseGradebook, MalformedRowsCarryLineNumbers) {
  try {
    parse_gradebook(k_gb_header + "s1,quiz1,AVL Trees,8,10\ns2,quiz1,AVL Trees,eight,10\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MalformedRow);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_EQ(error_kind_of([] { parse_gradebook(k_gb_header + "s1,quiz1,8,10\n"); }), ErrorKind::MalformedRow);
  EXPECT_EQ(error_kind_of([] { parse_gradebook("student,assessment,topic,earned,possible\n"); }), ErrorKind::MalformedRow);
}

TEST(ParseGradebook, KeepsDuplicateRows) {
  auto entries = parse_gradebook(k_gb_header + "s1,quiz1,T,1,2\ns1,quiz1,T,1,2\n");
  EXPECT_EQ(entries.size(), 2u);
}

TEST(ParseGradebook, NormalizedScoreProperty) {
  Gen gen(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::string raw = k_gb_header;
    std::vector<std::pair<double, double>> points;
    auto rows = gen.between(1, 30);
    for (int i = 0; i < rows; ++i) {
      double possible = std::round(gen.real(0.5, 100) * 100) / 100;
      double earned = std::round(gen.real(0, possible) * 100) / 100;
      if (earned > possible) earned = possible;
      points.emplace_back(earned, possible);
      raw += "s" + std::to_string(i) + ",a,T," + format_number(earned) + "," + format_number(possible) + "\n";
    }
    auto entries = parse_gradebook(raw);
    ASSERT_EQ(entries.size(), points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      EXPECT_NEAR(entries[i].normalized_score, points[i].first / points[i].second, 1e-9);
      EXPECT_GE(entries[i].normalized_score, 0.0);
      EXPECT_LE(entries[i].normalized_score, 1.0);
    }
  }
}

TEST(ParseResponses, ReadsQuotedAnswers) {
  auto rs = parse_responses("student_id,question_id,selected_answer,points_earned,points_possible\n"
                            "s1,q1,\"for (i = 0; i < n, i++)\",0,1\n");
  ASSERT_EQ(rs.size(), 1u);
  EXPECT_EQ(rs[0].selected_answer, "for (i = 0; i < n, i++)");
}

TEST(ParseQuestionBank, ValidShapes) {
  auto qs = parse_question_bank(k_question_json);
  ASSERT_EQ(qs.size(), 2u);
  EXPECT_EQ(qs[0].topic, "AVL Trees");  // trimmed
  EXPECT_EQ(qs[0].options.size(), 4u);
  EXPECT_EQ(qs[0].instructor_difficulty, Difficulty::Medium);
  EXPECT_EQ(qs[1].kind, QuestionKind::ShortAnswer);
  EXPECT_TRUE(qs[1].options.empty());
  EXPECT_FALSE(qs[1].instructor_difficulty.has_value());
}

TEST(ParseQuestionBank, Errors) {
  EXPECT_EQ(error_kind_of([] {
              parse_question_bank(R"([{"question_id":"q","quiz_id":"z","topic":"T","kind":"multiple_choice",
                "text":"?","options":["A","B","C","D"],"correct_answer":"E"}])");
            }),
            ErrorKind::InvalidAnswer);
  EXPECT_EQ(error_kind_of([] {
              parse_question_bank(R"([{"question_id":"q","quiz_id":"z","kind":"short_answer","text":"?","options":[],
                "correct_answer":"x"}])");
            }),
            ErrorKind::SchemaError);
  EXPECT_EQ(error_kind_of([] {
              parse_question_bank(R"([{"question_id":"q","quiz_id":"z","topic":"T","kind":"multiple_choice",
                "text":"?","options":["A"],"correct_answer":"A"}])");
            }),
            ErrorKind::SchemaError);
  EXPECT_EQ(error_kind_of([] { parse_question_bank("{not json"); }), ErrorKind::SchemaError);
}

TEST(QuizQuestion, CorrectnessRules) {
  auto q = at::mc_question("q", "z", "T", {"A", "B"}, "B");
  EXPECT_TRUE(q.is_correct(" B "));
  EXPECT_FALSE(q.is_correct("b"));
  QuizQuestion sa = q;
  sa.kind = QuestionKind::ShortAnswer;
  sa.correct_answer = "Stack Overflow";
  EXPECT_TRUE(sa.is_correct("stack overflow"));
}

TEST(ParsePreferences, PermutationRules) {
  auto ok = parse_preferences(R"([{"student_id":"s1","pacing":"self_paced",
    "modality_ranking":["video","interactive","hands_on","text_pdf"],"assessment_preference":"quizzes",
    "feedback_preference":"hints","study_time":"evenings","extra":{"goal":"pass"},"hobby":"chess"}])");
  ASSERT_EQ(ok.size(), 1u);
  EXPECT_EQ(ok[0].modality_ranking.front(), Modality::Video);
  EXPECT_EQ(ok[0].free_text.at("goal"), "pass");
  EXPECT_EQ(ok[0].free_text.at("hobby"), "chess");

  EXPECT_EQ(error_kind_of([] {
              parse_preferences(R"([{"student_id":"s1","pacing":"self_paced",
                "modality_ranking":["video","video","text_pdf","hands_on"],"assessment_preference":"q",
                "feedback_preference":"h","study_time":"e"}])");
            }),
            ErrorKind::DuplicateModality);
  EXPECT_EQ(error_kind_of([] {
              parse_preferences(R"([{"student_id":"s1",
                "modality_ranking":["video","interactive","hands_on","text_pdf"],"assessment_preference":"q",
                "feedback_preference":"h","study_time":"e"}])");
            }),
            ErrorKind::SchemaError);
}

namespace {

DatasetParts small_parts() {
  DatasetParts p;
  p.course_id = "C";
  p.questions = parse_question_bank(k_question_json);
  p.gradebook = {at::grade("s1", "quiz1", "AVL Trees", 8, 10), at::grade("s1", "final", "AVL Trees", 9, 10)};
  p.responses = {{StudentId{"s1"}, "q1", "right", 1, 1}};
  p.exam_assessment_ids = {"final"};
  return p;
}

}  // namespace

TEST(ValidateDataset, DanglingReference) {
  auto p = small_parts();
  p.responses.push_back({StudentId{"s1"}, "q404", "x", 0, 1});
  auto report = check_dataset(p);
  ASSERT_EQ(report.violations.size(), 1u);
  EXPECT_EQ(report.violations[0].kind, ViolationKind::DanglingReference);
}

TEST(ValidateDataset, EmptyResponsesAreAllowed) {
  auto p = small_parts();
  p.responses.clear();
  auto result = validate_dataset(p);
  ASSERT_TRUE(std::holds_alternative<CourseDataset>(result));
}

TEST(ValidateDataset, MissingExam) {
  auto p = small_parts();
  p.exam_assessment_ids.insert("midterm");
  auto report = check_dataset(p);
  ASSERT_EQ(report.violations.size(), 1u);
  EXPECT_EQ(report.violations[0].kind, ViolationKind::MissingExam);
}

TEST(ValidateDataset, UnknownStudentAgainstRoster) {
  auto p = small_parts();
  p.roster = std::set<StudentId>{StudentId{"s2"}};
  auto report = check_dataset(p);
  EXPECT_FALSE(report.ok());
  for (const auto& v : report.violations) EXPECT_EQ(v.kind, ViolationKind::UnknownStudent);
}

TEST(ValidateDataset, AcceptsIffReportEmptyProperty) {
  Gen gen(5);
  for (int trial = 0; trial < 300; ++trial) {
    auto p = small_parts();
    if (gen.coin(0.3)) p.responses.push_back({StudentId{"s1"}, "q" + std::to_string(gen.below(5)), "x", 0, 1});
    if (gen.coin(0.3)) p.responses.push_back({StudentId{"s" + std::to_string(gen.below(3))}, "q1", "x", 0, 1});
    if (gen.coin(0.2)) p.exam_assessment_ids.insert(gen.coin() ? "quiz1" : "midterm");
    if (gen.coin(0.2)) p.surveys.push_back(at::survey("s1", {Modality::Video, Modality::TextPdf, Modality::Interactive, Modality::HandsOn}));
    if (gen.coin(0.1)) p.surveys.push_back(p.surveys.empty() ? at::survey("s1", {}) : p.surveys.back());
    auto report = check_dataset(p);
    auto result = validate_dataset(p);
    EXPECT_EQ(report.ok(), std::holds_alternative<CourseDataset>(result));
  }
}

TEST(CourseBundle, SerializeParseRoundTrip) {
  Gen gen(21);
  for (int trial = 0; trial < 20; ++trial) {
    CourseDataset ds;
    ds.course_id = "C" + std::to_string(trial);
    std::vector<Topic> topics;
    for (int t = 0; t < 3; ++t) topics.push_back("Topic " + gen.word());
    ds.topics.insert(topics.begin(), topics.end());
    for (int s = 0; s < 4; ++s) ds.students.insert(StudentId{"s" + std::to_string(s)});
    for (int i = 0; i < 6; ++i) {
      auto q = at::mc_question("q" + std::to_string(i), gen.coin() ? "quiz1" : "final", gen.pick(topics),
                                    {"A, with comma", "B \"quoted\"", "C"}, "B \"quoted\"", {gen.word()},
                                    gen.coin() ? std::optional<Difficulty>(Difficulty::Hard) : std::nullopt);
      q.text = "Line one\nline " + gen.word();
      ds.questions.push_back(q);
    }
    for (const auto& s : ds.students) {
      for (const auto& t : topics) {
        double possible = double(gen.between(1, 20));
        double earned = std::floor(gen.real(0, possible) * 4) / 4;
        ds.gradebook.push_back({s, "quiz1", t, earned, possible, earned / possible});
        ds.gradebook.push_back({s, "final", t, possible, possible, 1.0});
      }
      ds.responses.push_back({s, "q1", "A, with comma", 0, 1});
      auto sv = at::survey(s.value, {Modality::HandsOn, Modality::Video, Modality::TextPdf, Modality::Interactive});
      sv.free_text["note"] = gen.word();
      ds.surveys.push_back(sv);
    }
    ds.exam_assessment_ids = {"final"};

    at::TempDir dir;
    write_course_bundle(ds, dir.path().string(), "2026-01-01");
    CourseManifest manifest;
    auto back = load_course(dir.file("course.json"), &manifest);
    EXPECT_EQ(back, ds);
    EXPECT_EQ(manifest.as_of, "2026-01-01");
  }
}

TEST(CourseBundle, SampleCourseLoads) {
  auto ds = load_course((at::sample_course() / "course.json").string());
  EXPECT_EQ(ds.course_id, "DS101");
  EXPECT_EQ(ds.students.size(), 6u);
  EXPECT_EQ(ds.topics.size(), 6u);
  EXPECT_TRUE(ds.is_exam("midterm"));
}

TEST(CourseBundle, ValidationFailureListsViolations) {
  at::TempDir dir;
  CourseDataset ds;
  ds.course_id = "C";
  ds.topics = {"T"};
  ds.students = {StudentId{"s1"}};
  ds.gradebook = {at::grade("s1", "quiz1", "T", 1, 2)};
  write_course_bundle(ds, dir.path().string());
  text::write_file(dir.file("responses.csv"),
                   "student_id,question_id,selected_answer,points_earned,points_possible\ns1,ghost,A,0,1\n");
  try {
    load_course(dir.file("course.json"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ValidationFailed);
    EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
  }
}
