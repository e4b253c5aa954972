#include <gtest/gtest.h>

#include <cmath>

#include "align/error.hpp"
#include "align/proficiency.hpp"
#include "support.hpp"

using namespace align;
namespace at = align::testing;

namespace {

ProficiencyVector vector_for(const std::vector<GradebookEntry>& entries, const std::set<Topic>& topics,
                             const BandConfig& bands = {}) {
  return compute_proficiency(process_gradebook(entries, topics), topics, bands, StudentId{"s1"});
}

}  // namespace

TEST(Proficiency, MeanOfNormalizedScores) {
  std::set<Topic> topics{"AVL Trees", "Heaps"};
  auto v = vector_for({at::grade("s1", "q1", "AVL Trees", 8, 10), at::grade("s1", "q2", "AVL Trees", 1, 2),
                       at::grade("s1", "q3", "AVL Trees", 3, 4)},
                      topics);
  EXPECT_NEAR(v.entries.at("AVL Trees").rho, (0.8 + 0.5 + 0.75) / 3, 1e-12);
  EXPECT_EQ(v.entries.at("AVL Trees").evidence_count, 3u);
  EXPECT_EQ(v.entries.at("AVL Trees").band, Band::Medium);
  EXPECT_EQ(v.entries.at("Heaps").band, Band::Unknown);
  EXPECT_EQ(v.entries.at("Heaps").rho, 0.0);
  EXPECT_EQ(v.entries.size(), topics.size());
}

TEST(Proficiency, UnweightedAcrossPossiblePoints) {
  // 1/1 and 0/9 average to 0.5, not 1/10.
  auto v = vector_for({at::grade("s1", "a", "T", 1, 1), at::grade("s1", "b", "T", 0, 9)}, {"T"});
  EXPECT_DOUBLE_EQ(v.entries.at("T").rho, 0.5);
}

TEST(Proficiency, UnknownTopic) {
  try {
    process_gradebook({at::grade("s1", "a", "Graphs", 1, 1)}, {"Trees"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownTopic);
  }
}

TEST(Bands, Cutoffs) {
  BandConfig b;
  EXPECT_EQ(band_for(0.80, b), Band::High);
  EXPECT_EQ(band_for(0.7999999, b), Band::Medium);
  EXPECT_EQ(band_for(0.60, b), Band::Medium);
  EXPECT_EQ(band_for(0.59, b), Band::Low);
  EXPECT_EQ(band_for(0.0, b), Band::Low);
  EXPECT_THROW((BandConfig{0.6, 0.6}.validate()), Error);
  EXPECT_THROW((BandConfig{1.1, 0.6}.validate()), Error);
  EXPECT_THROW((BandConfig{0.8, 0.0}.validate()), Error);
  EXPECT_NO_THROW((BandConfig{1.0, 0.5}.validate()));
}

TEST(Gaps, StrictThresholdAndOrdering) {
  std::set<Topic> topics{"A", "B", "C", "D", "E"};
  auto v = vector_for({at::grade("s1", "q", "A", 7, 10), at::grade("s1", "q", "B", 5, 10), at::grade("s1", "q", "C", 1, 2),
                       at::grade("s1", "q", "D", 69, 100)},
                      topics);
  auto gaps = identify_gaps(v, 0.7);
  ASSERT_EQ(gaps.size(), 3u);  // A sits exactly at tau; E has no evidence
  EXPECT_EQ(gaps[0].topic, "B");
  EXPECT_EQ(gaps[1].topic, "C");
  EXPECT_EQ(gaps[2].topic, "D");
  EXPECT_EQ(gaps[0].rank, 1u);
  EXPECT_EQ(gaps[2].rank, 3u);
}

TEST(Gaps, TauBounds) {
  auto v = vector_for({at::grade("s1", "q", "A", 0, 1)}, {"A"});
  EXPECT_TRUE(identify_gaps(v, 0.0).empty());
  EXPECT_EQ(identify_gaps(v, 1.0).size(), 1u);
  for (double bad : {-0.01, 1.01, std::nan("")}) {
    try {
      identify_gaps(v, bad);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::InvalidTau);
    }
  }
}

TEST(Gaps, EqualMeansTieByTopicName) {
  // 0.5 reached through different sums.
  std::set<Topic> topics{"Zeta", "Alpha", "Mid"};
  auto v = vector_for({at::grade("s1", "q", "Zeta", 1, 2), at::grade("s1", "q", "Alpha", 3, 10),
                       at::grade("s1", "r", "Alpha", 7, 10), at::grade("s1", "q", "Mid", 1, 10),
                       at::grade("s1", "r", "Mid", 2, 10), at::grade("s1", "s", "Mid", 12, 10 * 1.0)},
                      topics);
  auto gaps = identify_gaps(v, 0.7);
  ASSERT_EQ(gaps.size(), 3u);
  EXPECT_EQ(gaps[0].topic, "Alpha");
  EXPECT_EQ(gaps[1].topic, "Mid");
  EXPECT_EQ(gaps[2].topic, "Zeta");
}

TEST(AnalyzeStudent, ExamsExcludedByDefault) {
  CourseDataset ds;
  ds.topics = {"T"};
  ds.students = {StudentId{"s1"}};
  ds.gradebook = {at::grade("s1", "quiz1", "T", 2, 10), at::grade("s1", "final", "T", 10, 10)};
  ds.exam_assessment_ids = {"final"};
  auto quiz_only = analyze_student(ds, StudentId{"s1"}, {});
  EXPECT_DOUBLE_EQ(quiz_only.vector.entries.at("T").rho, 0.2);
  ProficiencyOptions with_exams;
  with_exams.include_exams = true;
  EXPECT_DOUBLE_EQ(analyze_student(ds, StudentId{"s1"}, with_exams).vector.entries.at("T").rho, 0.6);
}

TEST(Proficiency, MatchesOracleProperty) {
  at::Gen gen(2024);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Topic> names;
    auto n_topics = gen.between(1, 8);
    for (int t = 0; t < n_topics; ++t) names.push_back("topic_" + std::to_string(t));
    std::set<Topic> topics(names.begin(), names.end());
    std::vector<GradebookEntry> entries;
    auto n = gen.between(0, 200);
    for (int i = 0; i < n; ++i) {
      auto possible = double(gen.between(1, 100));
      auto earned = double(gen.between(0, static_cast<std::int64_t>(possible)));
      entries.push_back(at::grade("s1", "a" + std::to_string(i), gen.pick(names), earned, possible));
    }
    double tau = gen.unit();
    auto v = vector_for(entries, topics);
    auto means = at::oracle_topic_means(entries);
    for (const auto& topic : topics) {
      const auto& tp = v.entries.at(topic);
      if (means.count(topic)) {
        EXPECT_NEAR(tp.rho, means.at(topic), 1e-12);
        EXPECT_GE(tp.rho, 0.0);
        EXPECT_LE(tp.rho, 1.0);
      } else {
        EXPECT_EQ(tp.band, Band::Unknown);
      }
    }
    auto gaps = identify_gaps(v, tau);
    auto expected = at::oracle_gaps(means, tau);
    ASSERT_EQ(gaps.size(), expected.size()) << "trial " << trial;
    for (std::size_t i = 0; i < gaps.size(); ++i) {
      EXPECT_EQ(gaps[i].topic, expected[i].first) << "trial " << trial;
      EXPECT_EQ(gaps[i].rank, i + 1);
    }
  }
}

TEST(Proficiency, RowOrderDoesNotMatter) {
  at::Gen gen(77);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<GradebookEntry> entries;
    for (int i = 0; i < 30; ++i) entries.push_back(at::grade("s1", "a", "T", double(gen.between(0, 7)), 7));
    auto a = vector_for(entries, {"T"});
    std::shuffle(entries.begin(), entries.end(), gen.engine());
    auto b = vector_for(entries, {"T"});
    EXPECT_EQ(a, b);
  }
}
