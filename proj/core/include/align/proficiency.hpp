#pragma once

#include <map>
#include <set>
#include <string_view>
#include <vector>

#include "align/learner_data.hpp"

namespace align {

struct TopicScores {
  Topic topic;
  std::vector<double> scores;  // normalized g_i in [0,1], gradebook order

  friend bool operator==(const TopicScores&, const TopicScores&) = default;
};

/// Cutoffs for categorical bands: High iff rho >= high_min, Medium iff medium_min <= rho < high_min.
struct BandConfig {
  double high_min = 0.80;
  double medium_min = 0.60;

  /// Throws Error(InvalidBands) unless 0 < medium_min < high_min <= 1.
  void validate() const;
};

enum class Band { High, Medium, Low, Unknown };
std::string_view to_string(Band band) noexcept;
std::optional<Band> parse_band(std::string_view s) noexcept;

Band band_for(double rho, const BandConfig& bands) noexcept;

inline constexpr double k_default_tau = 0.70;

struct TopicProficiency {
  Topic topic;
  double rho = 0.0;  // 0 when evidence_count == 0
  Band band = Band::Unknown;
  std::size_t evidence_count = 0;

  friend bool operator==(const TopicProficiency&, const TopicProficiency&) = default;
};

struct ProficiencyVector {
  StudentId student;
  std::map<Topic, TopicProficiency> entries;  // exactly one per course topic

  friend bool operator==(const ProficiencyVector&, const ProficiencyVector&) = default;
};

struct SkillGapEntry {
  Topic topic;
  double rho = 0.0;
  std::size_t rank = 0;  // 1-based

  friend bool operator==(const SkillGapEntry&, const SkillGapEntry&) = default;
};

/// Groups normalized scores by topic. Topics with no entries are absent from the result.
/// Throws Error(UnknownTopic) for an entry whose topic is outside `topics`.
std::map<Topic, TopicScores> process_gradebook(const std::vector<GradebookEntry>& entries, const std::set<Topic>& topics);

/// rho_t is the unweighted mean of the topic's scores; topics without scores become Unknown.
ProficiencyVector compute_proficiency(const std::map<Topic, TopicScores>& grouped, const std::set<Topic>& topics,
                                      const BandConfig& bands, const StudentId& student);

/// Topics with evidence and rho < tau (strict), ascending rho then topic name, ranked from 1.
/// rho values equal to 9 decimal places are ordered by topic name.
/// Throws Error(InvalidTau) when tau is outside [0,1].
std::vector<SkillGapEntry> identify_gaps(const ProficiencyVector& vector, double tau);

struct ProficiencyOptions {
  BandConfig bands;
  double tau = k_default_tau;
  bool include_exams = false;  // exam items are reserved as ground truth by default
};

struct StudentProficiency {
  ProficiencyVector vector;
  std::vector<SkillGapEntry> gaps;
};

/// The student's gradebook entries that feed proficiency (exam assessments dropped unless requested).
std::vector<GradebookEntry> proficiency_inputs(const CourseDataset& dataset, const StudentId& student, bool include_exams);

StudentProficiency analyze_student(const CourseDataset& dataset, const StudentId& student, const ProficiencyOptions& options);

/// All students in ascending StudentId order.
std::vector<StudentProficiency> analyze_course(const CourseDataset& dataset, const ProficiencyOptions& options);

/// Rounds to 6 decimal places for reports.
double round6(double value) noexcept;

}  // namespace align
