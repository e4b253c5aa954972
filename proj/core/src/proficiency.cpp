#include "align/proficiency.hpp"

#include <algorithm>
#include <cmath>

#include "align/error.hpp"

namespace align {

void BandConfig::validate() const {
  if (!(medium_min > 0.0 && medium_min < high_min && high_min <= 1.0)) {
    throw Error(ErrorKind::InvalidBands,
                "need 0 < medium_min < high_min <= 1, got high " + format_number(high_min) + " medium " + format_number(medium_min));
  }
}

std::string_view to_string(Band band) noexcept {
  switch (band) {
    case Band::High: return "High";
    case Band::Medium: return "Medium";
    case Band::Low: return "Low";
    case Band::Unknown: return "Unknown";
  }
  return "";
}

std::optional<Band> parse_band(std::string_view s) noexcept {
  for (auto b : {Band::High, Band::Medium, Band::Low, Band::Unknown}) {
    if (to_string(b) == s) return b;
  }
  return std::nullopt;
}

Band band_for(double rho, const BandConfig& bands) noexcept {
  if (rho >= bands.high_min) return Band::High;
  if (rho >= bands.medium_min) return Band::Medium;
  return Band::Low;
}

std::map<Topic, TopicScores> process_gradebook(const std::vector<GradebookEntry>& entries, const std::set<Topic>& topics) {
  std::map<Topic, TopicScores> grouped;
  for (const auto& e : entries) {
    if (!topics.count(e.topic)) throw Error(ErrorKind::UnknownTopic, e.topic);
    auto& slot = grouped[e.topic];
    slot.topic = e.topic;
    slot.scores.push_back(e.normalized_score);
  }
  return grouped;
}

ProficiencyVector compute_proficiency(const std::map<Topic, TopicScores>& grouped, const std::set<Topic>& topics,
                                      const BandConfig& bands, const StudentId& student) {
  ProficiencyVector vec;
  vec.student = student;
  for (const auto& topic : topics) {
    TopicProficiency tp;
    tp.topic = topic;
    auto it = grouped.find(topic);
    if (it != grouped.end() && !it->second.scores.empty()) {
      const auto& scores = it->second.scores;
      // Sorted summation keeps rho independent of gradebook row order.
      std::vector<double> sorted(scores);
      std::sort(sorted.begin(), sorted.end());
      double sum = 0.0;
      for (double g : sorted) sum += g;
      tp.evidence_count = scores.size();
      tp.rho = std::clamp(sum / static_cast<double>(scores.size()), sorted.front(), sorted.back());
      tp.band = band_for(tp.rho, bands);
    }
    vec.entries.emplace(topic, std::move(tp));
  }
  return vec;
}

std::vector<SkillGapEntry> identify_gaps(const ProficiencyVector& vector, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error(ErrorKind::InvalidTau, format_number(tau));
  std::vector<SkillGapEntry> gaps;
  for (const auto& [topic, tp] : vector.entries) {
    if (tp.evidence_count > 0 && tp.rho < tau) gaps.push_back({topic, tp.rho, 0});
  }
  // Means that agree to 1e-9 count as tied so summation noise cannot override the topic-name tie break.
  auto key = [](double rho) { return std::llround(rho * 1e9); };
  std::sort(gaps.begin(), gaps.end(), [&](const SkillGapEntry& a, const SkillGapEntry& b) {
    if (key(a.rho) != key(b.rho)) return key(a.rho) < key(b.rho);
    return a.topic < b.topic;
  });
  for (std::size_t i = 0; i < gaps.size(); ++i) gaps[i].rank = i + 1;
  return gaps;
}

std::vector<GradebookEntry> proficiency_inputs(const CourseDataset& dataset, const StudentId& student, bool include_exams) {
  std::vector<GradebookEntry> out;
  for (const auto& e : dataset.gradebook) {
    if (e.student != student) continue;
    if (!include_exams && dataset.is_exam(e.assessment_id)) continue;
    out.push_back(e);
  }
  return out;
}

StudentProficiency analyze_student(const CourseDataset& dataset, const StudentId& student, const ProficiencyOptions& options) {
  options.bands.validate();
  auto grouped = process_gradebook(proficiency_inputs(dataset, student, options.include_exams), dataset.topics);
  StudentProficiency result;
  result.vector = compute_proficiency(grouped, dataset.topics, options.bands, student);
  result.gaps = identify_gaps(result.vector, options.tau);
  return result;
}

std::vector<StudentProficiency> analyze_course(const CourseDataset& dataset, const ProficiencyOptions& options) {
  std::vector<StudentProficiency> out;
  for (const auto& s : dataset.students) out.push_back(analyze_student(dataset, s, options));
  return out;
}

double round6(double value) noexcept { return std::round(value * 1e6) / 1e6; }

}  // namespace align
